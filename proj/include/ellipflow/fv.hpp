#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ellipflow/emden.hpp"
#include "ellipflow/types.hpp"

namespace ellipflow {

/// Cell-averaged conserved variables (density, momentum) on a uniform
/// Cartesian grid with ghost layers, for the polytropic system with p = K rho^gamma.
struct FvGrid {
    int dims = 1;                       // 1 or 2
    std::array<int, 2> cells{0, 1};     // interior cells per axis
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};
    std::array<double, 2> h{0.0, 0.0};
    int ghost = 2;
    double rho_floor = 1e-10;
    double time = 0.0;

    std::vector<double> rho;
    std::array<std::vector<double>, 2> mom;

    int nx_tot() const { return cells[0] + 2 * ghost; }
    int ny_tot() const { return dims == 2 ? cells[1] + 2 * ghost : 1; }
    size_t index(int i, int j) const {
        return static_cast<size_t>(j) * static_cast<size_t>(nx_tot()) + static_cast<size_t>(i);
    }
    // Cell-center coordinate; index includes the ghost offset.
    double center(int axis, int idx_with_ghost) const {
        return lo[static_cast<size_t>(axis)] +
               (idx_with_ghost - ghost + 0.5) * h[static_cast<size_t>(axis)];
    }
    double cell_volume() const { return dims == 2 ? h[0] * h[1] : h[0]; }

    /// Totals of the conserved fields over the interior (mass, momenta).
    std::vector<double> interior_totals() const;
};

struct FvGridSpec {
    int dims = 1;
    std::array<int, 2> cells{64, 1};
    std::array<double, 2> lo{-1.0, -1.0};
    std::array<double, 2> hi{1.0, 1.0};
    int ghost = 2;
    double rho_floor = 1e-10;
};

enum class GhostPolicy { Periodic, Exact };

/// Initializes cell averages of rho and m = rho*u from the exact fields via
/// 2-point Gauss quadrature per axis, with the density floor applied.
/// Throws config_error when a bounded support reaches the domain boundary
/// and the run is not using exact ghost data.
FvGrid fv_init(const FvGridSpec& spec, const ModelParams& params, const EmdenState& state0,
               GhostPolicy policy = GhostPolicy::Exact);

/// Primitive state at one cell face.
struct CellPrim {
    double rho = 0.0;
    std::array<double, 2> u{0.0, 0.0};
};

/// Local Lax-Friedrichs (Rusanov) flux along `axis`: mean physical flux minus
/// half the max wave speed (|u|+c, c = sqrt(K gamma rho^{gamma-1})) times the
/// conserved jump. Consistent: flux(w, w) is the exact physical flux.
std::vector<double> rusanov_flux(const CellPrim& left, const CellPrim& right, int axis, int dims,
                                 const ModelParams& params);

/// Ghost-fill callback; receives the grid and the time the ghosts represent.
using GhostFill = std::function<void(FvGrid&, double)>;

GhostFill make_periodic_ghosts();
GhostFill make_exact_ghosts(const Trajectory& traj);

/// Ghost cells carry exact-solution cell averages at time t (time-consistent
/// Dirichlet data). Throws input_error when t is outside the trajectory range.
void exact_ghost_fill(FvGrid& grid, double t, const ModelParams& params, const Trajectory& traj);

struct FvStepResult {
    double dt = 0.0;
    // Net conserved quantity entering through the domain boundary during the
    // step (flux * face area * dt, summed over RK stages with their weights).
    std::vector<double> boundary_net;
    // Conserved mass added by the density floor (diagnostic; 0 when inactive).
    double floor_added = 0.0;
};

/// One SSP-RK2 step with MUSCL/minmod reconstruction on primitive variables
/// (piecewise-constant when `muscl` is false). dt = cfl / sum_d(lambda_d / h_d),
/// further capped by dt_cap (used to land exactly on a target time).
FvStepResult fv_step(FvGrid& grid, const ModelParams& params, const GhostFill& ghosts, double cfl,
                     bool muscl = true, double dt_cap = 1e300);

struct FvRunConfig {
    ModelParams params;
    EmdenState state0;
    FvGridSpec grid;                 // `cells` ignored; levels supply them
    std::vector<int> levels;         // interior cells per axis, >= 3 entries
    double cfl = 0.45;
    double t_end = 0.0;
    GhostPolicy ghosts = GhostPolicy::Exact;
    bool muscl = true;
    double u_error_cutoff = 1e-10;   // velocity errors measured where rho_exact >= cutoff
    // Invoked with each level's final grid (e.g. for snapshot export).
    std::function<void(const FvGrid&, int cells)> snapshot_cb;
};

struct FvLevelResult {
    int cells = 0;
    double l1_rho = 0.0, l2_rho = 0.0, linf_rho = 0.0;
    double l1_u = 0.0, l2_u = 0.0, linf_u = 0.0;
    long steps = 0;
    double dt_min = 0.0, dt_max = 0.0;
    std::vector<double> dt_history;
};

struct FvRunReport {
    double t_end = 0.0;
    std::vector<FvLevelResult> levels;
    std::vector<double> order_l1_rho;  // between consecutive levels
    double fitted_order_l1_rho = 0.0;  // least squares over all levels
    bool failed = false;
    std::string failure;
};

/// Runs each refinement level against the exact solution and measures error
/// norms and convergence orders at t_end. A breakdown at some level produces
/// a report with the completed levels and the failure flag set.
FvRunReport fv_run(const FvRunConfig& config);

/// Error norms of one grid against the exact solution at the grid's time.
struct FvErrorNorms {
    double l1_rho, l2_rho, linf_rho;
    double l1_u, l2_u, linf_u;
};
FvErrorNorms fv_error_norms(const FvGrid& grid, const ModelParams& params, const EmdenState& state,
                            double u_error_cutoff = 1e-10);

}  // namespace ellipflow
