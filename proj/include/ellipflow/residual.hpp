#pragma once

#include <span>

#include "ellipflow/emden.hpp"
#include "ellipflow/profile.hpp"
#include "ellipflow/types.hpp"

namespace ellipflow {

/// Mass residual rho_t + div(rho u) evaluated with analytic chain-rule
/// derivatives of the exact fields. Vanishes to rounding on the support
/// interior. Throws boundary_error outside the interior margin for gamma > 1.
double residual_mass_exact(const EmdenState& state, std::span<const double> x,
                           const ModelParams& params,
                           double interior_fraction = kDefaultInteriorFraction);

/// Natural magnitude of the mass-residual terms; residuals are compared
/// against 1e-12 * this.
double mass_residual_scale(const EmdenState& state, std::span<const double> x,
                           const ModelParams& params);

/// Momentum residual rho(u_t + (u.grad)u) + K grad(rho^gamma) - mu lap(u),
/// componentwise. The velocity is affine in x, so lap(u) vanishes identically
/// and the result does not depend on mu at all. `accel` must be the
/// scale-factor accelerations; with `verify_accel` set (default) it is checked
/// against the dynamical system by recomputation, which rejects inconsistent
/// inputs. Pass false to probe the sensitivity to perturbed accelerations.
std::vector<double> residual_momentum_exact(const EmdenState& state,
                                            std::span<const double> accel,
                                            std::span<const double> x, const ModelParams& params,
                                            bool verify_accel = true,
                                            double interior_fraction = kDefaultInteriorFraction);

/// Per-component scale for the momentum residual (sum of term magnitudes).
std::vector<double> momentum_residual_scale(const EmdenState& state,
                                            std::span<const double> accel,
                                            std::span<const double> x, const ModelParams& params);

/// Exact-solution field evaluator over a dense-output trajectory; supplies
/// rho and u at arbitrary (t, x) within the integrated time range.
class ExactField {
public:
    ExactField(const Trajectory& traj) : traj_(traj) {}

    FieldSample sample(double t, std::span<const double> x) const {
        return evaluate_field(traj_.state_at(t), x, traj_.params);
    }
    const ModelParams& params() const { return traj_.params; }
    const Trajectory& trajectory() const { return traj_; }

private:
    const Trajectory& traj_;
};

struct ResidualReport {
    double t = 0.0;
    std::vector<double> x;
    double mass_residual = 0.0;
    std::vector<double> momentum_residual;
    bool finite_difference = false;
    double h = 0.0;  // finite-difference step, 0 for closed form
    bool in_support_interior = true;
};

/// Central-difference residuals of the full system at (t, x); second-order
/// accurate in h on smooth regions. All stencil points must stay inside the
/// support interior (gamma > 1) and the trajectory's time range.
ResidualReport residual_fd(const ExactField& field, double t, std::span<const double> x, double h,
                           double interior_fraction = kDefaultInteriorFraction);

struct OrderFit {
    double order = 0.0;
    bool exact_zero = false;  // some residual was exactly zero; order is +inf sentinel
};

/// Least-squares slope of log(residual) against log(h). Requires at least
/// three pairs with strictly decreasing h.
OrderFit fit_convergence_order(std::span<const double> h, std::span<const double> residual);

}  // namespace ellipflow
