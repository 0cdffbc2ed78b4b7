#include "ellipflow/fv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ellipflow/profile.hpp"

namespace ellipflow {

namespace {

constexpr double kGaussOffset = 0.28867513459481288225;  // 1/(2 sqrt(3))

// Cell average of (rho, rho*u) over one cell by 2-point Gauss per axis.
void exact_cell_average(const EmdenState& state, const ModelParams& params, int dims,
                        const std::array<double, 2>& c, const std::array<double, 2>& h,
                        double* out /* size 1+dims */) {
    const int qx = 2, qy = dims == 2 ? 2 : 1;
    for (int comp = 0; comp <= dims; ++comp) out[comp] = 0.0;
    std::vector<double> x(static_cast<size_t>(dims));
    for (int a = 0; a < qx; ++a) {
        x[0] = c[0] + (a == 0 ? -kGaussOffset : kGaussOffset) * h[0];
        for (int b = 0; b < qy; ++b) {
            if (dims == 2) x[1] = c[1] + (b == 0 ? -kGaussOffset : kGaussOffset) * h[1];
            const FieldSample fs = evaluate_field(state, x, params);
            out[0] += fs.rho;
            for (int dmc = 0; dmc < dims; ++dmc)
                out[1 + dmc] += fs.rho * fs.u[static_cast<size_t>(dmc)];
        }
    }
    const double w = 1.0 / (qx * qy);
    for (int comp = 0; comp <= dims; ++comp) out[comp] *= w;
}

double sound_speed(double rho, const ModelParams& params) {
    return std::sqrt(params.k_pressure * params.gamma * std::pow(rho, params.gamma - 1.0));
}

double minmod(double a, double b) {
    if (a > 0.0 && b > 0.0) return std::min(a, b);
    if (a < 0.0 && b < 0.0) return std::max(a, b);
    return 0.0;
}

}  // namespace

std::vector<double> FvGrid::interior_totals() const {
    std::vector<double> tot(static_cast<size_t>(1 + dims), 0.0);
    const int j0 = dims == 2 ? ghost : 0, j1 = dims == 2 ? ghost + cells[1] : 1;
    for (int j = j0; j < j1; ++j)
        for (int i = ghost; i < ghost + cells[0]; ++i) {
            const size_t id = index(i, j);
            tot[0] += rho[id];
            for (int d = 0; d < dims; ++d) tot[static_cast<size_t>(1 + d)] += mom[static_cast<size_t>(d)][id];
        }
    const double vol = cell_volume();
    for (double& v : tot) v *= vol;
    return tot;
}

FvGrid fv_init(const FvGridSpec& spec, const ModelParams& params, const EmdenState& state0,
               GhostPolicy policy) {
    params.validate();
    state0.validate(params);
    if (spec.dims < 1 || spec.dims > 2) throw config_error("fv_init: dims must be 1 or 2");
    if (spec.dims != params.n)
        throw config_error("fv_init: grid dimension must match the model dimension");
    if (spec.ghost < 2) throw config_error("fv_init: ghost width must be >= 2");
    for (int d = 0; d < spec.dims; ++d)
        if (!(spec.hi[static_cast<size_t>(d)] > spec.lo[static_cast<size_t>(d)]) ||
            spec.cells[static_cast<size_t>(d)] < 4)
            throw config_error("fv_init: invalid domain or cell count");
    if (!(spec.rho_floor > 0.0)) throw config_error("fv_init: rho_floor must be positive");

    const SupportGeometry sup = support_geometry(state0, params);
    if (sup.bounded && policy != GhostPolicy::Exact) {
        for (int d = 0; d < spec.dims; ++d) {
            const auto k = static_cast<size_t>(d);
            const double lo_s = -params.drift(d) - (*sup.semi_axes)[k];
            const double hi_s = -params.drift(d) + (*sup.semi_axes)[k];
            if (lo_s <= spec.lo[k] || hi_s >= spec.hi[k])
                throw config_error(
                    "fv_init: bounded support reaches the domain boundary; exact ghosts required");
        }
    }

    FvGrid g;
    g.dims = spec.dims;
    g.cells = spec.cells;
    if (g.dims == 1) g.cells[1] = 1;
    g.lo = spec.lo;
    g.hi = spec.hi;
    g.ghost = spec.ghost;
    g.rho_floor = spec.rho_floor;
    g.time = state0.t;
    for (int d = 0; d < g.dims; ++d) {
        const auto k = static_cast<size_t>(d);
        g.h[k] = (g.hi[k] - g.lo[k]) / g.cells[k];
    }
    const size_t total = static_cast<size_t>(g.nx_tot()) * static_cast<size_t>(g.ny_tot());
    g.rho.assign(total, spec.rho_floor);
    for (int d = 0; d < g.dims; ++d) g.mom[static_cast<size_t>(d)].assign(total, 0.0);

    double avg[3];
    const int j0 = g.dims == 2 ? g.ghost : 0, j1 = g.dims == 2 ? g.ghost + g.cells[1] : 1;
    for (int j = j0; j < j1; ++j)
        for (int i = g.ghost; i < g.ghost + g.cells[0]; ++i) {
            const std::array<double, 2> c{g.center(0, i), g.dims == 2 ? g.center(1, j) : 0.0};
            exact_cell_average(state0, params, g.dims, c, g.h, avg);
            const size_t id = g.index(i, j);
            g.rho[id] = std::max(avg[0], g.rho_floor);
            for (int d = 0; d < g.dims; ++d) g.mom[static_cast<size_t>(d)][id] = avg[1 + d];
        }
    return g;
}

std::vector<double> rusanov_flux(const CellPrim& left, const CellPrim& right, int axis, int dims,
                                 const ModelParams& params) {
    auto finite = [](const CellPrim& w, int dims_) {
        if (!std::isfinite(w.rho)) return false;
        for (int d = 0; d < dims_; ++d)
            if (!std::isfinite(w.u[static_cast<size_t>(d)])) return false;
        return true;
    };
    if (!finite(left, dims) || !finite(right, dims))
        throw breakdown_error("rusanov_flux: nonfinite input state");

    const auto ax = static_cast<size_t>(axis);
    auto physical = [&](const CellPrim& w, double* f) {
        const double p = params.k_pressure * std::pow(w.rho, params.gamma);
        const double mn = w.rho * w.u[ax];
        f[0] = mn;
        for (int d = 0; d < dims; ++d)
            f[1 + d] = mn * w.u[static_cast<size_t>(d)] + (d == axis ? p : 0.0);
    };
    double fl[3], fr[3];
    physical(left, fl);
    physical(right, fr);
    const double lam = std::max(std::fabs(left.u[ax]) + sound_speed(left.rho, params),
                                std::fabs(right.u[ax]) + sound_speed(right.rho, params));

    std::vector<double> flux(static_cast<size_t>(1 + dims));
    const double du0 = right.rho - left.rho;
    flux[0] = 0.5 * (fl[0] + fr[0]) - 0.5 * lam * du0;
    for (int d = 0; d < dims; ++d) {
        const auto k = static_cast<size_t>(d);
        const double dm = right.rho * right.u[k] - left.rho * left.u[k];
        flux[1 + k] = 0.5 * (fl[1 + d] + fr[1 + d]) - 0.5 * lam * dm;
    }
    return flux;
}

GhostFill make_periodic_ghosts() {
    return [](FvGrid& g, double /*t*/) {
        const int gh = g.ghost;
        const int nx = g.cells[0];
        auto copy_cell = [&](int is, int js, int idst, int jdst) {
            const size_t src = g.index(is, js), dst = g.index(idst, jdst);
            g.rho[dst] = g.rho[src];
            for (int d = 0; d < g.dims; ++d) g.mom[static_cast<size_t>(d)][dst] = g.mom[static_cast<size_t>(d)][src];
        };
        const int j0 = g.dims == 2 ? 0 : 0, j1 = g.dims == 2 ? g.ny_tot() : 1;
        for (int j = j0; j < j1; ++j)
            for (int q = 0; q < gh; ++q) {
                copy_cell(gh + nx - gh + q, j, q, j);          // left ghosts <- right interior
                copy_cell(gh + q, j, gh + nx + q, j);          // right ghosts <- left interior
            }
        if (g.dims == 2) {
            const int ny = g.cells[1];
            for (int i = 0; i < g.nx_tot(); ++i)
                for (int q = 0; q < gh; ++q) {
                    copy_cell(i, gh + ny - gh + q, i, q);
                    copy_cell(i, gh + q, i, gh + ny + q);
                }
        }
    };
}

void exact_ghost_fill(FvGrid& grid, double t, const ModelParams& params, const Trajectory& traj) {
    if (!traj.covers(t)) throw input_error("exact_ghost_fill: time outside the trajectory range");
    const EmdenState state = traj.state_at(t);
    double avg[3];
    auto fill_cell = [&](int i, int j) {
        const std::array<double, 2> c{grid.center(0, i), grid.dims == 2 ? grid.center(1, j) : 0.0};
        exact_cell_average(state, params, grid.dims, c, grid.h, avg);
        const size_t id = grid.index(i, j);
        grid.rho[id] = std::max(avg[0], grid.rho_floor);
        for (int d = 0; d < grid.dims; ++d) grid.mom[static_cast<size_t>(d)][id] = avg[1 + d];
    };
    const int gh = grid.ghost;
    const int j0 = grid.dims == 2 ? 0 : 0, j1 = grid.dims == 2 ? grid.ny_tot() : 1;
    for (int j = j0; j < j1; ++j) {
        const bool j_ghost = grid.dims == 2 && (j < gh || j >= gh + grid.cells[1]);
        for (int i = 0; i < grid.nx_tot(); ++i) {
            const bool i_ghost = i < gh || i >= gh + grid.cells[0];
            if (i_ghost || j_ghost) fill_cell(i, j);
        }
    }
}

GhostFill make_exact_ghosts(const Trajectory& traj) {
    return [&traj](FvGrid& g, double t) { exact_ghost_fill(g, t, traj.params, traj); };
}

namespace {

struct Fields {
    std::vector<double> rho;
    std::array<std::vector<double>, 2> mom;
};

// Single flux-divergence evaluation: rate[comp] = -div F(U) over the interior,
// accumulating the net conserved inflow through the domain boundary.
void flux_divergence(const FvGrid& g, const ModelParams& params, bool muscl, Fields& rate,
                     std::vector<double>& boundary_net) {
    const int dims = g.dims;
    const int gh = g.ghost;
    const size_t total = g.rho.size();
    rate.rho.assign(total, 0.0);
    for (int d = 0; d < dims; ++d) rate.mom[static_cast<size_t>(d)].assign(total, 0.0);

    auto prim_at = [&](size_t id) {
        CellPrim w;
        w.rho = g.rho[id];
        for (int d = 0; d < dims; ++d) w.u[static_cast<size_t>(d)] = g.mom[static_cast<size_t>(d)][id] / w.rho;
        return w;
    };

    const int j0 = dims == 2 ? gh : 0, j1 = dims == 2 ? gh + g.cells[1] : 1;
    for (int axis = 0; axis < dims; ++axis) {
        const auto ax = static_cast<size_t>(axis);
        const double inv_h = 1.0 / g.h[ax];
        const double face_area = dims == 2 ? g.h[1 - ax] : 1.0;
        // Interfaces along `axis`; the transverse index spans the interior only.
        const int n_axis = g.cells[ax];
        const int t0 = axis == 0 ? j0 : gh;
        const int t1 = axis == 0 ? j1 : gh + g.cells[0];
        for (int tr = t0; tr < t1; ++tr) {
            for (int fidx = 0; fidx <= n_axis; ++fidx) {
                // Cells straddling face fidx (in interior-offset coordinates).
                auto cell_id = [&](int q) {
                    const int pos = gh + q;
                    return axis == 0 ? g.index(pos, tr) : g.index(tr, pos);
                };
                const size_t il = cell_id(fidx - 1), ir = cell_id(fidx);
                CellPrim wl = prim_at(il), wr = prim_at(ir);
                if (muscl) {
                    const size_t ill = cell_id(fidx - 2), irr = cell_id(fidx + 1);
                    const CellPrim wll = prim_at(ill), wrr = prim_at(irr);
                    auto limited = [&](double vll, double vl, double vr, double vrr, double& outl,
                                       double& outr) {
                        outl = vl + 0.5 * minmod(vl - vll, vr - vl);
                        outr = vr - 0.5 * minmod(vr - vl, vrr - vr);
                    };
                    CellPrim l = wl, r = wr;
                    limited(wll.rho, wl.rho, wr.rho, wrr.rho, l.rho, r.rho);
                    for (int d = 0; d < dims; ++d) {
                        const auto k = static_cast<size_t>(d);
                        limited(wll.u[k], wl.u[k], wr.u[k], wrr.u[k], l.u[k], r.u[k]);
                    }
                    wl = l;
                    wr = r;
                }
                const std::vector<double> flux = rusanov_flux(wl, wr, axis, dims, params);

                // Scatter -dF/dx into the two adjacent cells.
                if (fidx > 0) {
                    rate.rho[il] -= flux[0] * inv_h;
                    for (int d = 0; d < dims; ++d)
                        rate.mom[static_cast<size_t>(d)][il] -= flux[static_cast<size_t>(1 + d)] * inv_h;
                }
                if (fidx < n_axis) {
                    rate.rho[ir] += flux[0] * inv_h;
                    for (int d = 0; d < dims; ++d)
                        rate.mom[static_cast<size_t>(d)][ir] += flux[static_cast<size_t>(1 + d)] * inv_h;
                }
                if (fidx == 0)
                    for (int comp = 0; comp <= dims; ++comp)
                        boundary_net[static_cast<size_t>(comp)] += flux[static_cast<size_t>(comp)] * face_area;
                if (fidx == n_axis)
                    for (int comp = 0; comp <= dims; ++comp)
                        boundary_net[static_cast<size_t>(comp)] -= flux[static_cast<size_t>(comp)] * face_area;
            }
        }
    }
}

}  // namespace

FvStepResult fv_step(FvGrid& grid, const ModelParams& params, const GhostFill& ghosts, double cfl,
                     bool muscl, double dt_cap) {
    if (!(cfl > 0.0 && cfl < 1.0)) throw input_error("fv_step: cfl must lie in (0, 1)");
    const int dims = grid.dims;
    const int gh = grid.ghost;

    ghosts(grid, grid.time);

    // CFL step from the pre-step state: dt = cfl / sum_d(lambda_d / h_d).
    double rate_sum = 0.0;
    {
        std::array<double, 2> lam{0.0, 0.0};
        const int j0 = dims == 2 ? gh : 0, j1 = dims == 2 ? gh + grid.cells[1] : 1;
        for (int j = j0; j < j1; ++j)
            for (int i = gh; i < gh + grid.cells[0]; ++i) {
                const size_t id = grid.index(i, j);
                const double c = sound_speed(grid.rho[id], params);
                for (int d = 0; d < dims; ++d) {
                    const auto k = static_cast<size_t>(d);
                    const double speed = std::fabs(grid.mom[k][id] / grid.rho[id]) + c;
                    if (!std::isfinite(speed))
                        throw breakdown_error("fv_step: nonfinite wave speed at cell (" +
                                              std::to_string(i - gh) + "," + std::to_string(j - (dims == 2 ? gh : 0)) +
                                              ")");
                    lam[k] = std::max(lam[k], speed);
                }
            }
        for (int d = 0; d < dims; ++d) rate_sum += lam[static_cast<size_t>(d)] / grid.h[static_cast<size_t>(d)];
    }
    if (!(rate_sum > 0.0)) rate_sum = 1.0 / (grid.hi[0] - grid.lo[0]);
    const double dt = std::min(cfl / rate_sum, dt_cap);

    FvStepResult result;
    result.dt = dt;
    result.boundary_net.assign(static_cast<size_t>(1 + dims), 0.0);

    const double vol = grid.cell_volume();
    const size_t total = grid.rho.size();
    const std::vector<double> rho_n = grid.rho;
    const std::array<std::vector<double>, 2> mom_n = grid.mom;

    Fields rate;
    std::vector<double> bnet_stage(static_cast<size_t>(1 + dims), 0.0);

    auto apply_floor = [&]() {
        const int j0 = dims == 2 ? gh : 0, j1 = dims == 2 ? gh + grid.cells[1] : 1;
        for (int j = j0; j < j1; ++j)
            for (int i = gh; i < gh + grid.cells[0]; ++i) {
                const size_t id = grid.index(i, j);
                if (grid.rho[id] < grid.rho_floor) {
                    result.floor_added += (grid.rho_floor - grid.rho[id]) * vol;
                    grid.rho[id] = grid.rho_floor;
                }
            }
    };

    // Stage 1: U* = U^n + dt L(U^n).
    flux_divergence(grid, params, muscl, rate, bnet_stage);
    for (size_t c = 0; c <= static_cast<size_t>(dims); ++c)
        result.boundary_net[c] += 0.5 * dt * bnet_stage[c];
    for (size_t id = 0; id < total; ++id) grid.rho[id] += dt * rate.rho[id];
    for (int d = 0; d < dims; ++d)
        for (size_t id = 0; id < total; ++id)
            grid.mom[static_cast<size_t>(d)][id] += dt * rate.mom[static_cast<size_t>(d)][id];
    apply_floor();

    // Stage 2: U^{n+1} = 1/2 U^n + 1/2 (U* + dt L(U*)), ghosts at t + dt.
    ghosts(grid, grid.time + dt);
    std::fill(bnet_stage.begin(), bnet_stage.end(), 0.0);
    flux_divergence(grid, params, muscl, rate, bnet_stage);
    for (size_t c = 0; c <= static_cast<size_t>(dims); ++c)
        result.boundary_net[c] += 0.5 * dt * bnet_stage[c];
    for (size_t id = 0; id < total; ++id)
        grid.rho[id] = 0.5 * rho_n[id] + 0.5 * (grid.rho[id] + dt * rate.rho[id]);
    for (int d = 0; d < dims; ++d) {
        const auto k = static_cast<size_t>(d);
        for (size_t id = 0; id < total; ++id)
            grid.mom[k][id] = 0.5 * mom_n[k][id] + 0.5 * (grid.mom[k][id] + dt * rate.mom[k][id]);
    }
    apply_floor();

    grid.time += dt;
    return result;
}

FvErrorNorms fv_error_norms(const FvGrid& grid, const ModelParams& params, const EmdenState& state,
                            double u_error_cutoff) {
    const int dims = grid.dims;
    const int gh = grid.ghost;
    const double vol = grid.cell_volume();
    FvErrorNorms n{0, 0, 0, 0, 0, 0};
    double avg[3];
    const int j0 = dims == 2 ? gh : 0, j1 = dims == 2 ? gh + grid.cells[1] : 1;
    for (int j = j0; j < j1; ++j)
        for (int i = gh; i < gh + grid.cells[0]; ++i) {
            const std::array<double, 2> c{grid.center(0, i), dims == 2 ? grid.center(1, j) : 0.0};
            exact_cell_average(state, params, dims, c, grid.h, avg);
            const size_t id = grid.index(i, j);
            const double erho = std::fabs(grid.rho[id] - avg[0]);
            n.l1_rho += erho * vol;
            n.l2_rho += erho * erho * vol;
            n.linf_rho = std::max(n.linf_rho, erho);
            if (avg[0] >= u_error_cutoff) {
                double eu2 = 0.0;
                for (int d = 0; d < dims; ++d) {
                    const auto k = static_cast<size_t>(d);
                    const double du = grid.mom[k][id] / grid.rho[id] - avg[1 + d] / avg[0];
                    eu2 += du * du;
                }
                const double eu = std::sqrt(eu2);
                n.l1_u += eu * vol;
                n.l2_u += eu * eu * vol;
                n.linf_u = std::max(n.linf_u, eu);
            }
        }
    n.l2_rho = std::sqrt(n.l2_rho);
    n.l2_u = std::sqrt(n.l2_u);
    return n;
}

FvRunReport fv_run(const FvRunConfig& config) {
    FvRunReport report;
    report.t_end = config.t_end;
    if (config.levels.size() < 3) throw config_error("fv_run: need at least three refinement levels");
    if (!(config.t_end > config.state0.t)) throw config_error("fv_run: t_end must exceed the initial time");

    // A single high-accuracy trajectory drives ghost data and error evaluation.
    const Trajectory traj = integrate(config.params, config.state0, config.t_end,
                                      Tolerances{1e-12, 1e-14});
    if (traj.termination.kind != TerminationKind::ReachedEnd) {
        report.failed = true;
        report.failure = "scale-factor integration did not reach t_end: " +
                         to_string(traj.termination.kind);
        return report;
    }
    const GhostFill ghosts = config.ghosts == GhostPolicy::Exact
                                 ? make_exact_ghosts(traj)
                                 : make_periodic_ghosts();

    for (int level_cells : config.levels) {
        FvGridSpec spec = config.grid;
        spec.cells = {level_cells, config.grid.dims == 2 ? level_cells : 1};
        FvLevelResult lr;
        lr.cells = level_cells;
        try {
            FvGrid grid = fv_init(spec, config.params, config.state0, config.ghosts);
            lr.dt_min = std::numeric_limits<double>::infinity();
            while (grid.time < config.t_end - 1e-14 * config.t_end) {
                // The last step is capped so the run lands exactly on t_end.
                FvStepResult sr = fv_step(grid, config.params, ghosts, config.cfl, config.muscl,
                                          config.t_end - grid.time);
                lr.steps++;
                lr.dt_min = std::min(lr.dt_min, sr.dt);
                lr.dt_max = std::max(lr.dt_max, sr.dt);
                lr.dt_history.push_back(sr.dt);
            }
            const FvErrorNorms n = fv_error_norms(grid, config.params, traj.state_at(config.t_end),
                                                  config.u_error_cutoff);
            lr.l1_rho = n.l1_rho;
            lr.l2_rho = n.l2_rho;
            lr.linf_rho = n.linf_rho;
            lr.l1_u = n.l1_u;
            lr.l2_u = n.l2_u;
            lr.linf_u = n.linf_u;
            if (config.snapshot_cb) config.snapshot_cb(grid, level_cells);
        } catch (const std::exception& e) {
            report.failed = true;
            report.failure = e.what();
            report.levels.push_back(lr);
            return report;
        }
        report.levels.push_back(lr);
    }

    for (size_t l = 1; l < report.levels.size(); ++l) {
        const double ratio = static_cast<double>(report.levels[l].cells) /
                             static_cast<double>(report.levels[l - 1].cells);
        report.order_l1_rho.push_back(std::log(report.levels[l - 1].l1_rho / report.levels[l].l1_rho) /
                                      std::log(ratio));
    }
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(report.levels.size());
        for (const auto& lv : report.levels) {
            const double lx = std::log(1.0 / lv.cells), ly = std::log(lv.l1_rho);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        report.fitted_order_l1_rho = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return report;
}

}  // namespace ellipflow
