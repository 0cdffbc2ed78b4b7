#include "ellipflow/commands.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <thread>

#include "ellipflow/format.hpp"
#include "ellipflow/profile.hpp"
#include "ellipflow/residual.hpp"

namespace ellipflow {

namespace {

struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

// Work items are dispatched dynamically but results are indexed, so the
// output is independent of the thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (auto& th : pool) th.join();
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

[[noreturn]] void missing_section(const std::string& name) {
    throw config_error("config: this command requires section [" + name + "]");
}

}  // namespace

int cmd_integrate(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.integrate) missing_section("integrate");
    const auto& ic = *cfg.integrate;

    EventSpec events;
    events.touch_threshold = ic.touch_threshold;
    const Trajectory traj =
        integrate(cfg.model, cfg.init, ic.t_end, {ic.rel_tol, ic.abs_tol}, events);

    const int n = cfg.model.n;
    std::vector<std::string> header{"t"};
    for (int i = 1; i <= n; ++i) header.push_back("a_" + std::to_string(i));
    for (int i = 1; i <= n; ++i) header.push_back("adot_" + std::to_string(i));
    if (cfg.model.isothermal())
        for (int i = 1; i <= n; ++i) header.push_back("E_" + std::to_string(i));
    else
        header.push_back("energy");
    write_row(out, header);

    for (const auto& st : traj.samples) {
        std::vector<std::string> row{fmt17(st.t)};
        for (double v : st.a) row.push_back(fmt17(v));
        for (double v : st.a_dot) row.push_back(fmt17(v));
        for (double v : energies(st, cfg.model)) row.push_back(fmt17(v));
        write_row(out, row);
    }

    const auto& term = traj.termination;
    out << "# termination," << to_string(term.kind) << ',' << fmt17(term.t);
    if (term.kind == TerminationKind::Touchdown) out << ",axis=" << (term.axis + 1);
    if (term.kind == TerminationKind::StepFailure) out << ',' << term.reason;
    out << '\n';
    return 0;
}

int cmd_classify_sweep(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.sweep) missing_section("sweep");
    const double horizon = cfg.classify ? cfg.classify->horizon : 10.0;

    struct Item {
        double gamma, xi;
    };
    std::vector<Item> items;
    for (double g : cfg.sweep->gamma)
        for (double x : cfg.sweep->xi) items.push_back({g, x});

    std::vector<std::vector<std::string>> rows(items.size());
    parallel_for(static_cast<int>(items.size()), cfg.threads, [&](int idx) {
        const Item& it = items[static_cast<size_t>(idx)];
        std::vector<std::string>& row = rows[static_cast<size_t>(idx)];
        row = {fmt17(it.gamma), fmt17(it.xi)};
        try {
            ModelParams p = cfg.model;
            p.gamma = it.gamma;
            p.xi = it.xi;
            p.validate();
            Classification cls = classify(p, cfg.init, horizon);
            row.push_back(to_string(cls.verdict));
            row.push_back(cls.theorem_case);
            row.push_back(cls.bound_T ? fmt17(*cls.bound_T) : "");
            row.push_back(cls.t_est ? fmt17(*cls.t_est) : "");
            std::string note = cls.note;
            if (cls.t_est_conservative)
                note += (note.empty() ? "" : "; ") + std::string("conservative t_est (step failure)");
            row.push_back(note);
        } catch (const std::exception& e) {
            row.insert(row.end(), {"error", "", "", "", e.what()});
        }
    });

    write_row(out, {"gamma", "xi", "verdict", "case", "bound_T", "t_est", "note"});
    for (const auto& row : rows) write_row(out, row);
    return 0;
}

int cmd_field(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.field) missing_section("field");
    const auto& fc = *cfg.field;
    const int n = cfg.model.n;

    EmdenState state = cfg.init;
    if (fc.t > 0.0) {
        const Trajectory traj = integrate(cfg.model, cfg.init, fc.t, cfg.tolerances());
        if (!traj.covers(fc.t))
            throw input_error("field: requested time outside the integrated range (" +
                              to_string(traj.termination.kind) + " at t=" +
                              fmt17(traj.termination.t) + ")");
        state = traj.state_at(fc.t);
    }

    std::vector<std::string> header;
    for (int i = 1; i <= n; ++i) header.push_back("x_" + std::to_string(i));
    header.push_back("rho");
    for (int i = 1; i <= n; ++i) header.push_back("u_" + std::to_string(i));
    header.push_back("s");
    write_row(out, header);

    long total = 1;
    for (int c : fc.counts) total *= c;
    std::vector<double> x(static_cast<size_t>(n));
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<size_t>(i);
            const int c = fc.counts[k];
            const int j = static_cast<int>(rem % c);
            rem /= c;
            x[k] = c == 1 ? 0.5 * (fc.lo[k] + fc.hi[k])
                          : fc.lo[k] + (fc.hi[k] - fc.lo[k]) * j / (c - 1);
        }
        const FieldSample fs = evaluate_field(state, x, cfg.model);
        std::vector<std::string> row;
        for (double v : fs.x) row.push_back(fmt17(v));
        row.push_back(fmt17(fs.rho));
        for (double v : fs.u) row.push_back(fmt17(v));
        row.push_back(fmt17(fs.s));
        write_row(out, row);
    }
    return 0;
}

int cmd_verify_residual(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.residual) missing_section("residual");
    const auto& rc = *cfg.residual;
    const int n = cfg.model.n;

    // One tight trajectory backs all stencil evaluations; interpolation noise
    // must stay below the h^2 signal of the difference quotients.
    const Trajectory traj =
        integrate(cfg.model, cfg.init, rc.t + 2.0 * rc.h0 + 1e-6, {1e-12, 1e-14});
    if (!traj.covers(rc.t + rc.h0))
        throw input_error("verify-residual: trajectory ended before the stencil time range");
    const ExactField field(traj);
    const EmdenState state = traj.state_at(rc.t);

    // Deterministic interior sample points (independent of thread count).
    const SupportGeometry geom = support_geometry(state, cfg.model);
    const double y_half =
        geom.bounded ? std::sqrt(0.8 * *geom.s_max / n) : 1.2;
    std::vector<std::vector<double>> points(static_cast<size_t>(rc.points));
    for (int p = 0; p < rc.points; ++p) {
        SplitMix64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(p + 1)));
        auto& x = points[static_cast<size_t>(p)];
        x.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<size_t>(i);
            const double y = rng.uniform(-y_half, y_half);
            x[k] = state.a[k] * y - cfg.model.drift(i);
        }
    }

    const std::vector<double> accel = emden_rhs(state, cfg.model);
    std::vector<std::vector<std::vector<std::string>>> blocks(points.size());
    parallel_for(rc.points, cfg.threads, [&](int p) {
        auto& rows = blocks[static_cast<size_t>(p)];
        const auto& x = points[static_cast<size_t>(p)];
        std::vector<std::string> prefix{std::to_string(p), fmt17(rc.t)};
        for (double v : x) prefix.push_back(fmt17(v));
        try {
            {
                const double mass = residual_mass_exact(state, x, cfg.model);
                const std::vector<double> mom = residual_momentum_exact(state, accel, x, cfg.model);
                auto row = prefix;
                row.insert(row.end(), {"closed_form", "0", fmt17(mass)});
                for (double v : mom) row.push_back(fmt17(v));
                row.push_back("");
                rows.push_back(std::move(row));
            }
            std::vector<double> hs, mass_res;
            std::vector<std::vector<double>> mom_res(static_cast<size_t>(n));
            for (int l = 0; l < rc.levels; ++l) {
                const double h = rc.h0 / std::pow(2.0, l);
                const ResidualReport rep = residual_fd(field, rc.t, x, h);
                auto row = prefix;
                row.insert(row.end(), {"finite_difference", fmt17(h), fmt17(rep.mass_residual)});
                for (double v : rep.momentum_residual) row.push_back(fmt17(v));
                row.push_back("");
                rows.push_back(std::move(row));
                hs.push_back(h);
                mass_res.push_back(std::fabs(rep.mass_residual));
                for (int i = 0; i < n; ++i)
                    mom_res[static_cast<size_t>(i)].push_back(
                        std::fabs(rep.momentum_residual[static_cast<size_t>(i)]));
            }
            auto row = prefix;
            const OrderFit mass_fit = fit_convergence_order(hs, mass_res);
            row.insert(row.end(), {"fitted_order", "", fmt17(mass_fit.order)});
            for (int i = 0; i < n; ++i) {
                const OrderFit f = fit_convergence_order(hs, mom_res[static_cast<size_t>(i)]);
                row.push_back(fmt17(f.order));
            }
            row.push_back("");
            rows.push_back(std::move(row));
        } catch (const std::exception& e) {
            auto row = prefix;
            row.insert(row.end(), {"error", "", ""});
            for (int i = 0; i < n; ++i) row.push_back("");
            row.push_back(e.what());
            rows.push_back(std::move(row));
        }
    });

    std::vector<std::string> header{"point", "t"};
    for (int i = 1; i <= n; ++i) header.push_back("x_" + std::to_string(i));
    header.insert(header.end(), {"method", "h", "mass_residual"});
    for (int i = 1; i <= n; ++i) header.push_back("momentum_residual_" + std::to_string(i));
    header.push_back("note");
    write_row(out, header);
    for (const auto& rows : blocks)
        for (const auto& row : rows) write_row(out, row);
    return 0;
}

int cmd_mass_check(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.mass) missing_section("mass");
    const auto& mc = *cfg.mass;

    QuadratureSpec quad;
    quad.nodes_per_axis = mc.nodes;
    quad.radius = mc.radius;

    double t_max = 0.0;
    for (double t : mc.times) t_max = std::max(t_max, t);
    std::optional<Trajectory> traj;
    if (t_max > 0.0) {
        traj = integrate(cfg.model, cfg.init, t_max, cfg.tolerances());
        if (!traj->covers(t_max))
            throw input_error("mass-check: trajectory ended before the last requested time");
    }

    write_row(out, {"t", "mass", "relative_drift"});
    double reference = 0.0;
    double max_tail = 0.0;
    for (size_t i = 0; i < mc.times.size(); ++i) {
        const double t = mc.times[i];
        const EmdenState state = t == 0.0 ? cfg.init : traj->state_at(t);
        const MassResult m = total_mass(state, cfg.model, quad);
        if (i == 0) reference = m.value;
        max_tail = std::max(max_tail, m.tail_bound);
        const double drift = std::fabs(m.value - reference) / std::fabs(reference);
        write_row(out, {fmt17(t), fmt17(m.value), fmt17(drift)});
    }
    if (max_tail > 0.0) out << "# truncation_tail_bound," << fmt17(max_tail) << '\n';
    return 0;
}

int cmd_crosscheck(const RunConfig& cfg, std::ostream& out, const std::string& out_path) {
    if (!cfg.crosscheck) missing_section("crosscheck");
    const auto& cc = *cfg.crosscheck;
    if (cfg.model.mu != 0.0)
        throw config_error("crosscheck: inviscid comparison only; set mu = 0");

    FvRunConfig run;
    run.params = cfg.model;
    run.state0 = cfg.init;
    run.grid.dims = cfg.model.n;
    run.grid.lo = cc.lo;
    run.grid.hi = cc.hi;
    run.grid.rho_floor = cc.rho_floor;
    run.levels = cc.levels;
    run.cfl = cc.cfl;
    run.t_end = cc.t_end;
    run.ghosts = cc.ghost;
    run.muscl = cc.muscl;

    std::vector<std::pair<int, FvGrid>> snapshots;
    if (cc.snapshots && !out_path.empty())
        run.snapshot_cb = [&](const FvGrid& grid, int cells) { snapshots.emplace_back(cells, grid); };

    const FvRunReport rep = fv_run(run);

    write_row(out, {"level", "cells", "l1_rho", "l2_rho", "linf_rho", "l1_u", "l2_u", "linf_u",
                    "steps", "dt_min", "dt_max", "order_l1_rho"});
    for (size_t l = 0; l < rep.levels.size(); ++l) {
        const auto& lv = rep.levels[l];
        write_row(out, {std::to_string(l), std::to_string(lv.cells), fmt17(lv.l1_rho),
                        fmt17(lv.l2_rho), fmt17(lv.linf_rho), fmt17(lv.l1_u), fmt17(lv.l2_u),
                        fmt17(lv.linf_u), std::to_string(lv.steps), fmt17(lv.dt_min),
                        fmt17(lv.dt_max), l == 0 ? "" : fmt17(rep.order_l1_rho[l - 1])});
    }
    if (!rep.failed) out << "# fitted_order_l1_rho," << fmt17(rep.fitted_order_l1_rho) << '\n';
    if (rep.failed) out << "# failed," << rep.failure << '\n';

    for (const auto& [cells, grid] : snapshots) {
        std::string stem = out_path;
        const auto dot = stem.rfind('.');
        if (dot != std::string::npos) stem.erase(dot);
        std::ofstream snap(stem + "_snap" + std::to_string(cells) + ".csv");
        std::vector<std::string> header;
        for (int i = 1; i <= grid.dims; ++i) header.push_back("x_" + std::to_string(i));
        header.push_back("rho");
        for (int i = 1; i <= grid.dims; ++i) header.push_back("u_" + std::to_string(i));
        write_row(snap, header);
        const int gh = grid.ghost;
        const int j0 = grid.dims == 2 ? gh : 0, j1 = grid.dims == 2 ? gh + grid.cells[1] : 1;
        for (int j = j0; j < j1; ++j)
            for (int i = gh; i < gh + grid.cells[0]; ++i) {
                const size_t id = grid.index(i, j);
                std::vector<std::string> row{fmt17(grid.center(0, i))};
                if (grid.dims == 2) row.push_back(fmt17(grid.center(1, j)));
                row.push_back(fmt17(grid.rho[id]));
                for (int d = 0; d < grid.dims; ++d)
                    row.push_back(fmt17(grid.mom[static_cast<size_t>(d)][id] / grid.rho[id]));
                write_row(snap, row);
            }
    }
    return rep.failed ? 3 : 0;
}

}  // namespace ellipflow
