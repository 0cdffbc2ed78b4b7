#include "ellipflow/emden.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ellipflow/quadrature.hpp"

namespace ellipflow {

std::vector<double> emden_rhs(const EmdenState& state, const ModelParams& params) {
    if (state.dim() != params.n || state.a_dot.size() != state.a.size())
        throw input_error("emden_rhs: state dimension mismatch");
    for (double ai : state.a)
        if (!(ai > 0.0)) throw std::domain_error("emden_rhs: singular at a_i <= 0");
    const double coupling = std::pow(product(state.a), params.gamma - 1.0);
    std::vector<double> acc(state.a.size());
    for (size_t i = 0; i < acc.size(); ++i) acc[i] = params.xi / (state.a[i] * coupling);
    return acc;
}

double scalar_emden_rhs(double a, const ModelParams& params) {
    if (!(a > 0.0)) throw std::domain_error("scalar_emden_rhs: singular at a <= 0");
    return params.xi / std::pow(a, params.n * (params.gamma - 1.0) + 1.0);
}

std::vector<double> energies(const EmdenState& state, const ModelParams& params) {
    state.validate(params);
    if (params.isothermal()) {
        std::vector<double> e(state.a.size());
        for (size_t i = 0; i < e.size(); ++i)
            e[i] = 0.5 * state.a_dot[i] * state.a_dot[i] - params.xi * std::log(state.a[i]);
        return e;
    }
    double kinetic = 0.0;
    for (double v : state.a_dot) kinetic += 0.5 * v * v;
    const double potential =
        params.xi / (params.gamma - 1.0) * std::pow(product(state.a), 1.0 - params.gamma);
    return {kinetic + potential};
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) stepper with Hairer's quartic dense output.
// ---------------------------------------------------------------------------

namespace {

using Vec = std::vector<double>;

// Right-hand side over the flattened state; returns false when the state has
// left the admissible region (some a_i <= 0), which rejects the trial step.
using OdeRhs = std::function<bool(double, const Vec&, Vec&)>;

constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};

constexpr double kA2[] = {1.0 / 5};
constexpr double kA3[] = {3.0 / 40, 9.0 / 40};
constexpr double kA4[] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
constexpr double kA5[] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
constexpr double kA6[] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                          -5103.0 / 18656};
constexpr double kB[] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};

constexpr double kE[7] = {71.0 / 57600, 0.0,           -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

constexpr double kD[7] = {-12715105075.0 / 11282082432.0,
                          0.0,
                          87487479700.0 / 32700410799.0,
                          -10690763975.0 / 1880347072.0,
                          701980252875.0 / 199316789632.0,
                          -1453857185.0 / 822651844.0,
                          69997945.0 / 29380423.0};

struct OdeSolution {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Trajectory::DenseBlock> dense;
    Termination termination;
    IntegrationStats stats;

    Vec state_at(double t) const {
        if (dense.empty() || t < times.front() || t > times.back())
            throw input_error("trajectory interpolation queried outside the covered range");
        size_t lo = 0, hi = dense.size() - 1;
        while (lo < hi) {
            const size_t mid = (lo + hi + 1) / 2;
            if (dense[mid].t0 <= t) lo = mid; else hi = mid - 1;
        }
        const auto& blk = dense[lo];
        const double th = blk.h != 0.0 ? (t - blk.t0) / blk.h : 0.0;
        const double th1 = 1.0 - th;
        const size_t dim = blk.c[0].size();
        Vec y(dim);
        for (size_t i = 0; i < dim; ++i)
            y[i] = blk.c[0][i] +
                   th * (blk.c[1][i] + th1 * (blk.c[2][i] + th * (blk.c[3][i] + th1 * blk.c[4][i])));
        return y;
    }
};

Vec dense_eval(const Trajectory::DenseBlock& blk, double t) {
    const double th = blk.h != 0.0 ? (t - blk.t0) / blk.h : 0.0;
    const double th1 = 1.0 - th;
    Vec y(blk.c[0].size());
    for (size_t i = 0; i < y.size(); ++i)
        y[i] = blk.c[0][i] +
               th * (blk.c[1][i] + th1 * (blk.c[2][i] + th * (blk.c[3][i] + th1 * blk.c[4][i])));
    return y;
}

// Classical RK4 with fixed substeps; used to tighten event times. Returns
// false if the right-hand side leaves its domain along the way.
bool rk4_advance(const OdeRhs& rhs, double& t, Vec& y, double t_target, int substeps) {
    const size_t dim = y.size();
    Vec k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    const double h = (t_target - t) / substeps;
    for (int s = 0; s < substeps; ++s) {
        if (!rhs(t, y, k1)) return false;
        for (size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        if (!rhs(t + 0.5 * h, tmp, k2)) return false;
        for (size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        if (!rhs(t + 0.5 * h, tmp, k3)) return false;
        for (size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * k3[i];
        if (!rhs(t + h, tmp, k4)) return false;
        for (size_t i = 0; i < dim; ++i)
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += h;
    }
    t = t_target;
    return true;
}

struct EventConfig {
    int n_axes = 0;          // leading components of y monitored for touchdown
    double threshold = 0.0;  // event fires when any monitored component hits this
    bool enabled = false;
};

// Hairer's starting step size heuristic.
double initial_step(const OdeRhs& rhs, double t0, const Vec& y0, const Vec& f0, double hmax,
                    const Tolerances& tol) {
    const size_t dim = y0.size();
    double dnf = 0.0, dny = 0.0;
    for (size_t i = 0; i < dim; ++i) {
        const double sc = tol.abs + tol.rel * std::fabs(y0[i]);
        dnf += (f0[i] / sc) * (f0[i] / sc);
        dny += (y0[i] / sc) * (y0[i] / sc);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);

    Vec y1(dim), f1(dim);
    for (size_t i = 0; i < dim; ++i) y1[i] = y0[i] + h * f0[i];
    if (!rhs(t0 + h, y1, f1)) return std::max(1e-10 * hmax, 1e-2 * h);
    double der2 = 0.0;
    for (size_t i = 0; i < dim; ++i) {
        const double sc = tol.abs + tol.rel * std::fabs(y0[i]);
        der2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3)
                                       : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, hmax});
}

OdeSolution dopri5_integrate(const OdeRhs& rhs, double t0, Vec y0, double t_end,
                             const Tolerances& tol, const EventConfig& ev) {
    if (!(t_end > t0)) throw input_error("integrate: t_end must exceed the initial time");
    if (!(tol.rel > 0.0) || !(tol.abs > 0.0))
        throw input_error("integrate: tolerances must be positive");

    const size_t dim = y0.size();
    const double span = t_end - t0;
    const double h_floor = 1e-14 * span;
    const long max_steps = 10'000'000;
    constexpr double kSafe = 0.9, kBeta = 0.04, kFacMin = 0.2, kFacMax = 10.0;
    const double expo1 = 0.2 - kBeta * 0.75;

    OdeSolution sol;
    sol.times.push_back(t0);
    sol.states.push_back(y0);

    Vec k[7];
    for (auto& v : k) v.resize(dim);
    Vec y_stage(dim), y1(dim), err_vec(dim);

    double t = t0;
    if (!rhs(t, y0, k[0])) throw std::domain_error("integrate: initial state outside domain");
    sol.stats.rhs_evaluations++;
    double h = initial_step(rhs, t, y0, k[0], span, tol);
    sol.stats.rhs_evaluations += 2;
    double facold = 1e-4;
    bool rejected_last = false;
    bool last_step = false;

    auto fail = [&](const std::string& why) {
        sol.termination = {TerminationKind::StepFailure, t, -1, why};
        return sol;
    };

    while (true) {
        if (sol.stats.accepted + sol.stats.rejected > max_steps) return fail("step limit exceeded");
        if (h < h_floor) return fail("step size underflow");
        if (t + 1.01 * h >= t_end) {
            h = t_end - t;
            last_step = true;
        }

        // Stages 2..7 (stage 7 is the FSAL evaluation at the trial endpoint).
        bool domain_ok = true;
        auto stage = [&](int s, const double* a_row) {
            for (size_t i = 0; i < dim; ++i) {
                double acc = 0.0;
                for (int j = 0; j < s - 1; ++j) acc += a_row[j] * k[j][i];
                y_stage[i] = y0[i] + h * acc;
            }
            if (!rhs(t + kC[s - 1] * h, y_stage, k[s - 1])) domain_ok = false;
            sol.stats.rhs_evaluations++;
        };
        stage(2, kA2);
        if (domain_ok) stage(3, kA3);
        if (domain_ok) stage(4, kA4);
        if (domain_ok) stage(5, kA5);
        if (domain_ok) stage(6, kA6);
        if (domain_ok) {
            for (size_t i = 0; i < dim; ++i) {
                double acc = 0.0;
                for (int j = 0; j < 6; ++j) acc += kB[j] * k[j][i];
                y1[i] = y0[i] + h * acc;
            }
            if (!rhs(t + h, y1, k[6])) domain_ok = false;
            sol.stats.rhs_evaluations++;
        }

        double err = 0.0;
        if (domain_ok) {
            for (size_t i = 0; i < dim; ++i) {
                double e = 0.0;
                for (int j = 0; j < 7; ++j) e += kE[j] * k[j][i];
                e *= h;
                const double sc = tol.abs + tol.rel * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / static_cast<double>(dim));
            if (!std::isfinite(err)) domain_ok = false;
        }

        if (!domain_ok) {
            sol.stats.rejected++;
            rejected_last = true;
            last_step = false;
            h *= 0.5;
            continue;
        }

        const double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafe));
        double h_new = h / fac;

        if (err > 1.0) {
            sol.stats.rejected++;
            h = h / std::min(1.0 / kFacMin, fac11 / kSafe);
            rejected_last = true;
            last_step = false;
            continue;
        }

        // Accepted: build the dense-output block for [t, t+h].
        sol.stats.accepted++;
        facold = std::max(err, 1e-4);
        Trajectory::DenseBlock blk;
        blk.t0 = t;
        blk.h = h;
        for (auto& c : blk.c) c.resize(dim);
        for (size_t i = 0; i < dim; ++i) {
            const double dy = y1[i] - y0[i];
            const double bspl = h * k[0][i] - dy;
            blk.c[0][i] = y0[i];
            blk.c[1][i] = dy;
            blk.c[2][i] = bspl;
            blk.c[3][i] = dy - h * k[6][i] - bspl;
            double acc = 0.0;
            for (int j = 0; j < 7; ++j) acc += kD[j] * k[j][i];
            blk.c[4][i] = h * acc;
        }

        // Touchdown scan on the dense output before committing the step.
        if (ev.enabled) {
            double t_hit = std::numeric_limits<double>::infinity();
            int axis_hit = -1;
            for (int axis = 0; axis < ev.n_axes; ++axis) {
                const auto ai = static_cast<size_t>(axis);
                auto g = [&](double tq) { return dense_eval(blk, tq)[ai] - ev.threshold; };
                // y0 is above threshold; find the first bracketing subinterval.
                constexpr int kScan = 16;
                double lo = t, g_lo = y0[ai] - ev.threshold;
                bool bracketed = false;
                for (int q = 1; q <= kScan; ++q) {
                    const double tq = t + h * q / kScan;
                    const double gq = (q == kScan) ? (y1[ai] - ev.threshold) : g(tq);
                    if (g_lo > 0.0 && gq <= 0.0) {
                        double a_lo = lo, a_hi = tq;
                        while (a_hi - a_lo > 1e-12 * std::max(1.0, std::fabs(a_hi))) {
                            const double mid = 0.5 * (a_lo + a_hi);
                            if (g(mid) > 0.0) a_lo = mid; else a_hi = mid;
                        }
                        if (a_hi < t_hit) {
                            t_hit = a_hi;
                            axis_hit = axis;
                        }
                        bracketed = true;
                        break;
                    }
                    lo = tq;
                    g_lo = gq;
                }
                (void)bracketed;
            }
            if (axis_hit >= 0) {
                // Tighten by re-integrating the step with small fixed substeps,
                // then Newton-correct the crossing along the re-integrated path.
                double t_ref = t;
                Vec y_ref = y0;
                const auto ah = static_cast<size_t>(axis_hit);
                if (rk4_advance(rhs, t_ref, y_ref, t_hit, 256)) {
                    for (int it = 0; it < 3; ++it) {
                        const double g_val = y_ref[ah] - ev.threshold;
                        const double slope = y_ref[ah + static_cast<size_t>(ev.n_axes)];
                        if (slope == 0.0) break;
                        double dt_corr = -g_val / slope;
                        if (!std::isfinite(dt_corr) || std::fabs(dt_corr) > h) break;
                        if (!rk4_advance(rhs, t_ref, y_ref, t_ref + dt_corr, 8)) break;
                    }
                    if (std::fabs(t_ref - t_hit) <= h) t_hit = t_ref;
                    else { t_ref = t_hit; y_ref = dense_eval(blk, t_hit); }
                } else {
                    y_ref = dense_eval(blk, t_hit);
                }
                blk.h = t_hit - t;  // clip the dense block at the event
                sol.dense.push_back(std::move(blk));
                sol.times.push_back(t_hit);
                sol.states.push_back(y_ref);
                sol.termination = {TerminationKind::Touchdown, t_hit, axis_hit, ""};
                return sol;
            }
        }

        sol.dense.push_back(std::move(blk));
        t += h;
        y0 = y1;
        k[0] = k[6];  // FSAL
        sol.times.push_back(t);
        sol.states.push_back(y0);

        if (last_step) {
            sol.termination = {TerminationKind::ReachedEnd, t, -1, ""};
            return sol;
        }
        if (rejected_last) h_new = std::min(h_new, h);
        rejected_last = false;
        h = h_new;
    }
}

OdeRhs make_emden_rhs(const ModelParams& params) {
    const int n = params.n;
    const double xi = params.xi;
    const double gm1 = params.gamma - 1.0;
    return [n, xi, gm1](double, const Vec& y, Vec& dy) {
        double prod = 1.0;
        for (int i = 0; i < n; ++i) {
            if (!(y[static_cast<size_t>(i)] > 0.0)) return false;
            prod *= y[static_cast<size_t>(i)];
        }
        const double coupling = gm1 == 0.0 ? 1.0 : std::pow(prod, gm1);
        for (int i = 0; i < n; ++i) {
            const auto ii = static_cast<size_t>(i);
            dy[ii] = y[ii + static_cast<size_t>(n)];
            dy[ii + static_cast<size_t>(n)] = xi / (y[ii] * coupling);
        }
        return true;
    };
}

double default_touch_threshold(const std::vector<double>& a0) {
    return 1e-8 * *std::min_element(a0.begin(), a0.end());
}

}  // namespace

EmdenState Trajectory::state_at(double t) const {
    if (!covers(t)) throw input_error("Trajectory::state_at: time outside the integrated range");
    if (dense.empty()) throw input_error("Trajectory::state_at: no dense output stored");
    size_t lo = 0, hi = dense.size() - 1;
    while (lo < hi) {
        const size_t mid = (lo + hi + 1) / 2;
        if (dense[mid].t0 <= t) lo = mid; else hi = mid - 1;
    }
    const Vec y = dense_eval(dense[lo], t);
    const int n = params.n;
    EmdenState st;
    st.t = t;
    st.a.assign(y.begin(), y.begin() + n);
    st.a_dot.assign(y.begin() + n, y.end());
    return st;
}

Trajectory integrate(const ModelParams& params, const EmdenState& init, double t_end,
                     const Tolerances& tol, const EventSpec& events) {
    params.validate();
    init.validate(params);

    Vec y0(static_cast<size_t>(2 * params.n));
    for (int i = 0; i < params.n; ++i) {
        y0[static_cast<size_t>(i)] = init.a[static_cast<size_t>(i)];
        y0[static_cast<size_t>(i + params.n)] = init.a_dot[static_cast<size_t>(i)];
    }

    EventConfig ev;
    ev.enabled = events.detect_touchdown;
    ev.n_axes = params.n;
    ev.threshold = events.touch_threshold > 0.0 ? events.touch_threshold
                                                : default_touch_threshold(init.a);

    OdeSolution sol = dopri5_integrate(make_emden_rhs(params), init.t, std::move(y0), t_end, tol, ev);

    Trajectory traj;
    traj.params = params;
    traj.termination = sol.termination;
    traj.stats = sol.stats;
    traj.dense = std::move(sol.dense);
    traj.samples.reserve(sol.times.size());
    for (size_t s = 0; s < sol.times.size(); ++s) {
        EmdenState st;
        st.t = sol.times[s];
        st.a.assign(sol.states[s].begin(), sol.states[s].begin() + params.n);
        st.a_dot.assign(sol.states[s].begin() + params.n, sol.states[s].end());
        traj.samples.push_back(std::move(st));
    }
    return traj;
}

double ScalarTrajectory::a_at(double time) const {
    if (dense_.empty() || time < t.front() || time > t.back())
        throw input_error("ScalarTrajectory: time outside the integrated range");
    size_t lo = 0, hi = dense_.size() - 1;
    while (lo < hi) {
        const size_t mid = (lo + hi + 1) / 2;
        if (dense_[mid].t0 <= time) lo = mid; else hi = mid - 1;
    }
    return dense_eval(dense_[lo], time)[0];
}

double ScalarTrajectory::a_dot_at(double time) const {
    if (dense_.empty() || time < t.front() || time > t.back())
        throw input_error("ScalarTrajectory: time outside the integrated range");
    size_t lo = 0, hi = dense_.size() - 1;
    while (lo < hi) {
        const size_t mid = (lo + hi + 1) / 2;
        if (dense_[mid].t0 <= time) lo = mid; else hi = mid - 1;
    }
    return dense_eval(dense_[lo], time)[1];
}

ScalarTrajectory integrate_scalar(const ModelParams& params, double a0, double a1, double t_end,
                                  const Tolerances& tol, const EventSpec& events) {
    params.validate();
    if (!(a0 > 0.0)) throw input_error("integrate_scalar: a0 must be positive");

    const double expo = params.n * (params.gamma - 1.0) + 1.0;
    const double xi = params.xi;
    OdeRhs rhs = [xi, expo](double, const Vec& y, Vec& dy) {
        if (!(y[0] > 0.0)) return false;
        dy[0] = y[1];
        dy[1] = xi / std::pow(y[0], expo);
        return true;
    };

    EventConfig ev;
    ev.enabled = events.detect_touchdown;
    ev.n_axes = 1;
    ev.threshold = events.touch_threshold > 0.0 ? events.touch_threshold : 1e-8 * a0;

    OdeSolution sol = dopri5_integrate(rhs, 0.0, {a0, a1}, t_end, tol, ev);
    ScalarTrajectory out;
    out.termination = sol.termination;
    out.dense_ = std::move(sol.dense);
    out.t = sol.times;
    out.a.reserve(sol.states.size());
    out.a_dot.reserve(sol.states.size());
    for (const auto& y : sol.states) {
        out.a.push_back(y[0]);
        out.a_dot.push_back(y[1]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Isothermal touchdown-time oracle.
// ---------------------------------------------------------------------------

namespace {

// Time to fall from a_hi to zero given c = 2(E + xi ln a_hi) >= 0 and b = -2 xi.
// Substituting a = a_hi e^{-w}, w = v^2 turns the integral into
//   int_0^inf 2 a_hi v e^{-v^2} / sqrt(c + b v^2) dv,
// smooth for c > 0; for c = 0 the v cancels algebraically.
double fall_time(double a_hi, double c, double b) {
    std::function<double(double)> integrand;
    if (c <= 0.0) {
        const double pref = 2.0 * a_hi / std::sqrt(b);
        integrand = [pref](double v) { return pref * std::exp(-v * v); };
    } else {
        integrand = [a_hi, c, b](double v) {
            return 2.0 * a_hi * v * std::exp(-v * v) / std::sqrt(c + b * v * v);
        };
    }
    return adaptive_simpson(integrand, 0.0, 9.0, 1e-13);
}

// Time to rise from a0 to the turning point a_max (where adot = 0), with the
// square-root endpoint singularity removed by a = a_max - v^2.
double rise_time(double a0, double a_max, double energy, double xi) {
    const double v1 = std::sqrt(std::max(a_max - a0, 0.0));
    if (v1 == 0.0) return 0.0;
    const double r0 = energy + xi * std::log(a_max);  // ~0 up to rounding
    const double limit_val = std::sqrt(2.0 * a_max / (-xi));
    auto integrand = [=](double v) {
        if (v < 1e-7 * v1) return limit_val;
        const double phi = r0 + xi * std::log1p(-v * v / a_max);
        if (!(phi > 0.0)) return limit_val;
        return 2.0 * v / std::sqrt(2.0 * phi);
    };
    return adaptive_simpson(integrand, 0.0, v1, 1e-13);
}

}  // namespace

double touchdown_time_quadrature(const ModelParams& params, double a0, double a1) {
    if (!params.isothermal() || !(params.xi < 0.0))
        throw unsupported_regime_error(
            "touchdown_time_quadrature: requires gamma = 1 and xi < 0");
    if (!(a0 > 0.0)) throw input_error("touchdown_time_quadrature: a0 must be positive");

    const double xi = params.xi;
    const double energy = 0.5 * a1 * a1 - xi * std::log(a0);
    const double b = -2.0 * xi;
    if (a1 < 0.0) return fall_time(a0, a1 * a1, b);
    const double a_max = std::exp(-energy / xi);
    return rise_time(a0, a_max, energy, xi) + fall_time(a_max, 0.0, b);
}

// ---------------------------------------------------------------------------
// Trajectory classification.
// ---------------------------------------------------------------------------

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::GlobalByTheorem: return "global_by_theorem";
        case Verdict::BlowupByTheorem: return "blowup_by_theorem";
        case Verdict::NumericalBlowup: return "numerical_blowup";
        case Verdict::NumericalGlobal: return "numerical_global";
        case Verdict::Undetermined: return "undetermined";
    }
    return "undetermined";
}

std::string to_string(TerminationKind k) {
    switch (k) {
        case TerminationKind::ReachedEnd: return "reached_end";
        case TerminationKind::Touchdown: return "touchdown";
        case TerminationKind::StepFailure: return "step_failure";
    }
    return "step_failure";
}

namespace {

// A step failure with a scale factor collapsed to within a few decades of the
// touchdown threshold is collapse evidence; the recorded time underestimates
// the true touchdown time.
bool failure_near_touchdown(const Trajectory& traj) {
    const auto& last = traj.samples.back();
    const double eps = default_touch_threshold(traj.samples.front().a);
    const double a_min = *std::min_element(last.a.begin(), last.a.end());
    return a_min <= 1e4 * eps;
}

}  // namespace

Classification classify(const ModelParams& params, const EmdenState& init, double horizon) {
    params.validate();
    init.validate(params);
    if (!(horizon > 0.0)) throw input_error("classify: horizon must be positive");

    Classification cls;
    cls.horizon = horizon;
    const Tolerances tol{1e-10, 1e-12};

    auto run_numeric = [&](double t_end) { return integrate(params, init, init.t + t_end, tol); };

    const bool any_negative_rate =
        std::any_of(init.a_dot.begin(), init.a_dot.end(), [](double v) { return v < 0.0; });
    const bool all_nonneg_rate = !any_negative_rate;

    if (params.xi == 0.0) {
        // Free linear motion a_i(t) = a_i0 + a_i1 t; not covered by the
        // theorem's dichotomy, so the verdict stays in the numerical family.
        cls.note = "xi=0 free linear motion";
        if (any_negative_rate) {
            double t_touch = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < init.a.size(); ++i)
                if (init.a_dot[i] < 0.0)
                    t_touch = std::min(t_touch, -init.a[i] / init.a_dot[i]);
            cls.verdict = Verdict::NumericalBlowup;
            cls.t_est = t_touch;
        } else {
            cls.verdict = Verdict::NumericalGlobal;
            cls.t_est.reset();
        }
        return cls;
    }

    if (params.isothermal()) {
        if (params.xi < 0.0) {
            cls.verdict = Verdict::BlowupByTheorem;
            cls.theorem_case = "1a";
            Trajectory traj = run_numeric(horizon);
            if (traj.termination.kind == TerminationKind::Touchdown)
                cls.t_est = traj.termination.t;
            else if (traj.termination.kind == TerminationKind::StepFailure &&
                     failure_near_touchdown(traj)) {
                cls.t_est = traj.termination.t;
                cls.t_est_conservative = true;
            }
            cls.evidence = std::move(traj);
        } else {
            cls.verdict = Verdict::GlobalByTheorem;
            cls.theorem_case = "1b";
        }
        return cls;
    }

    // gamma > 1
    if (params.xi < 0.0 && any_negative_rate) {
        double bound = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < init.a.size(); ++i)
            if (init.a_dot[i] < 0.0) bound = std::min(bound, -init.a[i] / init.a_dot[i]);
        cls.verdict = Verdict::BlowupByTheorem;
        cls.theorem_case = "2a";
        cls.bound_T = bound;

        // Confirming integration: concavity forces collapse strictly before the
        // bound, so an event (or a near-touchdown step failure) must appear.
        Trajectory traj = run_numeric(bound * (1.0 + 1e-3) + 1e-12);
        const double slack = bound * (1.0 + 1e-9);
        if (traj.termination.kind == TerminationKind::Touchdown) {
            cls.t_est = traj.termination.t;
        } else if (traj.termination.kind == TerminationKind::StepFailure &&
                   failure_near_touchdown(traj)) {
            cls.t_est = traj.termination.t;
            cls.t_est_conservative = true;
        } else {
            throw breakdown_error("classify: case-2a confirmation failed to observe collapse");
        }
        if (!(*cls.t_est <= slack))
            throw breakdown_error("classify: observed collapse after the analytic bound");
        cls.evidence = std::move(traj);
        return cls;
    }
    if (params.xi > 0.0 && all_nonneg_rate) {
        cls.verdict = Verdict::GlobalByTheorem;
        cls.theorem_case = "2b";
        return cls;
    }

    // Mixed-sign regime outside the theorem's hypotheses: integrate and report.
    Trajectory traj = run_numeric(horizon);
    switch (traj.termination.kind) {
        case TerminationKind::Touchdown:
            cls.verdict = Verdict::NumericalBlowup;
            cls.t_est = traj.termination.t;
            break;
        case TerminationKind::ReachedEnd:
            cls.verdict = Verdict::NumericalGlobal;
            break;
        case TerminationKind::StepFailure:
            if (failure_near_touchdown(traj)) {
                cls.verdict = Verdict::NumericalBlowup;
                cls.t_est = traj.termination.t;
                cls.t_est_conservative = true;
            } else {
                cls.verdict = Verdict::Undetermined;
                cls.note = "integration failed away from collapse: " + traj.termination.reason;
            }
            break;
    }
    cls.evidence = std::move(traj);
    return cls;
}

}  // namespace ellipflow
