#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ellipflow/types.hpp"

namespace ellipflow {

/// Right-hand side of the scale-factor system,
///   addot_i = xi / (a_i * prod_k(a_k)^{gamma-1}).
/// For gamma = 1 the axes decouple to addot_i = xi / a_i.
std::vector<double> emden_rhs(const EmdenState& state, const ModelParams& params);

/// Radial (equal-axes) reduction: addot = xi / a^{N(gamma-1)+1}.
double scalar_emden_rhs(double a, const ModelParams& params);

/// Conserved energy along exact trajectories. Returns a single value
///   H = 1/2 sum adot_i^2 + xi/(gamma-1) * prod(a_k)^{1-gamma}
/// for gamma > 1, and the N per-axis energies
///   E_i = 1/2 adot_i^2 - xi ln a_i
/// for gamma = 1 (the axes are independent there).
std::vector<double> energies(const EmdenState& state, const ModelParams& params);

enum class TerminationKind { ReachedEnd, Touchdown, StepFailure };

struct Termination {
    TerminationKind kind = TerminationKind::ReachedEnd;
    double t = 0.0;           // end time, event time, or failure time
    int axis = -1;            // collapsing axis for Touchdown
    std::string reason;       // diagnostic for StepFailure
};

struct Tolerances {
    double rel = 1e-10;
    double abs = 1e-12;
};

struct EventSpec {
    // Touchdown threshold; <= 0 means the default 1e-8 * min(a_i(0)).
    double touch_threshold = 0.0;
    bool detect_touchdown = true;
};

struct IntegrationStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evaluations = 0;
};

/// Accepted-step record plus the dense-output coefficients of the step that
/// starts at this sample (quartic Hermite-type interpolant of the embedded pair).
struct Trajectory {
    ModelParams params;
    std::vector<EmdenState> samples;
    Termination termination;
    IntegrationStats stats;

    // Dense-output blocks, one per accepted step: five stacked vectors of
    // length 2N evaluated as c1 + th*(c2 + (1-th)*(c3 + th*(c4 + (1-th)*c5))).
    struct DenseBlock {
        double t0 = 0.0, h = 0.0;
        std::array<std::vector<double>, 5> c;
    };
    std::vector<DenseBlock> dense;

    double start_time() const { return samples.front().t; }
    double end_time() const { return samples.back().t; }
    bool covers(double t) const { return t >= start_time() && t <= end_time(); }

    /// Dense-output interpolation; throws input_error outside [start, end].
    EmdenState state_at(double t) const;
};

/// Integrates the 2N-dimensional first-order system with an adaptive embedded
/// Runge-Kutta 4(5) pair (Dormand-Prince). Steps are accepted when the local
/// error estimate passes the mixed tolerance test; touchdown events are located
/// by bisection on the dense output and tightened by re-integrating the last
/// step with small fixed substeps.
Trajectory integrate(const ModelParams& params, const EmdenState& init, double t_end,
                     const Tolerances& tol = {}, const EventSpec& events = {});

/// Scalar counterpart for the radial reduction; same stepping machinery.
struct ScalarTrajectory {
    std::vector<double> t, a, a_dot;
    Termination termination;
    double a_at(double time) const;      // dense interpolation
    double a_dot_at(double time) const;
private:
    friend ScalarTrajectory integrate_scalar(const ModelParams&, double, double, double,
                                             const Tolerances&, const EventSpec&);
    std::vector<Trajectory::DenseBlock> dense_;
};

ScalarTrajectory integrate_scalar(const ModelParams& params, double a0, double a1,
                                  double t_end, const Tolerances& tol = {},
                                  const EventSpec& events = {});

/// Exact collapse time for the decoupled isothermal case (gamma = 1, xi < 0),
/// computed from the per-axis energy E = 1/2 a1^2 - xi ln a0 via
/// adot^2 = 2(E + xi ln a); each monotone phase is an adaptive quadrature with
/// the endpoint singularity removed by substitution.
double touchdown_time_quadrature(const ModelParams& params, double a0, double a1);

enum class Verdict {
    GlobalByTheorem,    // cases 1b / 2b
    BlowupByTheorem,    // cases 1a / 2a
    NumericalBlowup,
    NumericalGlobal,
    Undetermined,
};

struct Classification {
    Verdict verdict = Verdict::Undetermined;
    std::string theorem_case;          // "1a", "1b", "2a", "2b", or empty
    std::optional<double> bound_T;     // case 2a upper bound min(-a_i0/a_i1 : a_i1 < 0)
    std::optional<double> t_est;       // numerically observed collapse time
    bool t_est_conservative = false;   // t_est from a step failure rather than an event
    double horizon = 0.0;
    std::string note;                  // e.g. the xi = 0 free-motion special case
    std::optional<Trajectory> evidence;
};

/// Applies the analytic blowup/global dichotomy where its hypotheses hold and
/// falls back to integration to `horizon` elsewhere. A 2a verdict always runs a
/// confirming integration and checks the observed collapse lands at t <= bound_T.
Classification classify(const ModelParams& params, const EmdenState& init, double horizon);

std::string to_string(Verdict v);
std::string to_string(TerminationKind k);

}  // namespace ellipflow
