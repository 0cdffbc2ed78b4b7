#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ellipflow {

// Error categories used across the library. The CLI maps them to exit codes:
// config/input -> 2, numerical breakdown -> 3, unsupported regime -> 4.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Evaluation at or outside the vacuum boundary of a compactly supported profile.
struct boundary_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter regime the requested quantity does not exist in (e.g. infinite mass).
struct unsupported_regime_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Nonfinite values, step-size underflow in a context that cannot tolerate it, etc.
struct breakdown_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parameters of the model: pressure law p = K rho^gamma, viscosity mu,
/// separation constant xi, profile amplitude alpha and drift vector d.
struct ModelParams {
    int n = 1;                   // spatial dimension N >= 1
    double gamma = 1.0;          // adiabatic index, >= 1
    double k_pressure = 1.0;     // K > 0
    double mu = 0.0;             // viscosity, >= 0
    double xi = 0.0;             // separation constant, any sign
    double alpha = 1.0;          // profile amplitude, >= 0
    std::vector<double> d;       // drift, length N (empty means zero drift)

    // Throws input_error when an invariant is violated.
    void validate() const;

    // Drift component with the empty-vector-means-zero convention applied.
    double drift(int i) const { return d.empty() ? 0.0 : d[static_cast<size_t>(i)]; }

    bool isothermal() const { return gamma == 1.0; }
};

/// State of the scale-factor dynamical system: time, scales a_i > 0 and rates.
struct EmdenState {
    double t = 0.0;
    std::vector<double> a;
    std::vector<double> a_dot;

    EmdenState() = default;
    EmdenState(double time, std::vector<double> a_, std::vector<double> a_dot_)
        : t(time), a(std::move(a_)), a_dot(std::move(a_dot_)) {}

    int dim() const { return static_cast<int>(a.size()); }

    // Throws input_error on size mismatch or any a_i <= 0.
    void validate(const ModelParams& params) const;
};

/// Exact-solution sample at one point: density, velocity and the similarity
/// coordinate s = sum_k (x_k + d_k)^2 / a_k^2.
struct FieldSample {
    std::vector<double> x;
    double rho = 0.0;
    std::vector<double> u;
    double s = 0.0;
};

inline double product(const std::vector<double>& v) {
    double p = 1.0;
    for (double x : v) p *= x;
    return p;
}

}  // namespace ellipflow
