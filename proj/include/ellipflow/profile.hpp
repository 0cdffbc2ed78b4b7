#pragma once

#include <optional>
#include <span>

#include "ellipflow/types.hpp"

namespace ellipflow {

/// Similarity coordinate s = sum_k (x_k + d_k)^2 / a_k(t)^2.
double s_variable(const EmdenState& state, std::span<const double> x, const ModelParams& params);

/// Profile value f(s):
///   gamma = 1 : alpha * exp(-xi s / (2K))
///   gamma > 1 : max((-xi(gamma-1)/(2 K gamma) s + alpha)^{1/(gamma-1)}, 0)
/// Nonnegative and continuous in s. Note f(0) = alpha only for gamma = 1;
/// for gamma > 1 the amplitude enters inside the power, f(0) = alpha^{1/(gamma-1)}.
double profile_value(double s, const ModelParams& params);

/// Analytic derivative f'(s). Satisfies xi/(2 K gamma) + f^{gamma-2} f' = 0
/// wherever f > 0. Throws boundary_error for gamma > 1 at the vacuum edge
/// (f(s) = 0), where the derivative is one-sided or undefined.
double profile_derivative(double s, const ModelParams& params);

/// Exact fields at position x: rho = f(s) / prod(a_k), u_i = (adot_i/a_i)(x_i + d_i).
FieldSample evaluate_field(const EmdenState& state, std::span<const double> x,
                           const ModelParams& params);

/// Support of the density at a given state. Bounded exactly when gamma > 1 and
/// xi > 0: an ellipsoid s <= s_max centered at -d with semi-axis a_i sqrt(s_max).
struct SupportGeometry {
    bool bounded = false;
    std::optional<double> s_max;
    std::optional<std::vector<double>> semi_axes;
};

SupportGeometry support_geometry(const EmdenState& state, const ModelParams& params);

/// Fraction of s_max treated as support interior for derivative and residual
/// evaluation (gamma > 1); outside it f^{gamma-2} may be close to singular.
inline constexpr double kDefaultInteriorFraction = 0.99;

/// True when x lies strictly inside the support with the given margin
/// (always true for unbounded supports).
bool in_support_interior(const EmdenState& state, std::span<const double> x,
                         const ModelParams& params,
                         double interior_fraction = kDefaultInteriorFraction);

/// Tensor-product midpoint quadrature settings for the mass integral.
struct QuadratureSpec {
    int nodes_per_axis = 0;  // 0 = default: 256 for N <= 2, 64 otherwise
    double radius = 10.0;    // truncation half-width in the scaled variable y = (x+d)/a
                             // (gamma = 1 only; bounded supports integrate their box)

    int resolved_nodes(int n) const {
        if (nodes_per_axis > 0) return nodes_per_axis;
        return n <= 2 ? 256 : 64;
    }
};

struct MassResult {
    double value = 0.0;       // quadrature approximation of the total mass
    double tail_bound = 0.0;  // bound on the truncated Gaussian tail (gamma = 1)
};

/// Total mass integral of rho over space. Finite only for xi > 0; other regimes
/// throw unsupported_regime_error. Independent of the state along a trajectory
/// (substituting y_k = (x_k + d_k)/a_k removes every time dependence).
MassResult total_mass(const EmdenState& state, const ModelParams& params,
                      const QuadratureSpec& quad = {});

}  // namespace ellipflow
