#include "ellipflow/profile.hpp"

#include <cmath>

namespace ellipflow {

void ModelParams::validate() const {
    if (n < 1) throw input_error("ModelParams: dimension must be >= 1");
    if (gamma < 1.0) throw input_error("ModelParams: gamma must be >= 1");
    if (!(k_pressure > 0.0)) throw input_error("ModelParams: K must be > 0");
    if (mu < 0.0) throw input_error("ModelParams: mu must be >= 0");
    if (alpha < 0.0) throw input_error("ModelParams: alpha must be >= 0");
    if (!d.empty() && static_cast<int>(d.size()) != n)
        throw input_error("ModelParams: drift vector length must equal the dimension");
}

void EmdenState::validate(const ModelParams& params) const {
    if (dim() != params.n || a_dot.size() != a.size())
        throw input_error("EmdenState: vector lengths must equal the dimension");
    for (double ai : a)
        if (!(ai > 0.0)) throw input_error("EmdenState: all scale factors must be positive");
}

double s_variable(const EmdenState& state, std::span<const double> x, const ModelParams& params) {
    state.validate(params);
    if (static_cast<int>(x.size()) != params.n)
        throw input_error("s_variable: position length must equal the dimension");
    double s = 0.0;
    for (int i = 0; i < params.n; ++i) {
        const double r = (x[static_cast<size_t>(i)] + params.drift(i)) / state.a[static_cast<size_t>(i)];
        s += r * r;
    }
    return s;
}

// Linear inner term of the gamma > 1 branch, -xi(gamma-1)/(2 K gamma) s + alpha.
static double inner_term(double s, const ModelParams& p) {
    return -p.xi * (p.gamma - 1.0) / (2.0 * p.k_pressure * p.gamma) * s + p.alpha;
}

double profile_value(double s, const ModelParams& params) {
    if (s < 0.0) throw input_error("profile_value: s must be nonnegative");
    if (params.isothermal())
        return params.alpha * std::exp(-params.xi * s / (2.0 * params.k_pressure));
    const double inner = inner_term(s, params);
    if (inner <= 0.0) return 0.0;
    return std::pow(inner, 1.0 / (params.gamma - 1.0));
}

double profile_derivative(double s, const ModelParams& params) {
    if (s < 0.0) throw input_error("profile_derivative: s must be nonnegative");
    const double rate = params.xi / (2.0 * params.k_pressure);
    if (params.isothermal())
        return -rate * params.alpha * std::exp(-rate * s);
    const double inner = inner_term(s, params);
    if (inner <= 0.0)
        throw boundary_error("profile_derivative: vacuum edge, derivative undefined");
    // f = inner^{1/(gamma-1)}  =>  f' = -xi/(2 K gamma) inner^{(2-gamma)/(gamma-1)}
    return -params.xi / (2.0 * params.k_pressure * params.gamma) *
           std::pow(inner, (2.0 - params.gamma) / (params.gamma - 1.0));
}

FieldSample evaluate_field(const EmdenState& state, std::span<const double> x,
                           const ModelParams& params) {
    FieldSample out;
    out.s = s_variable(state, x, params);  // validates state and dimensions
    out.x.assign(x.begin(), x.end());
    out.rho = profile_value(out.s, params) / product(state.a);
    out.u.resize(x.size());
    for (int i = 0; i < params.n; ++i) {
        const auto k = static_cast<size_t>(i);
        out.u[k] = state.a_dot[k] / state.a[k] * (x[k] + params.drift(i));
    }
    return out;
}

SupportGeometry support_geometry(const EmdenState& state, const ModelParams& params) {
    state.validate(params);
    SupportGeometry g;
    if (params.gamma > 1.0 && params.xi > 0.0) {
        g.bounded = true;
        const double s_max =
            2.0 * params.k_pressure * params.gamma * params.alpha / (params.xi * (params.gamma - 1.0));
        g.s_max = s_max;
        std::vector<double> axes(state.a.size());
        for (size_t i = 0; i < axes.size(); ++i) axes[i] = state.a[i] * std::sqrt(s_max);
        g.semi_axes = std::move(axes);
    }
    return g;
}

bool in_support_interior(const EmdenState& state, std::span<const double> x,
                         const ModelParams& params, double interior_fraction) {
    const SupportGeometry g = support_geometry(state, params);
    if (!g.bounded) return true;
    return s_variable(state, x, params) <= interior_fraction * *g.s_max;
}

MassResult total_mass(const EmdenState& state, const ModelParams& params,
                      const QuadratureSpec& quad) {
    state.validate(params);
    if (!(params.xi > 0.0))
        throw unsupported_regime_error("total_mass: mass is infinite unless xi > 0");
    if (!(params.alpha > 0.0))
        throw unsupported_regime_error("total_mass: zero-amplitude profile has no mass");

    const int n = params.n;
    const int nodes = quad.resolved_nodes(n);

    // Integration box per axis, centered at -d_i. Bounded supports use their
    // bounding box; the Gaussian case truncates at radius * a_i.
    std::vector<double> half(static_cast<size_t>(n));
    const SupportGeometry g = support_geometry(state, params);
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<size_t>(i);
        half[k] = g.bounded ? (*g.semi_axes)[k] : quad.radius * state.a[k];
    }

    // Tensor-product midpoint rule. Nodes are affine images of a fixed grid in
    // the scaled variable, so the sum is state-independent up to rounding.
    double cell = 1.0;
    for (int i = 0; i < n; ++i) cell *= 2.0 * half[static_cast<size_t>(i)] / nodes;

    std::vector<double> x(static_cast<size_t>(n));
    std::vector<int> idx(static_cast<size_t>(n), 0);
    double sum = 0.0;
    const long total = [&] {
        long t = 1;
        for (int i = 0; i < n; ++i) t *= nodes;
        return t;
    }();
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        for (int i = 0; i < n; ++i) {
            idx[static_cast<size_t>(i)] = static_cast<int>(rem % nodes);
            rem /= nodes;
        }
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<size_t>(i);
            const double xi_pos = -params.drift(i) + half[k] * ((2.0 * idx[k] + 1.0) / nodes - 1.0);
            x[k] = xi_pos;
            const double r = (xi_pos + params.drift(i)) / state.a[k];
            s += r * r;
        }
        sum += profile_value(s, params);
    }

    // rho = f(s)/prod(a); the box volume element carries the cell size.
    MassResult result;
    result.value = sum * cell / product(state.a);

    if (!g.bounded) {
        // Gaussian tail outside the truncation box, bounded by N axis slabs.
        const double rate = params.xi / (2.0 * params.k_pressure);
        const double full_1d = std::sqrt(M_PI / rate);
        const double tail_1d = full_1d * std::erfc(quad.radius * std::sqrt(rate));
        result.tail_bound = params.alpha * n * tail_1d * std::pow(full_1d, n - 1);
    }
    return result;
}

}  // namespace ellipflow
