#pragma once

#include <cmath>
#include <functional>

#include "ellipflow/types.hpp"

namespace ellipflow {

/// Adaptive Simpson quadrature on [a, b] with absolute tolerance `tol`.
/// Recursion splits until the Richardson estimate of the panel error passes.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 60);

}  // namespace ellipflow
