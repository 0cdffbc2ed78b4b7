#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ellipflow/fv.hpp"
#include "ellipflow/types.hpp"

namespace ellipflow {

/// Flat, typed key-value run configuration with strict validation: unknown
/// sections or keys are errors, every value is type-checked with line
/// diagnostics. parse -> serialize is canonical (idempotent round trip).
struct RunConfig {
    ModelParams model;
    EmdenState init;  // t = 0

    // [run]
    std::string out;
    unsigned long long seed = 0;
    int threads = 1;

    struct Integrate {
        double t_end = 1.0;
        double rel_tol = 1e-10;
        double abs_tol = 1e-12;
        double touch_threshold = 0.0;  // 0 = default 1e-8 * min(a0)
    };
    std::optional<Integrate> integrate;

    struct Classify {
        double horizon = 10.0;
    };
    std::optional<Classify> classify;

    struct Sweep {
        std::vector<double> gamma;
        std::vector<double> xi;
    };
    std::optional<Sweep> sweep;

    struct Field {
        double t = 0.0;
        std::vector<double> lo, hi;
        std::vector<int> counts;
    };
    std::optional<Field> field;

    struct Residual {
        int points = 10;
        double h0 = 0.01;
        int levels = 5;
        double t = 0.5;
    };
    std::optional<Residual> residual;

    struct Mass {
        std::vector<double> times{0.0};
        int nodes = 0;  // 0 = module default
        double radius = 10.0;
    };
    std::optional<Mass> mass;

    struct Crosscheck {
        std::array<double, 2> lo{-1.0, -1.0};
        std::array<double, 2> hi{1.0, 1.0};
        std::vector<int> levels;
        double cfl = 0.45;
        double t_end = 0.3;
        GhostPolicy ghost = GhostPolicy::Exact;
        bool muscl = true;
        double rho_floor = 1e-10;
        bool snapshots = false;
    };
    std::optional<Crosscheck> crosscheck;

    static RunConfig parse_string(const std::string& text);
    static RunConfig parse_file(const std::string& path);

    /// Canonical text form; parsing it reproduces this config exactly.
    std::string serialize() const;

    Tolerances tolerances() const {
        if (integrate) return {integrate->rel_tol, integrate->abs_tol};
        return {1e-10, 1e-12};
    }
};

}  // namespace ellipflow
