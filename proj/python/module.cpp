#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ellipflow/commands.hpp"
#include "ellipflow/emden.hpp"
#include "ellipflow/fv.hpp"
#include "ellipflow/profile.hpp"
#include "ellipflow/residual.hpp"

namespace py = pybind11;
using namespace ellipflow;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exact ellipsoidal solutions of the compressible Euler/Navier-Stokes system";

    py::register_exception<input_error>(m, "InputError", PyExc_ValueError);
    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<boundary_error>(m, "BoundaryError", PyExc_ValueError);
    py::register_exception<unsupported_regime_error>(m, "UnsupportedRegimeError",
                                                     PyExc_ValueError);
    py::register_exception<breakdown_error>(m, "BreakdownError", PyExc_ArithmeticError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](int n, double gamma, double k, double mu, double xi, double alpha,
                         std::vector<double> d) {
                 ModelParams p{n, gamma, k, mu, xi, alpha, std::move(d)};
                 p.validate();
                 return p;
             }),
             py::arg("n"), py::arg("gamma"), py::arg("k") = 1.0, py::arg("mu") = 0.0,
             py::arg("xi") = 0.0, py::arg("alpha") = 1.0, py::arg("d") = std::vector<double>{})
        .def_readwrite("n", &ModelParams::n)
        .def_readwrite("gamma", &ModelParams::gamma)
        .def_readwrite("k", &ModelParams::k_pressure)
        .def_readwrite("mu", &ModelParams::mu)
        .def_readwrite("xi", &ModelParams::xi)
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("d", &ModelParams::d)
        .def("__repr__", [](const ModelParams& p) {
            std::ostringstream os;
            os << "ModelParams(n=" << p.n << ", gamma=" << p.gamma << ", k=" << p.k_pressure
               << ", mu=" << p.mu << ", xi=" << p.xi << ", alpha=" << p.alpha << ")";
            return os.str();
        });

    py::class_<EmdenState>(m, "EmdenState")
        .def(py::init<double, std::vector<double>, std::vector<double>>(), py::arg("t"),
             py::arg("a"), py::arg("a_dot"))
        .def_readwrite("t", &EmdenState::t)
        .def_readwrite("a", &EmdenState::a)
        .def_readwrite("a_dot", &EmdenState::a_dot);

    py::class_<FieldSample>(m, "FieldSample")
        .def_readonly("x", &FieldSample::x)
        .def_readonly("rho", &FieldSample::rho)
        .def_readonly("u", &FieldSample::u)
        .def_readonly("s", &FieldSample::s);

    // profile
    m.def("s_variable",
          [](const EmdenState& st, const std::vector<double>& x, const ModelParams& p) {
              return s_variable(st, x, p);
          });
    m.def("profile_value", &profile_value, py::arg("s"), py::arg("params"));
    m.def("profile_derivative", &profile_derivative, py::arg("s"), py::arg("params"));
    m.def("evaluate_field",
          [](const EmdenState& st, const std::vector<double>& x, const ModelParams& p) {
              return evaluate_field(st, x, p);
          });
    py::class_<SupportGeometry>(m, "SupportGeometry")
        .def_readonly("bounded", &SupportGeometry::bounded)
        .def_readonly("s_max", &SupportGeometry::s_max)
        .def_readonly("semi_axes", &SupportGeometry::semi_axes);
    m.def("support_geometry", &support_geometry);
    py::class_<QuadratureSpec>(m, "QuadratureSpec")
        .def(py::init<>())
        .def_readwrite("nodes_per_axis", &QuadratureSpec::nodes_per_axis)
        .def_readwrite("radius", &QuadratureSpec::radius);
    m.def(
        "total_mass",
        [](const EmdenState& st, const ModelParams& p, const QuadratureSpec& q) {
            const MassResult r = total_mass(st, p, q);
            return py::make_tuple(r.value, r.tail_bound);
        },
        py::arg("state"), py::arg("params"), py::arg("quad") = QuadratureSpec{});

    // emden
    m.def("emden_rhs", &emden_rhs);
    m.def("scalar_emden_rhs", &scalar_emden_rhs);
    m.def("energies", &energies);
    py::class_<Termination>(m, "Termination")
        .def_property_readonly("kind", [](const Termination& t) { return to_string(t.kind); })
        .def_readonly("t", &Termination::t)
        .def_readonly("axis", &Termination::axis)
        .def_readonly("reason", &Termination::reason);
    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("termination", &Trajectory::termination)
        .def_property_readonly("times",
                               [](const Trajectory& tr) {
                                   std::vector<double> t;
                                   for (const auto& s : tr.samples) t.push_back(s.t);
                                   return t;
                               })
        .def("state_at", &Trajectory::state_at)
        .def("final_state", [](const Trajectory& tr) { return tr.samples.back(); })
        .def("__len__", [](const Trajectory& tr) { return tr.samples.size(); });
    m.def(
        "integrate",
        [](const ModelParams& p, const EmdenState& init, double t_end, double rel_tol,
           double abs_tol, double touch_threshold) {
            EventSpec ev;
            ev.touch_threshold = touch_threshold;
            return integrate(p, init, t_end, {rel_tol, abs_tol}, ev);
        },
        py::arg("params"), py::arg("init"), py::arg("t_end"), py::arg("rel_tol") = 1e-10,
        py::arg("abs_tol") = 1e-12, py::arg("touch_threshold") = 0.0);
    m.def("touchdown_time_quadrature", &touchdown_time_quadrature, py::arg("params"),
          py::arg("a0"), py::arg("a1"));
    py::class_<Classification>(m, "Classification")
        .def_property_readonly("verdict",
                               [](const Classification& c) { return to_string(c.verdict); })
        .def_readonly("theorem_case", &Classification::theorem_case)
        .def_readonly("bound_T", &Classification::bound_T)
        .def_readonly("t_est", &Classification::t_est)
        .def_readonly("t_est_conservative", &Classification::t_est_conservative)
        .def_readonly("note", &Classification::note);
    m.def("classify", &classify, py::arg("params"), py::arg("init"), py::arg("horizon") = 10.0);

    // residual
    m.def("residual_mass_exact",
          [](const EmdenState& st, const std::vector<double>& x, const ModelParams& p) {
              return residual_mass_exact(st, x, p);
          });
    m.def(
        "residual_momentum_exact",
        [](const EmdenState& st, const std::vector<double>& accel, const std::vector<double>& x,
           const ModelParams& p, bool verify_accel) {
            return residual_momentum_exact(st, accel, x, p, verify_accel);
        },
        py::arg("state"), py::arg("accel"), py::arg("x"), py::arg("params"),
        py::arg("verify_accel") = true);
    m.def("fit_convergence_order",
          [](const std::vector<double>& h, const std::vector<double>& r) {
              const OrderFit f = fit_convergence_order(h, r);
              return py::make_tuple(f.order, f.exact_zero);
          });

    // finite-volume cross-check
    py::class_<FvLevelResult>(m, "FvLevelResult")
        .def_readonly("cells", &FvLevelResult::cells)
        .def_readonly("l1_rho", &FvLevelResult::l1_rho)
        .def_readonly("l2_rho", &FvLevelResult::l2_rho)
        .def_readonly("linf_rho", &FvLevelResult::linf_rho)
        .def_readonly("l1_u", &FvLevelResult::l1_u)
        .def_readonly("steps", &FvLevelResult::steps);
    py::class_<FvRunReport>(m, "FvRunReport")
        .def_readonly("t_end", &FvRunReport::t_end)
        .def_readonly("levels", &FvRunReport::levels)
        .def_readonly("order_l1_rho", &FvRunReport::order_l1_rho)
        .def_readonly("fitted_order_l1_rho", &FvRunReport::fitted_order_l1_rho)
        .def_readonly("failed", &FvRunReport::failed)
        .def_readonly("failure", &FvRunReport::failure);
    m.def(
        "fv_run",
        [](const ModelParams& params, const EmdenState& state0, std::vector<double> lo,
           std::vector<double> hi, std::vector<int> levels, double cfl, double t_end,
           const std::string& ghost, bool muscl, double rho_floor) {
            FvRunConfig cfg;
            cfg.params = params;
            cfg.state0 = state0;
            cfg.grid.dims = params.n;
            if (lo.size() != static_cast<size_t>(params.n) || hi.size() != lo.size())
                throw input_error("fv_run: lo/hi must have one entry per dimension");
            for (size_t i = 0; i < lo.size(); ++i) {
                cfg.grid.lo[i] = lo[i];
                cfg.grid.hi[i] = hi[i];
            }
            cfg.grid.rho_floor = rho_floor;
            cfg.levels = std::move(levels);
            cfg.cfl = cfl;
            cfg.t_end = t_end;
            cfg.ghosts = ghost == "periodic" ? GhostPolicy::Periodic : GhostPolicy::Exact;
            cfg.muscl = muscl;
            return fv_run(cfg);
        },
        py::arg("params"), py::arg("state0"), py::arg("lo"), py::arg("hi"), py::arg("levels"),
        py::arg("cfl") = 0.45, py::arg("t_end") = 0.3, py::arg("ghost") = "exact",
        py::arg("muscl") = true, py::arg("rho_floor") = 1e-10);

    // config-driven commands (CSV text out)
    auto run_command = [](int (*fn)(const RunConfig&, std::ostream&), const std::string& text) {
        const RunConfig cfg = RunConfig::parse_string(text);
        std::ostringstream out;
        fn(cfg, out);
        return out.str();
    };
    m.def("run_integrate", [=](const std::string& t) { return run_command(&cmd_integrate, t); });
    m.def("run_classify_sweep",
          [=](const std::string& t) { return run_command(&cmd_classify_sweep, t); });
    m.def("run_field", [=](const std::string& t) { return run_command(&cmd_field, t); });
    m.def("run_verify_residual",
          [=](const std::string& t) { return run_command(&cmd_verify_residual, t); });
    m.def("run_mass_check", [=](const std::string& t) { return run_command(&cmd_mass_check, t); });
}
