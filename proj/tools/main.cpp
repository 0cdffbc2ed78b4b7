#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "ellipflow/commands.hpp"

namespace {

struct SubArgs {
    std::string config_path;
    std::string out_path;
    int threads = 0;  // 0 = take from config
};

int dispatch(const std::string& name, const SubArgs& args) {
    using namespace ellipflow;
    RunConfig cfg = RunConfig::parse_file(args.config_path);
    if (args.threads > 0) cfg.threads = args.threads;
    const std::string out_path = !args.out_path.empty() ? args.out_path : cfg.out;

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw config_error("cannot open output file: " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    if (name == "integrate") return cmd_integrate(cfg, out);
    if (name == "classify-sweep") return cmd_classify_sweep(cfg, out);
    if (name == "field") return cmd_field(cfg, out);
    if (name == "verify-residual") return cmd_verify_residual(cfg, out);
    if (name == "mass-check") return cmd_mass_check(cfg, out);
    if (name == "crosscheck") return cmd_crosscheck(cfg, out, out_path);
    throw std::logic_error("unknown subcommand " + name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact ellipsoidal solutions of the compressible Euler/Navier-Stokes system:\n"
                 "scale-factor dynamics, blowup classification, residual verification and a\n"
                 "finite-volume cross-check"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"integrate", "Integrate the scale-factor system and write the trajectory CSV"},
        {"classify-sweep", "Classify blowup/global behavior over a (gamma, xi) grid"},
        {"field", "Sample the exact density/velocity fields on a grid"},
        {"verify-residual", "Closed-form and finite-difference residuals of the system"},
        {"mass-check", "Quadrature total mass along a trajectory"},
        {"crosscheck", "Finite-volume convergence study against the exact solution"},
    };

    std::vector<std::unique_ptr<SubArgs>> arg_blocks;
    for (const auto& [name, desc] : subs) {
        auto* sub = app.add_subcommand(name, desc);
        auto args = std::make_unique<SubArgs>();
        sub->add_option("--config", args->config_path, "Run configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", args->out_path, "Output CSV path (default: stdout or [run] out)");
        sub->add_option("--threads", args->threads, "Worker threads for sweeps and point batches")
            ->check(CLI::PositiveNumber);
        arg_blocks.push_back(std::move(args));
    }

    CLI11_PARSE(app, argc, argv);

    const auto* chosen = app.get_subcommands().front();
    const size_t idx = [&] {
        for (size_t i = 0; i < subs.size(); ++i)
            if (subs[i].first == chosen->get_name()) return i;
        return size_t{0};
    }();

    try {
        return dispatch(chosen->get_name(), *arg_blocks[idx]);
    } catch (const ellipflow::unsupported_regime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const ellipflow::breakdown_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ellipflow::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ellipflow::boundary_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
