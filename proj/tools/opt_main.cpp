#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "optctl/harness.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_dir,
            const std::optional<std::uint64_t>& seed) {
    optctl::ExperimentConfig cfg = optctl::load_config(config_path, seed);
    if (out_dir) cfg.output_dir = *out_dir;

    const optctl::ExperimentResult result = optctl::execute(cfg);
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        const optctl::RateReport& r = result.reports[i];
        for (const std::string& w : r.warnings)
            std::cerr << r.run_id << ": warning: " << w << '\n';
        std::cout << r.run_id << ": stop=" << optctl::stop_code_name(r.stop.code)
                  << " iterations=" << r.iterations << " final_grad=" << r.final_grad_norm
                  << " class=" << optctl::rate_class_name(r.classification.label) << '\n';
    }
    std::cout << "summary: " << result.summary_path.string() << '\n';
    return result.all_stopped_by_tolerance ? 0 : 2;
}

int cmd_verify_ocp(std::uint64_t seed, int trials) {
    const optctl::OcpVerification v = optctl::verify_ocp(seed, trials, &std::cout);
    return v.passed ? 0 : 3;
}

int cmd_list() {
    std::cout << "problems:\n";
    for (const std::string& name : optctl::problem_names()) std::cout << "  " << name << '\n';
    std::cout << "algorithms:\n";
    for (const optctl::Algorithm a :
         {optctl::Algorithm::GradientDescent, optctl::Algorithm::Newton,
          optctl::Algorithm::FiniteHorizonBackward, optctl::Algorithm::AlgI,
          optctl::Algorithm::AlgIIClosed, optctl::Algorithm::AlgIIRecursive,
          optctl::Algorithm::AlgIII, optctl::Algorithm::AlgIV})
        std::cout << "  " << optctl::algorithm_name(a) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"opt — superlinear optimizer benchmark harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment config");
    run_cmd->add_option("--config", config_path, "JSON experiment description")->required();
    run_cmd->add_option("--out", out_dir, "output directory (overrides the config)");
    run_cmd->add_option("--seed", seed, "seed override for randomized problems");

    std::uint64_t ocp_seed = 0;
    int trials = 100;
    CLI::App* verify_cmd =
        app.add_subcommand("verify-ocp", "cross-check the exact LQ solver against brute force");
    verify_cmd->add_option("--trials", trials, "number of random problems")
        ->check(CLI::NonNegativeNumber);
    verify_cmd->add_option("--seed", ocp_seed, "seed for problem generation");

    app.add_subcommand("list", "list problems and algorithms");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run")) return cmd_run(config_path, out_dir, seed);
        if (app.got_subcommand("verify-ocp")) return cmd_verify_ocp(ocp_seed, trials);
        if (app.got_subcommand("list")) return cmd_list();
    } catch (const optctl::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 1;
    } catch (const optctl::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const optctl::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
