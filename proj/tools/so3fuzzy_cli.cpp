// Command-line front end: simulate, optimize, compare.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical
// divergence, 1 anything else (I/O failures).

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "so3fuzzy/filter.hpp"
#include "so3fuzzy/harness.hpp"
#include "so3fuzzy/text_format.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

}  // namespace

int main(int argc, char** argv) {
    using namespace so3fuzzy;

    CLI::App app{"Fuzzy gain-scheduled attitude filter on SO(3)"};
    app.require_subcommand(1);

    std::string config = std::string(kReferencePreset);
    std::uint64_t seed = 0;

    auto* simulate = app.add_subcommand("simulate", "Run one closed-loop simulation and print summary metrics");
    std::string gain_text = "fixed:0";
    std::string params_path;
    std::string sim_out;
    simulate->add_option("--config", config, "Scenario config file, or 'paper_iv_a'")->capture_default_str();
    simulate->add_option("--gain", gain_text, "fixed:<k_op> (K = 1 + k_op) or fuzzy")->capture_default_str();
    simulate->add_option("--params", params_path, "22-value membership record (required for --gain fuzzy)");
    simulate->add_option("--seed", seed, "Noise seed")->capture_default_str();
    simulate->add_option("--out", sim_out, "Per-sample CSV output");

    auto* optimize = app.add_subcommand("optimize", "Tune the membership parameters with the bee colony");
    std::string abc_config;
    std::string opt_out;
    bool resume = false;
    optimize->add_option("--config", config, "Scenario config file, or 'paper_iv_a'")->capture_default_str();
    optimize->add_option("--abc-config", abc_config, "ABC config file (default: 100 sources, 300 cycles)");
    optimize->add_option("--seed", seed, "Seed for the colony and the simulated noise")->capture_default_str();
    optimize->add_option("--out", opt_out, "Output directory")->required();
    optimize->add_flag("--resume", resume, "Continue from <out>/colony.state if present");

    auto* compare = app.add_subcommand("compare", "Fixed gains against the fuzzy schedule");
    std::string k_list_text = "0,9,49";
    std::string cmp_params;
    std::string cmp_out;
    compare->add_option("--config", config, "Scenario config file, or 'paper_iv_a'")->capture_default_str();
    compare->add_option("--params", cmp_params, "22-value membership record")->required();
    compare->add_option("--k-list", k_list_text, "Comma-separated fixed k_op values")->capture_default_str();
    compare->add_option("--seed", seed, "Noise seed")->capture_default_str();
    compare->add_option("--out", cmp_out, "CSV output for the table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*simulate) {
            SimulateOptions opt;
            opt.config = config;
            opt.gain = parse_gain_mode(gain_text);
            if (!params_path.empty()) opt.params_path = params_path;
            opt.seed = seed;
            if (!sim_out.empty()) opt.out = sim_out;
            const SimulateResult result = cmd_simulate(opt);
            std::cout << format_summary(result.summary);
        } else if (*optimize) {
            OptimizeOptions opt;
            opt.config = config;
            opt.abc_config = abc_config;
            opt.seed = seed;
            opt.out_dir = opt_out;
            opt.resume = resume;
            opt.threads = worker_count_from_env();
            const FuzzyParams best = cmd_optimize(opt);
            std::cout << best.to_record();
        } else if (*compare) {
            CompareOptions opt;
            opt.config = config;
            opt.params_path = cmp_params;
            try {
                opt.k_list = parse_number_list(k_list_text);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("--k-list: ") + e.what());
            }
            opt.seed = seed;
            if (!cmp_out.empty()) opt.out = cmp_out;
            write_compare_csv(std::cout, cmd_compare(opt));
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
