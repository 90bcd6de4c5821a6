#pragma once

/**
 * @file harness.hpp
 * @brief Config files, run metrics, CSV writers and the three CLI commands.
 *
 * Config files are flat `key = value` text, one entry per line, `#` starts
 * a comment. Vectors and matrices are comma-separated lists (matrices
 * row-major). Unknown keys are rejected with the offending line number.
 *
 * Scenario keys:
 *   dt, duration                          seconds
 *   omega.amplitude / .frequency / .phase rad/s, rad/s, rad (3 values each)
 *   gyro.bias (rad/s, 3 values), gyro.noise_std (rad/s)
 *   observation<N>.direction / .bias      3 values each, N = 1, 2, ...
 *   observation<N>.noise_std / .confidence
 *   derived_third_vector                  true | false
 *   derived_confidence
 *   initial_true_attitude, initial_estimate   9 values, projected onto SO(3)
 *   filter.gamma
 *   filter.error_source                   truth | innovation
 *
 * ABC keys:
 *   n_sources, iterations, abandonment_limit, checkpoint_interval
 *   step                                  symmetric | unit
 *   transient_window, steady_window       two values each, seconds
 *   transient_weight
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "so3fuzzy/abc.hpp"
#include "so3fuzzy/closed_loop.hpp"
#include "so3fuzzy/fuzzy.hpp"
#include "so3fuzzy/signal_sim.hpp"

namespace so3fuzzy {

/// Malformed or inconsistent configuration. `line` is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, std::size_t line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct ScenarioConfig {
    SimScenario scenario = SimScenario::paper_iv_a();
    double gamma = 1.0;
    ErrorSource error_source = ErrorSource::Truth;
};

/// Name of the built-in reference scenario accepted wherever a scenario
/// config path is expected.
inline constexpr std::string_view kReferencePreset = "paper_iv_a";

ScenarioConfig parse_scenario_config(std::string_view text);
std::string format_scenario_config(const ScenarioConfig& config);
/// Loads `path`, or the built-in preset when `path` is kReferencePreset.
ScenarioConfig load_scenario_config(const std::string& path);

struct AbcRunConfig {
    AbcConfig abc;
    ObjectiveWindows windows;
};

AbcRunConfig parse_abc_config(std::string_view text);
std::string format_abc_config(const AbcRunConfig& config);
AbcRunConfig load_abc_config(const std::string& path);

FuzzyParams load_params(const std::string& path);

struct SummaryMetrics {
    std::optional<double> settling_time;  // empty when never settled
    double steady_mean = 0.0;
    double steady_std = 0.0;
    double objective = 0.0;
};

inline constexpr double kSettlingThreshold = 0.05;

/// Settling time is the first sample time after which every error stays
/// below `threshold`. Steady statistics use the objective's steady window.
SummaryMetrics compute_summary(std::span<const double> errors, double dt, const ObjectiveWindows& windows = {},
                               double threshold = kSettlingThreshold);

std::string format_summary(const SummaryMetrics& m);

/// Header: t,error,gain,roll_true,pitch_true,yaw_true,roll_est,pitch_est,
/// yaw_est,bias_x,bias_y,bias_z,bias_error_norm
void write_run_csv(std::ostream& os, const std::vector<RunRecord>& records);

/// Header: iteration,best_J,mean_J. One row per cycle (initial colony excluded).
void write_convergence_csv(std::ostream& os, const AbcReport& report);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// `fixed:<k_op>` or `fuzzy`.
GainMode parse_gain_mode(std::string_view text);

struct SimulateOptions {
    std::string config = std::string(kReferencePreset);
    GainMode gain = FixedGain{0.0};
    std::optional<std::string> params_path;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out;
};

struct SimulateResult {
    SummaryMetrics summary;
    std::vector<RunRecord> records;
};

/// Throws ConfigError (bad input) or NumericalError (divergence).
SimulateResult cmd_simulate(const SimulateOptions& options);

struct OptimizeOptions {
    std::string config = std::string(kReferencePreset);
    std::string abc_config;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    bool resume = false;
    std::size_t threads = 1;
};

/// Writes out_dir/convergence.csv, out_dir/checkpoint.txt (iteration, best_J
/// and best record), out_dir/colony.state (full resumable state) and
/// out_dir/params.txt (final record).
FuzzyParams cmd_optimize(const OptimizeOptions& options);

struct CompareOptions {
    std::string config = std::string(kReferencePreset);
    std::string params_path;
    std::vector<double> k_list;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out;
};

struct CompareRow {
    std::string label;  // "fixed:<k>" or "fuzzy"
    double k_op = 0.0;  // NaN for the fuzzy row
    SummaryMetrics summary;
};

/// One row per fixed k_op, then the fuzzy row.
std::vector<CompareRow> cmd_compare(const CompareOptions& options);

void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows);

/// Worker count from SO3_FUZZY_THREADS, else hardware concurrency (>= 1).
std::size_t worker_count_from_env();

}  // namespace so3fuzzy
