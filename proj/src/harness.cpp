#include "so3fuzzy/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "so3fuzzy/text_format.hpp"

namespace so3fuzzy {

namespace {

class KeyValues {
public:
    static KeyValues parse(std::string_view text) {
        KeyValues kv;
        std::istringstream in{std::string(text)};
        std::size_t line_no = 0;
        for (std::string raw; std::getline(in, raw);) {
            ++line_no;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            const std::string_view line = trim(raw);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
            const std::string key(trim(line.substr(0, eq)));
            if (key.empty()) throw ConfigError("empty key", line_no);
            const auto [it, inserted] = kv.entries_.try_emplace(key, Entry{std::string(trim(line.substr(eq + 1))), line_no});
            if (!inserted) {
                throw ConfigError("duplicate key '" + key + "' (first on line " + std::to_string(it->second.line) + ")",
                                  line_no);
            }
        }
        return kv;
    }

    std::optional<double> number(const std::string& key) {
        const Entry* e = take(key);
        if (e == nullptr) return std::nullopt;
        try {
            return parse_number(e->value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(key + ": " + ex.what(), e->line);
        }
    }

    std::optional<std::size_t> count(const std::string& key) {
        const Entry* e = take(key);
        if (e == nullptr) return std::nullopt;
        double v = 0.0;
        try {
            v = parse_number(e->value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(key + ": " + ex.what(), e->line);
        }
        if (v < 0.0 || v != std::floor(v) || v > 1e12) {
            throw ConfigError(key + " must be a non-negative integer", e->line);
        }
        return static_cast<std::size_t>(v);
    }

    std::optional<std::vector<double>> list(const std::string& key, std::size_t expected) {
        const Entry* e = take(key);
        if (e == nullptr) return std::nullopt;
        std::vector<double> v;
        try {
            v = parse_number_list(e->value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(key + ": " + ex.what(), e->line);
        }
        if (v.size() != expected) {
            throw ConfigError(key + ": expected " + std::to_string(expected) + " values, got " + std::to_string(v.size()),
                              e->line);
        }
        return v;
    }

    std::optional<Vec3> vec3(const std::string& key) {
        auto v = list(key, 3);
        if (!v) return std::nullopt;
        return Vec3{(*v)[0], (*v)[1], (*v)[2]};
    }

    std::optional<std::string> word(const std::string& key) {
        const Entry* e = take(key);
        if (e == nullptr) return std::nullopt;
        return e->value;
    }

    std::size_t line_of(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        for (const auto& [k, _] : entries_) out.push_back(k);
        return out;
    }

    void reject_unused() const {
        const Entry* first = nullptr;
        std::string first_key;
        for (const auto& [k, e] : entries_) {
            if (!e.used && (first == nullptr || e.line < first->line)) {
                first = &e;
                first_key = k;
            }
        }
        if (first != nullptr) throw ConfigError("unknown key '" + first_key + "'", first->line);
    }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        bool used = false;
    };

    const Entry* take(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    std::map<std::string, Entry> entries_;
};

Matrix3 to_matrix(const std::vector<double>& v) {
    std::array<double, 9> a{};
    std::copy_n(v.begin(), 9, a.begin());
    return Matrix3(a);
}

RotationMatrix rotation_key(KeyValues& kv, const std::string& key, const RotationMatrix& fallback) {
    const auto v = kv.list(key, 9);
    if (!v) return fallback;
    const Matrix3 m = to_matrix(*v);
    try {
        // Exact rotations are kept bit-for-bit so written configs read back unchanged.
        if (orthonormality_defect(m) <= 1e-12 && m.determinant() > 0.0) return RotationMatrix::from_matrix(m);
        return project_to_so3(m);
    } catch (const std::domain_error& ex) {
        throw ConfigError(key + ": " + ex.what(), kv.line_of(key));
    }
}

std::string vec_text(const Vec3& v) { return format_list({v.x, v.y, v.z}); }

std::string matrix_text(const Matrix3& m) {
    return format_list(std::vector<double>(m.data().begin(), m.data().end()));
}

// Samples n with begin <= n dt <= end, clipped to the trace.
std::pair<std::size_t, std::size_t> window_indices(std::size_t size, double dt, double begin, double end) {
    const auto first = static_cast<long long>(std::ceil(begin / dt - 1e-9));
    const auto last = std::min(static_cast<long long>(std::floor(end / dt + 1e-9)), static_cast<long long>(size) - 1);
    const auto lo = static_cast<std::size_t>(std::max(first, 0LL));
    const auto hi = last < 0 ? 0 : static_cast<std::size_t>(last) + 1;
    return {lo, std::max(lo, hi)};
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view text) {
    KeyValues kv = KeyValues::parse(text);
    ScenarioConfig cfg;
    SimScenario& s = cfg.scenario;

    if (auto v = kv.number("dt")) s.dt = *v;
    if (auto v = kv.number("duration")) s.duration = *v;
    if (auto v = kv.vec3("omega.amplitude")) s.angular_rate.amplitude = *v;
    if (auto v = kv.vec3("omega.frequency")) s.angular_rate.frequency = *v;
    if (auto v = kv.vec3("omega.phase")) s.angular_rate.phase = *v;
    if (auto v = kv.vec3("gyro.bias")) s.gyro.bias = *v;
    if (auto v = kv.number("gyro.noise_std")) s.gyro.noise_std = *v;

    // Observations are numbered from 1 and replace the defaults as a whole.
    std::size_t max_index = 0;
    for (const auto& key : kv.keys()) {
        if (key.rfind("observation", 0) != 0) continue;
        const auto dot = key.find('.');
        const std::string digits = key.substr(11, dot == std::string::npos ? std::string::npos : dot - 11);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            throw ConfigError("malformed observation key '" + key + "'", kv.line_of(key));
        }
        max_index = std::max<std::size_t>(max_index, std::stoul(digits));
    }
    if (max_index > 0) {
        s.observations.clear();
        for (std::size_t i = 1; i <= max_index; ++i) {
            const std::string prefix = "observation" + std::to_string(i) + ".";
            const auto direction = kv.vec3(prefix + "direction");
            if (!direction) throw ConfigError("missing " + prefix + "direction");
            const Vec3 bias = kv.vec3(prefix + "bias").value_or(Vec3{});
            const double noise = kv.number(prefix + "noise_std").value_or(0.0);
            const double confidence = kv.number(prefix + "confidence").value_or(1.0);
            try {
                s.observations.push_back(InertialObservation::make(*direction, bias, noise, confidence));
            } catch (const std::exception& ex) {
                throw ConfigError(prefix + ": " + ex.what(), kv.line_of(prefix + "direction"));
            }
        }
    }

    if (auto w = kv.word("derived_third_vector")) {
        if (*w == "true") {
            s.derived_third_vector = true;
        } else if (*w == "false") {
            s.derived_third_vector = false;
        } else {
            throw ConfigError("derived_third_vector must be true or false", kv.line_of("derived_third_vector"));
        }
    }
    if (auto v = kv.number("derived_confidence")) s.derived_confidence = *v;
    s.initial_true_attitude = rotation_key(kv, "initial_true_attitude", s.initial_true_attitude);
    s.initial_estimate = rotation_key(kv, "initial_estimate", s.initial_estimate);

    if (auto v = kv.number("filter.gamma")) cfg.gamma = *v;
    if (auto w = kv.word("filter.error_source")) {
        if (*w == "truth") {
            cfg.error_source = ErrorSource::Truth;
        } else if (*w == "innovation") {
            cfg.error_source = ErrorSource::Innovation;
        } else {
            throw ConfigError("filter.error_source must be truth or innovation", kv.line_of("filter.error_source"));
        }
    }
    kv.reject_unused();

    try {
        s.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("invalid scenario: ") + ex.what());
    }
    if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) throw ConfigError("filter.gamma must be > 0");
    return cfg;
}

std::string format_scenario_config(const ScenarioConfig& config) {
    const SimScenario& s = config.scenario;
    std::ostringstream os;
    os << "dt = " << format_double(s.dt) << "\n";
    os << "duration = " << format_double(s.duration) << "\n";
    os << "omega.amplitude = " << vec_text(s.angular_rate.amplitude) << "\n";
    os << "omega.frequency = " << vec_text(s.angular_rate.frequency) << "\n";
    os << "omega.phase = " << vec_text(s.angular_rate.phase) << "\n";
    os << "gyro.bias = " << vec_text(s.gyro.bias) << "\n";
    os << "gyro.noise_std = " << format_double(s.gyro.noise_std) << "\n";
    for (std::size_t i = 0; i < s.observations.size(); ++i) {
        const auto& o = s.observations[i];
        const std::string p = "observation" + std::to_string(i + 1) + ".";
        os << p << "direction = " << vec_text(o.direction) << "\n";
        os << p << "bias = " << vec_text(o.bias) << "\n";
        os << p << "noise_std = " << format_double(o.noise_std) << "\n";
        os << p << "confidence = " << format_double(o.confidence) << "\n";
    }
    os << "derived_third_vector = " << (s.derived_third_vector ? "true" : "false") << "\n";
    os << "derived_confidence = " << format_double(s.derived_confidence) << "\n";
    os << "initial_true_attitude = " << matrix_text(s.initial_true_attitude.matrix()) << "\n";
    os << "initial_estimate = " << matrix_text(s.initial_estimate.matrix()) << "\n";
    os << "filter.gamma = " << format_double(config.gamma) << "\n";
    os << "filter.error_source = " << (config.error_source == ErrorSource::Truth ? "truth" : "innovation") << "\n";
    return os.str();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

ScenarioConfig load_scenario_config(const std::string& path) {
    if (path == kReferencePreset) return ScenarioConfig{};
    try {
        return parse_scenario_config(read_file(path));
    } catch (const ConfigError& ex) {
        throw ConfigError(path + ": " + ex.what());
    }
}

AbcRunConfig parse_abc_config(std::string_view text) {
    KeyValues kv = KeyValues::parse(text);
    AbcRunConfig cfg;
    if (auto v = kv.count("n_sources")) cfg.abc.n_sources = *v;
    if (auto v = kv.count("iterations")) cfg.abc.iterations = *v;
    if (auto v = kv.count("abandonment_limit")) cfg.abc.abandonment_limit = *v;
    if (auto v = kv.count("checkpoint_interval")) cfg.abc.checkpoint_interval = *v;
    if (auto w = kv.word("step")) {
        if (*w == "symmetric") {
            cfg.abc.step = StepDistribution::Symmetric;
        } else if (*w == "unit") {
            cfg.abc.step = StepDistribution::Unit;
        } else {
            throw ConfigError("step must be symmetric or unit", kv.line_of("step"));
        }
    }
    if (auto v = kv.list("transient_window", 2)) {
        cfg.windows.transient_begin = (*v)[0];
        cfg.windows.transient_end = (*v)[1];
    }
    if (auto v = kv.list("steady_window", 2)) {
        cfg.windows.steady_begin = (*v)[0];
        cfg.windows.steady_end = (*v)[1];
    }
    if (auto v = kv.number("transient_weight")) cfg.windows.transient_weight = *v;
    kv.reject_unused();

    try {
        cfg.abc.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    if (cfg.windows.transient_begin > cfg.windows.transient_end || cfg.windows.steady_begin > cfg.windows.steady_end) {
        throw ConfigError("objective windows must satisfy begin <= end");
    }
    return cfg;
}

std::string format_abc_config(const AbcRunConfig& config) {
    std::ostringstream os;
    os << "n_sources = " << config.abc.n_sources << "\n";
    os << "iterations = " << config.abc.iterations << "\n";
    os << "abandonment_limit = " << config.abc.abandonment_limit << "\n";
    os << "checkpoint_interval = " << config.abc.checkpoint_interval << "\n";
    os << "step = " << (config.abc.step == StepDistribution::Symmetric ? "symmetric" : "unit") << "\n";
    os << "transient_window = " << format_list({config.windows.transient_begin, config.windows.transient_end}) << "\n";
    os << "steady_window = " << format_list({config.windows.steady_begin, config.windows.steady_end}) << "\n";
    os << "transient_weight = " << format_double(config.windows.transient_weight) << "\n";
    return os.str();
}

AbcRunConfig load_abc_config(const std::string& path) {
    if (path.empty()) return AbcRunConfig{};
    try {
        return parse_abc_config(read_file(path));
    } catch (const ConfigError& ex) {
        throw ConfigError(path + ": " + ex.what());
    }
}

FuzzyParams load_params(const std::string& path) {
    const std::string text = read_file(path);
    try {
        // A checkpoint file carries the record under `best = ...`.
        bool key_value = false;
        std::istringstream lines(text);
        for (std::string line; std::getline(lines, line);) {
            key_value = key_value || line.substr(0, line.find('#')).find('=') != std::string::npos;
        }
        if (key_value) {
            KeyValues kv = KeyValues::parse(text);
            const auto best = kv.word("best");
            if (!best) throw ConfigError("no 'best' entry in checkpoint");
            return FuzzyParams::from_record(*best);
        }
        return FuzzyParams::from_record(text);
    } catch (const ConfigError& ex) {
        throw ConfigError(path + ": " + ex.what());
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(path + ": " + ex.what());
    }
}

SummaryMetrics compute_summary(std::span<const double> errors, double dt, const ObjectiveWindows& windows,
                               double threshold) {
    SummaryMetrics m;
    if (errors.empty()) return m;

    std::size_t settle_index = 0;
    for (std::size_t i = errors.size(); i-- > 0;) {
        if (!(errors[i] < threshold)) {
            settle_index = i + 1;
            break;
        }
    }
    if (settle_index < errors.size()) m.settling_time = static_cast<double>(settle_index) * dt;

    const auto [lo, hi] = window_indices(errors.size(), dt, windows.steady_begin, windows.steady_end);
    if (hi > lo) {
        const double n = static_cast<double>(hi - lo);
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += errors[i];
        m.steady_mean = sum / n;
        double sq = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sq += (errors[i] - m.steady_mean) * (errors[i] - m.steady_mean);
        m.steady_std = std::sqrt(sq / n);
    }
    m.objective = objective_from_errors(errors, dt, windows);
    return m;
}

std::string format_summary(const SummaryMetrics& m) {
    std::ostringstream os;
    os << "settling_time = " << (m.settling_time ? format_double(*m.settling_time) : "unsettled") << "\n";
    os << "steady_mean = " << format_double(m.steady_mean) << "\n";
    os << "steady_std = " << format_double(m.steady_std) << "\n";
    os << "J = " << format_double(m.objective) << "\n";
    return os.str();
}

void write_run_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "t,error,gain,roll_true,pitch_true,yaw_true,roll_est,pitch_est,yaw_est,bias_x,bias_y,bias_z,"
          "bias_error_norm\n";
    for (const auto& r : records) {
        const double fields[] = {r.t,
                                 r.error,
                                 r.gain,
                                 r.euler_true.roll,
                                 r.euler_true.pitch,
                                 r.euler_true.yaw,
                                 r.euler_est.roll,
                                 r.euler_est.pitch,
                                 r.euler_est.yaw,
                                 r.bias_est.x,
                                 r.bias_est.y,
                                 r.bias_est.z,
                                 r.bias_error_norm};
        for (std::size_t i = 0; i < std::size(fields); ++i) os << (i ? "," : "") << format_double(fields[i]);
        os << "\n";
    }
}

void write_convergence_csv(std::ostream& os, const AbcReport& report) {
    os << "iteration,best_J,mean_J\n";
    for (const auto& h : report.history) {
        if (h.iteration == 0) continue;
        os << h.iteration << "," << format_double(h.best_objective) << "," << format_double(h.mean_objective) << "\n";
    }
}

GainMode parse_gain_mode(std::string_view text) {
    if (text == "fuzzy") return ScheduledGain{};
    if (text.rfind("fixed:", 0) == 0) {
        double k = 0.0;
        try {
            k = parse_number(text.substr(6));
        } catch (const std::invalid_argument&) {
            throw ConfigError("--gain: bad fixed gain '" + std::string(text) + "'");
        }
        if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("--gain: fixed k_op must be >= 0");
        return FixedGain{k};
    }
    throw ConfigError("--gain must be 'fixed:<k_op>' or 'fuzzy'");
}

SimulateResult cmd_simulate(const SimulateOptions& options) {
    ScenarioConfig cfg = load_scenario_config(options.config);
    cfg.scenario.rng_seed = options.seed;

    std::optional<FuzzyScheduler> scheduler;
    if (std::holds_alternative<ScheduledGain>(options.gain)) {
        if (!options.params_path) throw ConfigError("--gain fuzzy requires --params");
        scheduler.emplace(load_params(*options.params_path), RuleBase::reference());
    }

    ClosedLoopOptions loop;
    loop.filter.gamma = cfg.gamma;
    loop.filter.gain = options.gain;
    loop.scheduler = scheduler ? &*scheduler : nullptr;
    loop.error_source = cfg.error_source;
    const ClosedLoopResult run = run_closed_loop(cfg.scenario, loop);

    SimulateResult result;
    result.summary = compute_summary(run.errors, cfg.scenario.dt);
    result.records = run.records;
    if (options.out) {
        std::ostringstream csv;
        write_run_csv(csv, result.records);
        write_file_atomically(*options.out, csv.str());
    }
    return result;
}

namespace {

std::string checkpoint_text(const AbcOptimizer& opt) {
    const IterationRecord& best = opt.report().best();
    std::ostringstream os;
    os << "iteration = " << opt.iteration() << "\n";
    os << "best_J = " << format_double(best.best_objective) << "\n";
    os << "best = " << format_list(best.best_position) << "\n";
    return os.str();
}

void write_optimizer_outputs(const AbcOptimizer& opt, const std::filesystem::path& dir) {
    write_file_atomically(dir / "colony.state", opt.save_state());
    write_file_atomically(dir / "checkpoint.txt", checkpoint_text(opt));
    std::ostringstream log;
    write_convergence_csv(log, opt.report());
    write_file_atomically(dir / "convergence.csv", log.str());
}

}  // namespace

FuzzyParams cmd_optimize(const OptimizeOptions& options) {
    ScenarioConfig cfg = load_scenario_config(options.config);
    AbcRunConfig abc = load_abc_config(options.abc_config);
    cfg.scenario.rng_seed = options.seed;
    abc.abc.rng_seed = options.seed;
    abc.abc.threads = std::max<std::size_t>(options.threads, 1);
    if (options.out_dir.empty()) throw ConfigError("--out directory is required");
    std::filesystem::create_directories(options.out_dir);

    ObjectiveSetup setup;
    setup.gamma = cfg.gamma;
    setup.error_source = cfg.error_source;
    setup.windows = abc.windows;
    const SimScenario scenario = cfg.scenario;

    AbcOptimizer optimizer(abc.abc, SearchSpace::fuzzy_params(),
                           [&](std::span<const double> x) { return evaluate_objective(x, scenario, setup); });

    const auto state_path = options.out_dir / "colony.state";
    if (options.resume && std::filesystem::exists(state_path)) {
        try {
            optimizer.restore_state(read_file(state_path));
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(state_path.string() + ": " + ex.what());
        }
    }

    optimizer.run([&](const AbcOptimizer& opt) { write_optimizer_outputs(opt, options.out_dir); });

    const FuzzyParams best = FuzzyParams::from_values(optimizer.report().best().best_position);
    write_file_atomically(options.out_dir / "params.txt", best.to_record());
    return best;
}

std::vector<CompareRow> cmd_compare(const CompareOptions& options) {
    ScenarioConfig cfg = load_scenario_config(options.config);
    cfg.scenario.rng_seed = options.seed;
    if (options.params_path.empty()) throw ConfigError("--params is required for compare");
    const FuzzyScheduler scheduler(load_params(options.params_path), RuleBase::reference());

    ClosedLoopOptions loop;
    loop.filter.gamma = cfg.gamma;
    loop.error_source = cfg.error_source;
    loop.keep_records = false;

    std::vector<CompareRow> rows;
    for (double k : options.k_list) {
        if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("fixed k_op values must be >= 0");
        loop.filter.gain = FixedGain{k};
        loop.scheduler = nullptr;
        const auto run = run_closed_loop(cfg.scenario, loop);
        rows.push_back({"fixed:" + format_double(k), k, compute_summary(run.errors, cfg.scenario.dt)});
    }
    loop.filter.gain = ScheduledGain{};
    loop.scheduler = &scheduler;
    const auto run = run_closed_loop(cfg.scenario, loop);
    rows.push_back({"fuzzy", std::nan(""), compute_summary(run.errors, cfg.scenario.dt)});

    if (options.out) {
        std::ostringstream csv;
        write_compare_csv(csv, rows);
        write_file_atomically(*options.out, csv.str());
    }
    return rows;
}

void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows) {
    os << "label,k_op,settling_time,steady_mean,steady_std,J\n";
    for (const auto& r : rows) {
        os << r.label << "," << (std::isnan(r.k_op) ? "" : format_double(r.k_op)) << ","
           << (r.summary.settling_time ? format_double(*r.summary.settling_time) : "unsettled") << ","
           << format_double(r.summary.steady_mean) << "," << format_double(r.summary.steady_std) << ","
           << format_double(r.summary.objective) << "\n";
    }
}

std::size_t worker_count_from_env() {
    if (const char* env = std::getenv("SO3_FUZZY_THREADS")) {
        try {
            const double v = parse_number(env);
            if (v >= 1.0 && v == std::floor(v)) return static_cast<std::size_t>(v);
        } catch (const std::invalid_argument&) {
        }
        throw ConfigError("SO3_FUZZY_THREADS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace so3fuzzy
