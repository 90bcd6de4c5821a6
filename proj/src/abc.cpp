#include "so3fuzzy/abc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "so3fuzzy/text_format.hpp"

namespace so3fuzzy {

void SearchSpace::enforce(std::span<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::isfinite(x[i]) ? std::clamp(x[i], lower[i], upper[i]) : 0.5 * (lower[i] + upper[i]);
    }
    if (repair) repair(x);
}

bool SearchSpace::contains(std::span<const double> x) const {
    if (x.size() != dimension()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    }
    return true;
}

Position SearchSpace::sample(RandomStream& rng) const {
    Position x(dimension());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(lower[i], upper[i]);
    enforce(x);
    return x;
}

SearchSpace SearchSpace::box(std::size_t dimension, double lo, double hi) {
    return {Position(dimension, lo), Position(dimension, hi), {}};
}

SearchSpace SearchSpace::fuzzy_params() {
    const auto& lo = param_lower_bounds();
    const auto& hi = param_upper_bounds();
    SearchSpace space{Position(lo.begin(), lo.end()), Position(hi.begin(), hi.end()), {}};
    space.repair = [](std::span<double> x) { repair_params(x.first<kFuzzyParamCount>()); };
    return space;
}

void AbcConfig::validate() const {
    if (n_sources < 2) throw std::invalid_argument("ABC needs at least 2 food sources");
    if (abandonment_limit < 1) throw std::invalid_argument("ABC abandonment limit must be >= 1");
}

double fitness(double objective) {
    return objective >= 0.0 ? 1.0 / (1.0 + objective) : 1.0 + std::abs(objective);
}

Position mutate(const FoodSource& source, const FoodSource& partner, const SearchSpace& space, RandomStream& rng,
                StepDistribution step) {
    Position x = source.position;
    const std::size_t j = rng.index(x.size());
    const double a = step == StepDistribution::Symmetric ? rng.uniform(-1.0, 1.0) : rng.uniform(0.0, 1.0);
    x[j] += a * (x[j] - partner.position[j]);
    space.enforce(x);
    return x;
}

std::size_t onlooker_select(std::span<const FoodSource> sources, RandomStream& rng) {
    if (sources.empty()) throw std::invalid_argument("onlooker_select needs at least one source");
    std::vector<double> fit(sources.size());
    std::transform(sources.begin(), sources.end(), fit.begin(), [](const FoodSource& s) { return fitness(s.objective); });
    const bool all_equal = std::all_of(fit.begin(), fit.end(), [&](double f) { return f == fit.front(); });
    if (all_equal) return rng.index(sources.size());

    const double total = std::accumulate(fit.begin(), fit.end(), 0.0);
    const double r = rng.uniform(0.0, total);
    double cumulative = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i) {
        cumulative += fit[i];
        if (r < cumulative) return i;
    }
    return fit.size() - 1;
}

AbcOptimizer::AbcOptimizer(AbcConfig config, SearchSpace space, Objective objective)
    : config_(config), space_(std::move(space)), objective_(std::move(objective)), rng_(config.rng_seed) {
    config_.validate();
    if (space_.dimension() == 0 || space_.upper.size() != space_.dimension()) {
        throw std::invalid_argument("ABC search space bounds are malformed");
    }
}

std::vector<double> AbcOptimizer::evaluate_batch(const std::vector<Position>& candidates) const {
    std::vector<double> out(candidates.size());
    auto evaluate = [&](std::size_t i) {
        const double j = objective_(candidates[i]);
        out[i] = std::isfinite(j) ? j : kDivergedObjective;
    };

    const std::size_t workers = std::min(std::max<std::size_t>(config_.threads, 1), candidates.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i) evaluate(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < candidates.size(); i = next++) {
                try {
                    evaluate(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

void AbcOptimizer::greedy_update(std::size_t index, Position candidate, double objective) {
    FoodSource& s = sources_[index];
    if (objective < s.objective) {
        s.position = std::move(candidate);
        s.objective = objective;
        s.trials = 0;
    } else {
        ++s.trials;
    }
}

std::size_t AbcOptimizer::random_partner(std::size_t index) {
    std::size_t k = rng_.index(sources_.size() - 1);
    return k >= index ? k + 1 : k;
}

void AbcOptimizer::record_iteration() {
    double mean = 0.0;
    for (const auto& s : sources_) {
        mean += s.objective;
        if (best_so_far_.best_position.empty() || s.objective < best_so_far_.best_objective) {
            best_so_far_.best_objective = s.objective;
            best_so_far_.best_position = s.position;
        }
    }
    IterationRecord rec = best_so_far_;
    rec.iteration = iteration_;
    rec.mean_objective = mean / static_cast<double>(sources_.size());
    report_.history.push_back(std::move(rec));
}

void AbcOptimizer::initialize() {
    const std::size_t n = config_.n_sources;
    std::vector<Position> positions;
    positions.reserve(n);
    for (std::size_t i = 0; i < n; ++i) positions.push_back(space_.sample(rng_));
    const auto values = evaluate_batch(positions);
    report_.evaluations += n;

    sources_.clear();
    for (std::size_t i = 0; i < n; ++i) sources_.push_back({std::move(positions[i]), values[i], 0});
    iteration_ = 0;
    best_so_far_ = {};
    report_.history.clear();
    record_iteration();
}

void AbcOptimizer::iterate() {
    if (!initialized()) initialize();
    const std::size_t n = sources_.size();

    // Employed bees.
    std::vector<Position> candidates;
    candidates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = random_partner(i);
        candidates.push_back(mutate(sources_[i], sources_[k], space_, rng_, config_.step));
    }
    auto values = evaluate_batch(candidates);
    report_.evaluations += n;
    for (std::size_t i = 0; i < n; ++i) greedy_update(i, std::move(candidates[i]), values[i]);

    // Onlooker bees, drawn against the colony as the employed phase left it.
    candidates.clear();
    std::vector<std::size_t> targets;
    targets.reserve(n);
    for (std::size_t m = 0; m < n; ++m) {
        const std::size_t i = onlooker_select(sources_, rng_);
        const std::size_t k = random_partner(i);
        targets.push_back(i);
        candidates.push_back(mutate(sources_[i], sources_[k], space_, rng_, config_.step));
    }
    values = evaluate_batch(candidates);
    report_.evaluations += n;
    for (std::size_t m = 0; m < n; ++m) greedy_update(targets[m], std::move(candidates[m]), values[m]);

    // Remember the best before a scout can discard it.
    for (const auto& s : sources_) {
        if (s.objective < best_so_far_.best_objective) {
            best_so_far_.best_objective = s.objective;
            best_so_far_.best_position = s.position;
        }
    }

    // Scout: at most one abandoned source per cycle, the most stagnant.
    const auto worst = std::max_element(sources_.begin(), sources_.end(),
                                        [](const FoodSource& a, const FoodSource& b) { return a.trials < b.trials; });
    if (worst->trials > config_.abandonment_limit) {
        worst->position = space_.sample(rng_);
        worst->objective = evaluate_batch({worst->position}).front();
        worst->trials = 0;
        ++report_.scout_evaluations;
    }

    ++iteration_;
    record_iteration();
}

const AbcReport& AbcOptimizer::run(const std::function<void(const AbcOptimizer&)>& on_checkpoint) {
    if (!initialized()) initialize();
    while (iteration_ < config_.iterations) {
        iterate();
        if (on_checkpoint && config_.checkpoint_interval > 0 && iteration_ % config_.checkpoint_interval == 0) {
            on_checkpoint(*this);
        }
    }
    if (on_checkpoint) on_checkpoint(*this);
    return report_;
}

namespace {

void write_values(std::ostream& os, std::span<const double> xs) {
    for (double x : xs) os << ' ' << format_double(x);
}

Position read_values(std::istringstream& is, std::size_t count) {
    Position out;
    out.reserve(count);
    for (std::string tok; out.size() < count && is >> tok;) out.push_back(parse_number(tok));
    if (out.size() != count) throw std::invalid_argument("ABC state: truncated value list");
    return out;
}

}  // namespace

std::string AbcOptimizer::save_state() const {
    std::ostringstream os;
    os << "abc-state 1\n";
    os << "dimension " << space_.dimension() << "\n";
    os << "sources " << sources_.size() << "\n";
    os << "iteration " << iteration_ << "\n";
    os << "evaluations " << report_.evaluations << "\n";
    os << "scout_evaluations " << report_.scout_evaluations << "\n";
    os << "rng " << rng_.save() << "\n";
    os << "best " << format_double(best_so_far_.best_objective);
    write_values(os, best_so_far_.best_position);
    os << "\n";
    for (const auto& s : sources_) {
        os << "source " << format_double(s.objective) << ' ' << s.trials;
        write_values(os, s.position);
        os << "\n";
    }
    for (const auto& h : report_.history) {
        os << "history " << h.iteration << ' ' << format_double(h.best_objective) << ' '
           << format_double(h.mean_objective);
        write_values(os, h.best_position);
        os << "\n";
    }
    return os.str();
}

void AbcOptimizer::restore_state(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "abc-state 1") {
        throw std::invalid_argument("ABC state: missing 'abc-state 1' header");
    }
    const std::size_t dim = space_.dimension();
    std::vector<FoodSource> sources;
    AbcReport report;
    IterationRecord best;
    std::size_t iteration = 0;
    std::size_t declared_sources = 0;
    std::size_t declared_dim = 0;
    std::string rng_state;

    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string key;
        if (!(is >> key)) continue;
        if (key == "dimension") {
            is >> declared_dim;
        } else if (key == "sources") {
            is >> declared_sources;
        } else if (key == "iteration") {
            is >> iteration;
        } else if (key == "evaluations") {
            is >> report.evaluations;
        } else if (key == "scout_evaluations") {
            is >> report.scout_evaluations;
        } else if (key == "rng") {
            std::getline(is, rng_state);
        } else if (key == "best") {
            std::string tok;
            is >> tok;
            best.best_objective = parse_number(tok);
            best.best_position = read_values(is, dim);
        } else if (key == "source") {
            FoodSource s;
            std::string tok;
            is >> tok >> s.trials;
            s.objective = parse_number(tok);
            s.position = read_values(is, dim);
            sources.push_back(std::move(s));
        } else if (key == "history") {
            IterationRecord h;
            std::string best_tok;
            std::string mean_tok;
            is >> h.iteration >> best_tok >> mean_tok;
            h.best_objective = parse_number(best_tok);
            h.mean_objective = parse_number(mean_tok);
            h.best_position = read_values(is, dim);
            report.history.push_back(std::move(h));
        } else {
            throw std::invalid_argument("ABC state: unknown key '" + key + "'");
        }
    }
    if (declared_dim != dim || declared_sources != config_.n_sources || sources.size() != config_.n_sources) {
        throw std::invalid_argument("ABC state does not match the configured colony size or dimension");
    }
    if (report.history.empty() || rng_state.empty()) throw std::invalid_argument("ABC state: incomplete");

    rng_.restore(rng_state);
    sources_ = std::move(sources);
    report_ = std::move(report);
    best_so_far_ = std::move(best);
    iteration_ = iteration;
}

double window_sum(std::span<const double> errors, double dt, double begin, double end) {
    if (errors.empty()) return 0.0;
    const auto first = static_cast<long long>(std::ceil(begin / dt - 1e-9));
    const auto last = std::min(static_cast<long long>(std::floor(end / dt + 1e-9)),
                               static_cast<long long>(errors.size()) - 1);
    double sum = 0.0;
    for (long long n = std::max(first, 0LL); n <= last; ++n) sum += errors[static_cast<std::size_t>(n)];
    return sum;
}

double objective_from_errors(std::span<const double> errors, double dt, const ObjectiveWindows& windows) {
    return windows.transient_weight * window_sum(errors, dt, windows.transient_begin, windows.transient_end) +
           window_sum(errors, dt, windows.steady_begin, windows.steady_end);
}

double evaluate_objective(std::span<const double> position, const SimScenario& scenario, const ObjectiveSetup& setup) {
    const FuzzyScheduler scheduler(FuzzyParams::from_values(position), setup.rules);
    ClosedLoopOptions options;
    options.filter.gamma = setup.gamma;
    options.filter.gain = ScheduledGain{};
    options.scheduler = &scheduler;
    options.error_source = setup.error_source;
    options.keep_records = false;
    try {
        const auto result = run_closed_loop(scenario, options);
        const double j = objective_from_errors(result.errors, scenario.dt, setup.windows);
        return std::isfinite(j) ? j : kDivergedObjective;
    } catch (const NumericalError&) {
        return kDivergedObjective;
    }
}

}  // namespace so3fuzzy
