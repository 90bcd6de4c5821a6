#pragma once

/**
 * @file abc.hpp
 * @brief Artificial bee colony optimizer over box-constrained parameters,
 * plus the closed-loop tuning objective for the fuzzy scheduler.
 *
 * One cycle runs three phases:
 *  - employed: every source proposes one single-coordinate move relative to
 *    a random partner and keeps it if it improves (greedy);
 *  - onlooker: N sources are drawn with probability proportional to
 *    fit = 1 / (1 + J) and each proposes one more move;
 *  - scout: the source with the most failed trials, if above the
 *    abandonment limit, is re-seeded uniformly in the box.
 *
 * Candidates of a phase are generated first and evaluated as a batch, so a
 * worker pool can run the objective in parallel while the random stream
 * and the result stay independent of the worker count.
 */

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "so3fuzzy/closed_loop.hpp"
#include "so3fuzzy/fuzzy.hpp"
#include "so3fuzzy/signal_sim.hpp"

namespace so3fuzzy {

/// Objective value assigned to candidates whose simulation diverged.
inline constexpr double kDivergedObjective = 1e6;

using Position = std::vector<double>;
using Objective = std::function<double(std::span<const double>)>;

struct SearchSpace {
    Position lower;
    Position upper;
    /// Applied after clamping, e.g. to restore ordering constraints.
    std::function<void(std::span<double>)> repair;

    std::size_t dimension() const { return lower.size(); }
    void enforce(std::span<double> x) const;
    bool contains(std::span<const double> x) const;
    Position sample(RandomStream& rng) const;

    static SearchSpace box(std::size_t dimension, double lo, double hi);
    /// The k1..k22 membership boxes with triangle sorting.
    static SearchSpace fuzzy_params();
};

/// Distribution of the step coefficient in x_new = x + a (x - x_partner).
enum class StepDistribution {
    Symmetric,  // a ~ U[-1, 1]
    Unit,       // a ~ U[0, 1]
};

struct FoodSource {
    Position position;
    double objective = 0.0;
    std::size_t trials = 0;
};

struct AbcConfig {
    std::size_t n_sources = 100;
    std::size_t iterations = 300;
    std::size_t abandonment_limit = 100;
    std::uint64_t rng_seed = 0;
    StepDistribution step = StepDistribution::Symmetric;
    std::size_t threads = 1;
    /// Checkpoint callback period, in cycles. 0 disables.
    std::size_t checkpoint_interval = 10;

    void validate() const;
};

struct IterationRecord {
    std::size_t iteration = 0;  // 0 is the initial colony
    double best_objective = 0.0;
    double mean_objective = 0.0;
    Position best_position;
};

struct AbcReport {
    std::vector<IterationRecord> history;
    /// Initial plus employed plus onlooker evaluations: N + 2N per cycle.
    std::size_t evaluations = 0;
    /// Extra evaluations spent on scout re-seeding.
    std::size_t scout_evaluations = 0;

    const IterationRecord& best() const { return history.back(); }
};

/// 1 / (1 + J) for J >= 0, 1 + |J| otherwise.
double fitness(double objective);

/// Moves one uniformly chosen coordinate of `source` relative to `partner`
/// and enforces the search space.
Position mutate(const FoodSource& source, const FoodSource& partner, const SearchSpace& space, RandomStream& rng,
                StepDistribution step = StepDistribution::Symmetric);

/// Fitness-proportional draw; uniform when all fitness values are equal.
std::size_t onlooker_select(std::span<const FoodSource> sources, RandomStream& rng);

class AbcOptimizer {
public:
    AbcOptimizer(AbcConfig config, SearchSpace space, Objective objective);

    /// Seeds N sources uniformly and records iteration 0.
    void initialize();
    /// One employed / onlooker / scout cycle.
    void iterate();
    /// Initializes if needed, then iterates up to config.iterations, calling
    /// `on_checkpoint` every checkpoint_interval cycles and at the end.
    const AbcReport& run(const std::function<void(const AbcOptimizer&)>& on_checkpoint = {});

    bool initialized() const { return !report_.history.empty(); }
    std::size_t iteration() const { return iteration_; }
    const std::vector<FoodSource>& sources() const { return sources_; }
    const AbcReport& report() const { return report_; }
    const AbcConfig& config() const { return config_; }

    /// Full colony state (sources, random stream, history) as text.
    std::string save_state() const;
    /// Restores a state written by save_state. Throws std::invalid_argument
    /// if it does not match this optimizer's colony size and dimension.
    void restore_state(const std::string& text);

private:
    std::vector<double> evaluate_batch(const std::vector<Position>& candidates) const;
    void greedy_update(std::size_t index, Position candidate, double objective);
    std::size_t random_partner(std::size_t index);
    void record_iteration();

    AbcConfig config_;
    SearchSpace space_;
    Objective objective_;
    RandomStream rng_;
    std::vector<FoodSource> sources_;
    IterationRecord best_so_far_;
    AbcReport report_;
    std::size_t iteration_ = 0;
};

/// Sample windows and weight of the tuning objective
///   J = w * sum_{t in transient} e(t) + sum_{t in steady} e(t),
/// both windows closed on the sampling grid.
struct ObjectiveWindows {
    double transient_begin = 0.0;
    double transient_end = 1.0;
    double steady_begin = 4.0;
    double steady_end = 14.0;
    double transient_weight = 0.3;
};

/// Sum of errors at grid samples n with begin <= n * dt <= end.
double window_sum(std::span<const double> errors, double dt, double begin, double end);

double objective_from_errors(std::span<const double> errors, double dt, const ObjectiveWindows& windows);

struct ObjectiveSetup {
    double gamma = 1.0;
    RuleBase rules = RuleBase::reference();
    ErrorSource error_source = ErrorSource::Truth;
    ObjectiveWindows windows;
};

/// Runs the fuzzy-scheduled filter over `scenario` (its rng_seed fixes the
/// noise) and scores the error trace. Diverged runs score kDivergedObjective.
double evaluate_objective(std::span<const double> position, const SimScenario& scenario,
                          const ObjectiveSetup& setup = {});

}  // namespace so3fuzzy
