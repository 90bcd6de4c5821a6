#pragma once

/**
 * @file fuzzy.hpp
 * @brief Mamdani gain scheduler mapping (attitude error, error rate) to the
 * filter gain increment k_op in [0, 100].
 *
 * Both inputs live on [0, 1] and share the same five triangular terms
 * VS, S, M, L, VL built from k1..k11:
 *
 *   VS = (0, 0, k1)   S = (k2, k3, k4)   M = (k5, k6, k7)
 *   L  = (k8, k9, k10)                   VL = (k11, 1, 1)
 *
 * The output lives on [0, 100] with terms built from k12..k22:
 *
 *   VS = (0, 0, k12)  S = (k13, k14, k15)  M = (k16, k17, k18)
 *   L  = (k19, k20, k21)                   VL = (k22, 100, 100)
 *
 * Inference is min (AND), max (aggregation), and centroid defuzzification
 * by trapezoidal integration on a 1001-point output grid.
 */

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace so3fuzzy {

inline constexpr std::size_t kFuzzyParamCount = 22;
inline constexpr std::size_t kTermCount = 5;
inline constexpr std::size_t kOutputGridPoints = 1001;
inline constexpr double kOutputMax = 100.0;
/// Seconds; |de/dt| * kRateScale is the normalized rate input.
inline constexpr double kRateScale = 0.1;

enum class Term : std::size_t { VS = 0, S = 1, M = 2, L = 3, VL = 4 };

const char* term_name(Term t);

/// Triangle (a, b, c) with a <= b <= c. a == b or b == c gives a one-sided ramp.
struct TriangleMF {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double membership(double x) const;
    double centroid() const { return (a + b + c) / 3.0; }
};

using ParamVector = std::array<double, kFuzzyParamCount>;

/// Box constraints on k1..k22 (index 0 is k1).
const ParamVector& param_lower_bounds();
const ParamVector& param_upper_bounds();

/// Clamps every value into its box and sorts each three-value triangle in
/// ascending order. Sorting cannot leave the box because the per-triangle
/// lower and upper bounds are themselves ascending.
void repair_params(std::span<double, kFuzzyParamCount> k);

class FuzzyParams {
public:
    /// Rejects non-finite values or any k_i outside its box, then sorts
    /// each triangle.
    static FuzzyParams from_values(std::span<const double> k);

    /// Midpoint of every box (sorted). Used as the untuned baseline.
    static FuzzyParams mid_box();

    /// Parses a 22-value record (comma/whitespace separated; '#' comments).
    static FuzzyParams from_record(std::string_view text);
    /// One line of 22 comma-separated values preceded by a comment header.
    std::string to_record() const;

    const ParamVector& values() const { return k_; }
    const TriangleMF& input(Term t) const { return input_[static_cast<std::size_t>(t)]; }
    const TriangleMF& output(Term t) const { return output_[static_cast<std::size_t>(t)]; }

private:
    explicit FuzzyParams(const ParamVector& k);
    ParamVector k_{};
    std::array<TriangleMF, kTermCount> input_{};
    std::array<TriangleMF, kTermCount> output_{};
};

/// Consequent table indexed by (rate term, error term).
class RuleBase {
public:
    using Table = std::array<std::array<Term, kTermCount>, kTermCount>;

    explicit RuleBase(const Table& table) : table_(table) {}

    /// The published 5x5 rule table, with its undeclared "V" entries read as L.
    static RuleBase reference();
    /// Every rule fires the same consequent.
    static RuleBase uniform(Term t);

    Term consequent(Term rate, Term error) const {
        return table_[static_cast<std::size_t>(rate)][static_cast<std::size_t>(error)];
    }
    const Table& table() const { return table_; }

private:
    Table table_;
};

/// Inference engine with the output membership grid precomputed.
class FuzzyScheduler {
public:
    FuzzyScheduler(const FuzzyParams& params, const RuleBase& rules);

    /// k_op in [0, 100]; 0 when no rule fires. Inputs are clamped to [0, 1].
    double infer(double error, double rate) const;

    /// K = 1 + infer(e, clamp(|e - e_prev| / dt * kRateScale, 0, 1)).
    double gain(double error, double previous_error, double dt) const;

    const FuzzyParams& params() const { return params_; }
    const RuleBase& rules() const { return rules_; }

private:
    FuzzyParams params_;
    RuleBase rules_;
    std::array<std::array<double, kOutputGridPoints>, kTermCount> output_grid_{};
    // Half-open grid index range where each output term is non-zero.
    std::array<std::size_t, kTermCount> support_begin_{};
    std::array<std::size_t, kTermCount> support_end_{};
};

double infer(const FuzzyParams& params, const RuleBase& rules, double error, double rate);

double scheduled_gain(const FuzzyParams& params, const RuleBase& rules, double error, double previous_error,
                      double dt);

}  // namespace so3fuzzy
