#include "so3fuzzy/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "so3fuzzy/text_format.hpp"

namespace so3fuzzy {

namespace {

// Index triples (into k1..k22, zero-based) of every free triangle.
constexpr std::array<std::array<std::size_t, 3>, 6> kTriangles{{
    {1, 2, 3}, {4, 5, 6}, {7, 8, 9},        // input S, M, L
    {12, 13, 14}, {15, 16, 17}, {18, 19, 20},  // output S, M, L
}};

constexpr ParamVector kLower{
    0.0,                  // k1
    0.0, 0.0, 0.1,        // k2..k4
    0.05, 0.1, 0.1,       // k5..k7
    0.1, 0.2, 0.2,        // k8..k10
    0.2,                  // k11
    0.0,                  // k12
    0.0, 5.0, 10.0,       // k13..k15
    5.0, 20.0, 20.0,      // k16..k18
    20.0, 20.0, 40.0,     // k19..k21
    40.0,                 // k22
};

constexpr ParamVector kUpper{
    0.15,
    0.2, 0.2, 0.2,
    0.2, 0.25, 0.35,
    0.35, 0.5, 0.7,
    0.7,
    15.0,
    20.0, 20.0, 30.0,
    20.0, 50.0, 50.0,
    50.0, 70.0, 90.0,
    70.0,
};

void sort_triangles(std::span<double, kFuzzyParamCount> k) {
    for (const auto& tri : kTriangles) {
        std::array<double, 3> v{k[tri[0]], k[tri[1]], k[tri[2]]};
        std::sort(v.begin(), v.end());
        for (std::size_t i = 0; i < 3; ++i) k[tri[i]] = v[i];
    }
}

double grid_point(std::size_t i) {
    return kOutputMax * static_cast<double>(i) / static_cast<double>(kOutputGridPoints - 1);
}

}  // namespace

const char* term_name(Term t) {
    switch (t) {
        case Term::VS: return "VS";
        case Term::S: return "S";
        case Term::M: return "M";
        case Term::L: return "L";
        case Term::VL: return "VL";
    }
    return "?";
}

double TriangleMF::membership(double x) const {
    if (x < a || x > c) return 0.0;
    if (x == b) return 1.0;
    if (x < b) return (x - a) / (b - a);
    return (c - x) / (c - b);
}

const ParamVector& param_lower_bounds() { return kLower; }
const ParamVector& param_upper_bounds() { return kUpper; }

void repair_params(std::span<double, kFuzzyParamCount> k) {
    for (std::size_t i = 0; i < kFuzzyParamCount; ++i) {
        k[i] = std::isfinite(k[i]) ? std::clamp(k[i], kLower[i], kUpper[i]) : 0.5 * (kLower[i] + kUpper[i]);
    }
    sort_triangles(k);
}

FuzzyParams::FuzzyParams(const ParamVector& k) : k_(k) {
    input_ = {{
        {0.0, 0.0, k_[0]},
        {k_[1], k_[2], k_[3]},
        {k_[4], k_[5], k_[6]},
        {k_[7], k_[8], k_[9]},
        {k_[10], 1.0, 1.0},
    }};
    output_ = {{
        {0.0, 0.0, k_[11]},
        {k_[12], k_[13], k_[14]},
        {k_[15], k_[16], k_[17]},
        {k_[18], k_[19], k_[20]},
        {k_[21], kOutputMax, kOutputMax},
    }};
}

FuzzyParams FuzzyParams::from_values(std::span<const double> k) {
    if (k.size() != kFuzzyParamCount) {
        throw std::invalid_argument("expected " + std::to_string(kFuzzyParamCount) + " membership parameters, got " +
                                    std::to_string(k.size()));
    }
    ParamVector v{};
    for (std::size_t i = 0; i < kFuzzyParamCount; ++i) {
        if (!std::isfinite(k[i]) || k[i] < kLower[i] || k[i] > kUpper[i]) {
            std::ostringstream msg;
            msg << "k" << (i + 1) << " = " << format_double(k[i]) << " outside [" << format_double(kLower[i]) << ", "
                << format_double(kUpper[i]) << "]";
            throw std::invalid_argument(msg.str());
        }
        v[i] = k[i];
    }
    sort_triangles(v);
    return FuzzyParams(v);
}

FuzzyParams FuzzyParams::mid_box() {
    ParamVector v{};
    for (std::size_t i = 0; i < kFuzzyParamCount; ++i) v[i] = 0.5 * (kLower[i] + kUpper[i]);
    sort_triangles(v);
    return FuzzyParams(v);
}

FuzzyParams FuzzyParams::from_record(std::string_view text) {
    std::string body;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        body += line;
        body += '\n';
    }
    return from_values(parse_number_list(body));
}

std::string FuzzyParams::to_record() const {
    return "# k1..k22\n" + format_list(std::vector<double>(k_.begin(), k_.end())) + "\n";
}

RuleBase RuleBase::reference() {
    using enum Term;
    // Rows: rate VS..VL; columns: error VS..VL.
    return RuleBase(Table{{
        {VS, S, M, VL, VL},
        {S, M, M, VL, VL},
        {M, M, L, VL, VL},
        {M, L, VL, VL, VL},
        {L, L, VL, VL, VL},
    }});
}

RuleBase RuleBase::uniform(Term t) {
    Table table{};
    for (auto& row : table) row.fill(t);
    return RuleBase(table);
}

FuzzyScheduler::FuzzyScheduler(const FuzzyParams& params, const RuleBase& rules) : params_(params), rules_(rules) {
    for (std::size_t t = 0; t < kTermCount; ++t) {
        const TriangleMF& mf = params_.output(static_cast<Term>(t));
        support_begin_[t] = kOutputGridPoints;
        support_end_[t] = 0;
        for (std::size_t i = 0; i < kOutputGridPoints; ++i) {
            output_grid_[t][i] = mf.membership(grid_point(i));
            if (output_grid_[t][i] > 0.0) {
                support_begin_[t] = std::min(support_begin_[t], i);
                support_end_[t] = i + 1;
            }
        }
    }
}

double FuzzyScheduler::infer(double error, double rate) const {
    const double e = std::clamp(error, 0.0, 1.0);
    const double de = std::clamp(rate, 0.0, 1.0);

    std::array<double, kTermCount> mu_e{};
    std::array<double, kTermCount> mu_de{};
    for (std::size_t t = 0; t < kTermCount; ++t) {
        mu_e[t] = params_.input(static_cast<Term>(t)).membership(e);
        mu_de[t] = params_.input(static_cast<Term>(t)).membership(de);
    }

    std::array<double, kTermCount> strength{};
    for (std::size_t r = 0; r < kTermCount; ++r) {
        if (mu_de[r] <= 0.0) continue;
        for (std::size_t c = 0; c < kTermCount; ++c) {
            const double fire = std::min(mu_de[r], mu_e[c]);
            auto& s = strength[static_cast<std::size_t>(rules_.consequent(static_cast<Term>(r), static_cast<Term>(c)))];
            s = std::max(s, fire);
        }
    }

    // Only grid points under some firing term contribute.
    std::size_t begin = kOutputGridPoints;
    std::size_t end = 0;
    for (std::size_t t = 0; t < kTermCount; ++t) {
        if (strength[t] > 0.0) {
            begin = std::min(begin, support_begin_[t]);
            end = std::max(end, support_end_[t]);
        }
    }

    double area = 0.0;
    double moment = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        double mu = 0.0;
        for (std::size_t t = 0; t < kTermCount; ++t) {
            if (strength[t] > 0.0) mu = std::max(mu, std::min(strength[t], output_grid_[t][i]));
        }
        const double w = (i == 0 || i + 1 == kOutputGridPoints) ? 0.5 : 1.0;
        area += w * mu;
        moment += w * mu * grid_point(i);
    }
    const double h = kOutputMax / static_cast<double>(kOutputGridPoints - 1);
    area *= h;
    moment *= h;
    if (area < 1e-12) return 0.0;
    return std::clamp(moment / area, 0.0, kOutputMax);
}

double FuzzyScheduler::gain(double error, double previous_error, double dt) const {
    const double rate = std::clamp(std::abs(error - previous_error) / dt * kRateScale, 0.0, 1.0);
    return 1.0 + infer(error, rate);
}

double infer(const FuzzyParams& params, const RuleBase& rules, double error, double rate) {
    return FuzzyScheduler(params, rules).infer(error, rate);
}

double scheduled_gain(const FuzzyParams& params, const RuleBase& rules, double error, double previous_error,
                      double dt) {
    return FuzzyScheduler(params, rules).gain(error, previous_error, dt);
}

}  // namespace so3fuzzy
