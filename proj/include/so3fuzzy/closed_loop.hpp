#pragma once

// Drives the truth simulator and the filter together over a scenario,
// computing the gain each sample from a fixed setting or the fuzzy
// scheduler.

#include <vector>

#include "so3fuzzy/filter.hpp"
#include "so3fuzzy/fuzzy.hpp"
#include "so3fuzzy/signal_sim.hpp"

namespace so3fuzzy {

/// What the scheduler sees as "attitude error".
enum class ErrorSource {
    Truth,       // ||R~||_I against the simulated ground truth
    Innovation,  // min(1, |innovation|), available without ground truth
};

struct RunRecord {
    double t = 0.0;
    double error = 0.0;  // ||R~||_I
    double gain = 1.0;   // K applied from this sample
    EulerAngles euler_true;
    EulerAngles euler_est;
    Vec3 bias_est;
    double bias_error_norm = 0.0;
};

struct ClosedLoopOptions {
    FilterConfig filter;
    /// Required when filter.gain holds ScheduledGain; not owned.
    const FuzzyScheduler* scheduler = nullptr;
    ErrorSource error_source = ErrorSource::Truth;
    /// Skip Euler conversion and record storage (errors are always kept).
    bool keep_records = true;
};

struct ClosedLoopResult {
    std::vector<RunRecord> records;
    std::vector<double> errors;  // ||R~||_I per sample
    FilterState final_state;
    RotationMatrix final_truth;
    double max_orthonormality_defect = 0.0;
};

/// Runs all scenario.sample_count() samples. The filter dt is taken from the
/// scenario. Throws NumericalError if the filter diverges.
ClosedLoopResult run_closed_loop(const SimScenario& scenario, const ClosedLoopOptions& options);

}  // namespace so3fuzzy
