#include "so3fuzzy/closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace so3fuzzy {

ClosedLoopResult run_closed_loop(const SimScenario& scenario, const ClosedLoopOptions& options) {
    FilterConfig config = options.filter;
    config.dt = scenario.dt;
    config.validate();
    const bool scheduled = std::holds_alternative<ScheduledGain>(config.gain);
    if (scheduled && options.scheduler == nullptr) {
        throw std::invalid_argument("scheduled gain requires a fuzzy scheduler");
    }
    const double fixed_gain = scheduled ? 1.0 : 1.0 + std::get<FixedGain>(config.gain).k_op;

    TruthSimulator truth(scenario);
    const std::size_t count = scenario.sample_count();

    ClosedLoopResult result;
    result.errors.reserve(count);
    if (options.keep_records) result.records.reserve(count);

    FilterState state;
    state.attitude = scenario.initial_estimate;

    for (std::size_t n = 0; n < count; ++n) {
        const MeasurementFrame frame = truth.measure();
        const Innovation iota = frame_innovation(state.attitude, frame);
        const double error = attitude_distance(truth.attitude(), state.attitude);
        if (!std::isfinite(error) || !std::isfinite(iota.norm)) {
            throw NumericalError("non-finite attitude error at t = " + std::to_string(frame.t));
        }
        const double signal = options.error_source == ErrorSource::Truth ? error : std::min(1.0, iota.norm);
        if (n == 0) state.last_error = signal;

        const double gain = scheduled ? options.scheduler->gain(signal, state.last_error, config.dt) : fixed_gain;

        result.errors.push_back(error);
        result.max_orthonormality_defect =
            std::max(result.max_orthonormality_defect, orthonormality_defect(state.attitude.matrix()));
        if (options.keep_records) {
            RunRecord rec;
            rec.t = frame.t;
            rec.error = error;
            rec.gain = gain;
            rec.euler_true = to_euler(truth.attitude());
            rec.euler_est = to_euler(state.attitude);
            rec.bias_est = state.bias;
            rec.bias_error_norm = norm(scenario.gyro.bias - state.bias);
            result.records.push_back(rec);
        }

        if (n + 1 < count) {
            state = filter_step(state, frame, iota, gain, config, signal);
            truth.advance();
        }
    }
    result.final_state = state;
    result.final_truth = truth.attitude();
    return result;
}

}  // namespace so3fuzzy
