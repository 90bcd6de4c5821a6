#include "so3fuzzy/filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace so3fuzzy {

void FilterConfig::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("filter gamma must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("filter dt must be > 0");
    if (const auto* fixed = std::get_if<FixedGain>(&gain)) {
        if (!(fixed->k_op >= 0.0) || !std::isfinite(fixed->k_op)) {
            throw std::invalid_argument("fixed k_op must be finite and >= 0");
        }
    }
}

std::vector<Vec3> estimate_body_vectors(const RotationMatrix& rhat, std::span<const Vec3> inertial) {
    std::vector<Vec3> out;
    out.reserve(inertial.size());
    for (const Vec3& v : inertial) out.push_back(rhat.apply_transpose(v));
    return out;
}

Innovation innovation(std::span<const Vec3> estimated, std::span<const Vec3> measured,
                      std::span<const double> confidences) {
    if (estimated.size() != measured.size() || estimated.size() != confidences.size()) {
        throw std::invalid_argument("innovation inputs have mismatched lengths");
    }
    if (estimated.size() < 2) throw std::invalid_argument("innovation needs at least two vectors");
    Vec3 sum;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        sum += (0.5 * confidences[i]) * cross(estimated[i], measured[i]);
    }
    return {sum, norm(sum)};
}

Innovation frame_innovation(const RotationMatrix& rhat, const MeasurementFrame& frame) {
    const auto estimated = estimate_body_vectors(rhat, frame.inertial_vectors);
    return innovation(estimated, frame.body_vectors, frame.confidences);
}

FilterState filter_step(const FilterState& state, const MeasurementFrame& frame, double gain,
                        const FilterConfig& config, std::optional<double> error_sample) {
    return filter_step(state, frame, frame_innovation(state.attitude, frame), gain, config, error_sample);
}

FilterState filter_step(const FilterState& state, const MeasurementFrame& frame, const Innovation& iota,
                        double gain, const FilterConfig& config, std::optional<double> error_sample) {
    config.validate();
    if (!std::isfinite(gain)) throw NumericalError("filter gain is not finite");
    if (gain < 1.0) throw NumericalError("filter gain K = " + std::to_string(gain) + " is below 1");
    if (!frame.omega_m.is_finite() || !iota.vector.is_finite()) {
        throw NumericalError("measurement frame contains non-finite values at t = " + std::to_string(frame.t));
    }

    const Vec3 correction = gain * iota.vector;
    FilterState next;
    next.attitude = state.attitude * exp_so3((frame.omega_m - state.bias - correction) * config.dt);
    next.bias = state.bias + (config.dt * 0.5 * config.gamma) * iota.vector;
    next.last_error = error_sample ? std::clamp(*error_sample, 0.0, 1.0) : state.last_error;
    next.t = state.t + config.dt;

    if (!next.attitude.matrix().is_finite() || !next.bias.is_finite()) {
        throw NumericalError("filter state diverged at t = " + std::to_string(state.t));
    }
    return next;
}

}  // namespace so3fuzzy
