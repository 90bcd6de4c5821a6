#pragma once

// Nonlinear complementary attitude filter on SO(3) with gyro-bias
// estimation and an externally supplied feedback gain K >= 1.
//
//   Rhat' = Rhat [Omega_m - bhat - W]x
//   bhat' = (gamma / 2) * iota
//   W     = K * iota
//
// where iota = sum_i (s_i / 2) vhat_i x v_i is the measurement-space
// innovation, vhat_i = Rhat^T v_i^I.

#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "so3fuzzy/signal_sim.hpp"
#include "so3fuzzy/so3.hpp"

namespace so3fuzzy {

/// Raised when a step would produce non-finite state or receives
/// inadmissible inputs.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FilterState {
    RotationMatrix attitude;
    Vec3 bias;
    double last_error = 0.0;  // previous ||R~||_I sample, in [0, 1]
    double t = 0.0;
};

struct FixedGain {
    double k_op = 0.0;  // K = 1 + k_op
};
struct ScheduledGain {};
using GainMode = std::variant<FixedGain, ScheduledGain>;

struct FilterConfig {
    double gamma = 1.0;
    GainMode gain = FixedGain{};
    double dt = 0.01;

    void validate() const;
};

struct Innovation {
    Vec3 vector;
    double norm = 0.0;
};

/// Rhat^T v for each inertial direction.
std::vector<Vec3> estimate_body_vectors(const RotationMatrix& rhat, std::span<const Vec3> inertial);

/// sum_i (s_i / 2) * (estimated_i x measured_i). Throws std::invalid_argument
/// on length mismatch or fewer than two vectors.
Innovation innovation(std::span<const Vec3> estimated, std::span<const Vec3> measured,
                      std::span<const double> confidences);

/// Innovation for a frame given the current attitude estimate.
Innovation frame_innovation(const RotationMatrix& rhat, const MeasurementFrame& frame);

/// One discrete step: exponential-map update of the attitude, forward-Euler
/// update of the bias. When `error_sample` is present it becomes the new
/// last_error. Throws NumericalError for K < 1, non-finite inputs, or a
/// non-finite result.
FilterState filter_step(const FilterState& state, const MeasurementFrame& frame, double gain,
                        const FilterConfig& config, std::optional<double> error_sample = std::nullopt);

/// Same as filter_step with a precomputed innovation.
FilterState filter_step(const FilterState& state, const MeasurementFrame& frame, const Innovation& iota,
                        double gain, const FilterConfig& config, std::optional<double> error_sample = std::nullopt);

}  // namespace so3fuzzy
