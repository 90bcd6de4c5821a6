#pragma once

// Ground-truth attitude trajectory and synthetic gyro / vector measurements.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "so3fuzzy/so3.hpp"

namespace so3fuzzy {

/// Seeded source of Gaussian and uniform draws. One stream per run.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

    double gaussian(double stddev);
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    /// Textual engine state, for checkpoints.
    std::string save() const;
    void restore(const std::string& state);

private:
    std::mt19937_64 engine_;
};

/// Omega(t) = amplitude .* sin(frequency * t + phase), componentwise.
struct AngularRateProfile {
    Vec3 amplitude{1.0, 1.0, 0.4};
    Vec3 frequency{0.4, 0.7, 0.3};
    Vec3 phase{0.0, 0.7853981633974483, 1.5707963267948966};

    Vec3 operator()(double t) const;
};

struct GyroModel {
    Vec3 bias;               // rad/s
    double noise_std = 0.0;  // rad/s, per sample
};

struct InertialObservation {
    Vec3 direction;          // unit, inertial frame
    Vec3 bias;               // body frame
    double noise_std = 0.0;
    double confidence = 1.0;

    /// Normalizes `direction` and checks noise_std >= 0, confidence > 0.
    static InertialObservation make(const Vec3& direction, const Vec3& bias, double noise_std,
                                     double confidence = 1.0);
};

struct SimScenario {
    double dt = 0.01;
    double duration = 14.0;
    AngularRateProfile angular_rate;
    GyroModel gyro;
    std::vector<InertialObservation> observations;
    bool derived_third_vector = false;
    double derived_confidence = 1.0;
    RotationMatrix initial_true_attitude;
    RotationMatrix initial_estimate;
    std::uint64_t rng_seed = 0;

    /// Throws std::invalid_argument on a malformed scenario, including
    /// fewer than two non-collinear observation directions.
    void validate() const;

    /// floor(duration / dt) + 1 samples, endpoints included.
    std::size_t sample_count() const;
    double time_at(std::size_t n) const { return static_cast<double>(n) * dt; }

    /// The reference run: three-axis sinusoidal rates, biased gyro, two
    /// biased reference vectors plus their cross product, and a start
    /// estimate close to the antipodal attitude.
    static SimScenario paper_iv_a();
};

/// The printed 4-decimal starting estimate of the reference run, before
/// projection onto SO(3).
Matrix3 reference_initial_estimate_raw();

struct MeasurementFrame {
    double t = 0.0;
    Vec3 omega_m;
    std::vector<Vec3> body_vectors;
    std::vector<Vec3> inertial_vectors;
    std::vector<double> confidences;
};

Vec3 omega_true(const AngularRateProfile& profile, double t);

/// R * exp(dt * Omega(t + dt/2)).
RotationMatrix step_true_attitude(const RotationMatrix& r, const AngularRateProfile& profile, double t, double dt);

Vec3 sample_gyro(const AngularRateProfile& profile, double t, const GyroModel& model, RandomStream& rng);

MeasurementFrame sample_vector_measurements(const RotationMatrix& r, const SimScenario& scenario, RandomStream& rng);

/// Steps the true attitude along the sampling grid and emits one
/// measurement frame per sample. Owns the run's RandomStream.
class TruthSimulator {
public:
    explicit TruthSimulator(const SimScenario& scenario);

    std::size_t index() const { return index_; }
    double time() const { return scenario_.time_at(index_); }
    bool done() const { return index_ >= scenario_.sample_count(); }
    const RotationMatrix& attitude() const { return attitude_; }

    /// Vector observations at the current sample and the gyro reading for
    /// the interval that follows it (rate sampled at the interval midpoint).
    MeasurementFrame measure();
    /// Moves truth to the next sample.
    void advance();

private:
    SimScenario scenario_;
    RandomStream rng_;
    RotationMatrix attitude_;
    std::size_t index_ = 0;
};

}  // namespace so3fuzzy
