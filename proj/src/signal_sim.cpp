#include "so3fuzzy/signal_sim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace so3fuzzy {

double RandomStream::gaussian(double stddev) {
    // Always consume a standard draw so the stream layout does not depend
    // on which noise levels are zero.
    std::normal_distribution<double> standard(0.0, 1.0);
    return stddev * standard(engine_);
}

double RandomStream::uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(engine_);
}

std::size_t RandomStream::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("RandomStream::index needs n > 0");
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
}

std::string RandomStream::save() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
}

void RandomStream::restore(const std::string& state) {
    std::istringstream is(state);
    is >> engine_;
    if (!is) throw std::invalid_argument("malformed random stream state");
}

Vec3 AngularRateProfile::operator()(double t) const {
    return {amplitude.x * std::sin(frequency.x * t + phase.x),
            amplitude.y * std::sin(frequency.y * t + phase.y),
            amplitude.z * std::sin(frequency.z * t + phase.z)};
}

InertialObservation InertialObservation::make(const Vec3& direction, const Vec3& bias, double noise_std,
                                              double confidence) {
    if (!direction.is_finite() || !bias.is_finite()) {
        throw std::invalid_argument("observation has non-finite direction or bias");
    }
    if (!(noise_std >= 0.0)) throw std::invalid_argument("observation noise_std must be >= 0");
    if (!(confidence > 0.0)) throw std::invalid_argument("observation confidence must be > 0");
    return {normalized(direction), bias, noise_std, confidence};
}

void SimScenario::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
    if (!(duration >= dt) || !std::isfinite(duration)) throw std::invalid_argument("duration must be >= dt");
    if (!(gyro.noise_std >= 0.0)) throw std::invalid_argument("gyro noise_std must be >= 0");
    if (!gyro.bias.is_finite()) throw std::invalid_argument("gyro bias must be finite");
    if (!(derived_confidence > 0.0)) throw std::invalid_argument("derived vector confidence must be > 0");
    if (observations.size() < 2) {
        throw std::invalid_argument("at least two vector observations are required");
    }
    for (const auto& obs : observations) {
        if (std::abs(norm(obs.direction) - 1.0) > 1e-12) {
            throw std::invalid_argument("observation direction is not unit length");
        }
        if (!(obs.noise_std >= 0.0) || !(obs.confidence > 0.0)) {
            throw std::invalid_argument("observation noise_std must be >= 0 and confidence > 0");
        }
    }
    bool observable = false;
    for (std::size_t i = 0; i < observations.size() && !observable; ++i) {
        for (std::size_t j = i + 1; j < observations.size(); ++j) {
            if (norm(cross(observations[i].direction, observations[j].direction)) > 1e-6) {
                observable = true;
                break;
            }
        }
    }
    if (!observable) throw std::invalid_argument("observation directions are collinear");
}

std::size_t SimScenario::sample_count() const {
    return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

Matrix3 reference_initial_estimate_raw() {
    return Matrix3{{
        -0.0074, 0.8557, 0.5175,
        0.8802, -0.2399, 0.4094,
        0.4745, 0.4586, -0.7514,
    }};
}

SimScenario SimScenario::paper_iv_a() {
    SimScenario s;
    s.dt = 0.01;
    s.duration = 14.0;
    s.gyro = {Vec3{-0.1, 0.1, 0.05}, 0.2};
    s.observations = {
        InertialObservation::make({1.0, -1.0, 1.0}, {0.1, -0.1, 0.1}, 0.05),
        InertialObservation::make({0.0, 0.0, 1.0}, {0.0, 0.0, 0.1}, 0.05),
    };
    s.derived_third_vector = true;
    s.initial_true_attitude = RotationMatrix::identity();
    s.initial_estimate = project_to_so3(reference_initial_estimate_raw());
    s.rng_seed = 0;
    return s;
}

Vec3 omega_true(const AngularRateProfile& profile, double t) { return profile(t); }

RotationMatrix step_true_attitude(const RotationMatrix& r, const AngularRateProfile& profile, double t, double dt) {
    return r * exp_so3(profile(t + 0.5 * dt) * dt);
}

Vec3 sample_gyro(const AngularRateProfile& profile, double t, const GyroModel& model, RandomStream& rng) {
    Vec3 noise;
    noise.x = rng.gaussian(model.noise_std);
    noise.y = rng.gaussian(model.noise_std);
    noise.z = rng.gaussian(model.noise_std);
    return profile(t) + model.bias + noise;
}

MeasurementFrame sample_vector_measurements(const RotationMatrix& r, const SimScenario& scenario, RandomStream& rng) {
    MeasurementFrame frame;
    const std::size_t n = scenario.observations.size() + (scenario.derived_third_vector ? 1 : 0);
    frame.body_vectors.reserve(n);
    frame.inertial_vectors.reserve(n);
    frame.confidences.reserve(n);

    std::vector<Vec3> raw_body;
    raw_body.reserve(scenario.observations.size());
    for (const auto& obs : scenario.observations) {
        Vec3 noise;
        noise.x = rng.gaussian(obs.noise_std);
        noise.y = rng.gaussian(obs.noise_std);
        noise.z = rng.gaussian(obs.noise_std);
        raw_body.push_back(r.apply_transpose(obs.direction) + obs.bias + noise);
    }
    for (std::size_t i = 0; i < raw_body.size(); ++i) {
        frame.body_vectors.push_back(normalized(raw_body[i]));
        frame.inertial_vectors.push_back(normalized(scenario.observations[i].direction));
        frame.confidences.push_back(scenario.observations[i].confidence);
    }
    if (scenario.derived_third_vector) {
        const Vec3 body = cross(raw_body[0], raw_body[1]);
        const Vec3 inertial = cross(scenario.observations[0].direction, scenario.observations[1].direction);
        if (norm(body) >= 1e-9 && norm(inertial) >= 1e-9) {
            frame.body_vectors.push_back(normalized(body));
            frame.inertial_vectors.push_back(normalized(inertial));
            frame.confidences.push_back(scenario.derived_confidence);
        }
    }
    return frame;
}

TruthSimulator::TruthSimulator(const SimScenario& scenario)
    : scenario_(scenario), rng_(scenario.rng_seed), attitude_(scenario.initial_true_attitude) {
    scenario_.validate();
}

MeasurementFrame TruthSimulator::measure() {
    const double t = time();
    // The reading covers [t, t + dt] and reports its mean rate, taken at the
    // same midpoint the truth integrator uses.
    const Vec3 omega_m = sample_gyro(scenario_.angular_rate, t + 0.5 * scenario_.dt, scenario_.gyro, rng_);
    MeasurementFrame frame = sample_vector_measurements(attitude_, scenario_, rng_);
    frame.t = t;
    frame.omega_m = omega_m;
    return frame;
}

void TruthSimulator::advance() {
    attitude_ = step_true_attitude(attitude_, scenario_.angular_rate, time(), scenario_.dt);
    ++index_;
}

}  // namespace so3fuzzy
