#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "so3fuzzy/signal_sim.hpp"
#include "test_support.hpp"

using namespace so3fuzzy;
using testsupport::max_abs_diff;
using testsupport::Rng;

namespace {

SimScenario quiet_scenario() {
    SimScenario s = SimScenario::paper_iv_a();
    s.gyro = {};
    for (auto& o : s.observations) {
        o.bias = {};
        o.noise_std = 0.0;
    }
    return s;
}

RotationMatrix integrate(const AngularRateProfile& p, double horizon, std::size_t steps) {
    const double h = horizon / static_cast<double>(steps);
    RotationMatrix r;
    for (std::size_t i = 0; i < steps; ++i) r = step_true_attitude(r, p, static_cast<double>(i) * h, h);
    return r;
}

}  // namespace

TEST_CASE("angular rate profile") {
    const AngularRateProfile p;
    const Vec3 w0 = omega_true(p, 0.0);
    CHECK(w0.x == 0.0);
    CHECK(w0.y == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(w0.z == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(std::abs(omega_true(p, 2.0 * std::numbers::pi / 0.4).x) <= 1e-12);

    for (double t : {0.0, 0.37, 3.3, 13.99}) {
        const Vec3 w = omega_true(p, t);
        CHECK(w.x == doctest::Approx(std::sin(0.4 * t)).epsilon(1e-15));
        CHECK(w.y == doctest::Approx(std::sin(0.7 * t + std::numbers::pi / 4)).epsilon(1e-15));
        CHECK(w.z == doctest::Approx(0.4 * std::sin(0.3 * t + std::numbers::pi / 2)).epsilon(1e-15));
    }

    AngularRateProfile still = p;
    still.amplitude = {};
    CHECK(omega_true(still, 0.0) == Vec3{0, 0, 0});
}

TEST_CASE("true attitude propagation") {
    AngularRateProfile still;
    still.amplitude = {};
    Rng rng(11);
    const RotationMatrix r = rng.rotation();
    CHECK(max_abs_diff(step_true_attitude(r, still, 1.0, 0.01).matrix(), r.matrix()) == 0.0);

    AngularRateProfile spin;
    spin.amplitude = {0, 0, 1};
    spin.frequency = {0, 0, 0};
    spin.phase = {0, 0, std::numbers::pi / 2};
    const RotationMatrix quarter = step_true_attitude(RotationMatrix::identity(), spin, 0.0, std::numbers::pi / 2);
    CHECK(max_abs_diff(quarter.matrix(), Matrix3({0, -1, 0, 1, 0, 0, 0, 0, 1})) <= 1e-15);

    SUBCASE("body-frame rate acts on the right") {
        const RotationMatrix r1 = step_true_attitude(r, spin, 0.0, 0.3);
        CHECK(max_abs_diff(r1.matrix(), (r * exp_so3({0, 0, 0.3})).matrix()) <= 1e-15);
    }

    SUBCASE("second-order convergence under step refinement") {
        const AngularRateProfile p;
        const RotationMatrix fine = integrate(p, 2.0, 1600);
        const double e1 = std::sqrt(attitude_distance(integrate(p, 2.0, 100), fine));
        const double e2 = std::sqrt(attitude_distance(integrate(p, 2.0, 200), fine));
        const double e4 = std::sqrt(attitude_distance(integrate(p, 2.0, 400), fine));
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
        CHECK(e2 / e4 == doctest::Approx(4.0).epsilon(0.15));
    }

    SUBCASE("stays on the manifold over the full run") {
        SimScenario s = quiet_scenario();
        TruthSimulator sim(s);
        double worst = 0.0;
        while (!sim.done()) {
            worst = std::max(worst, orthonormality_defect(sim.attitude().matrix()));
            sim.advance();
        }
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("gyro model") {
    const AngularRateProfile p;
    RandomStream rng(3);
    CHECK(sample_gyro(p, 1.2, GyroModel{}, rng) == omega_true(p, 1.2));
    const GyroModel biased{{-0.1, 0.1, 0.05}, 0.0};
    const Vec3 b = sample_gyro(p, 1.2, biased, rng) - omega_true(p, 1.2);
    CHECK(b.x == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(b.y == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(b.z == doctest::Approx(0.05).epsilon(1e-12));

    SUBCASE("sample mean and spread") {
        const GyroModel noisy{{-0.1, 0.1, 0.05}, 0.2};
        const double t = 2.5;
        const Vec3 expect = omega_true(p, t) + noisy.bias;
        const int n = 100000;
        Vec3 sum;
        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const Vec3 d = sample_gyro(p, t, noisy, rng) - expect;
            sum += d;
            sq += d.x * d.x;
        }
        const double tol = 3.0 * 0.2 / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(sum.x / n) <= tol);
        CHECK(std::abs(sum.y / n) <= tol);
        CHECK(std::abs(sum.z / n) <= tol);
        CHECK(std::sqrt(sq / n) == doctest::Approx(0.2).epsilon(0.02));
    }
}

TEST_CASE("vector measurements") {
    SUBCASE("noise-free at identity gives the reference directions") {
        const SimScenario s = quiet_scenario();
        RandomStream rng(0);
        const MeasurementFrame f = sample_vector_measurements(RotationMatrix::identity(), s, rng);
        REQUIRE(f.body_vectors.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) CHECK(norm(f.body_vectors[i] - f.inertial_vectors[i]) <= 1e-15);
    }

    SUBCASE("noise-free at random attitude gives R^T v") {
        const SimScenario s = quiet_scenario();
        RandomStream rng(0);
        Rng gen(12);
        for (int k = 0; k < 100; ++k) {
            const RotationMatrix r = gen.rotation();
            const MeasurementFrame f = sample_vector_measurements(r, s, rng);
            for (std::size_t i = 0; i < f.body_vectors.size(); ++i) {
                const Vec3 expect = r.matrix().transpose() * f.inertial_vectors[i];
                CHECK(norm(f.body_vectors[i] - expect) <= 1e-12);
            }
        }
    }

    SUBCASE("reference scenario draw") {
        const SimScenario s = SimScenario::paper_iv_a();
        RandomStream rng(5);
        RandomStream replay(5);
        Rng gen(13);
        const RotationMatrix r = gen.rotation();
        const MeasurementFrame f = sample_vector_measurements(r, s, rng);
        REQUIRE(f.body_vectors.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(std::abs(norm(f.body_vectors[i]) - 1.0) <= 1e-12);
            CHECK(std::abs(norm(f.inertial_vectors[i]) - 1.0) <= 1e-12);
        }
        // Rebuild the raw vectors with the same draws.
        Vec3 raw[2];
        for (int i = 0; i < 2; ++i) {
            const auto& o = s.observations[static_cast<std::size_t>(i)];
            Vec3 n;
            n.x = replay.gaussian(o.noise_std);
            n.y = replay.gaussian(o.noise_std);
            n.z = replay.gaussian(o.noise_std);
            raw[i] = r.matrix().transpose() * o.direction + o.bias + n;
        }
        const Vec3 c = cross(raw[0], raw[1]);
        CHECK(norm(f.body_vectors[2] - c * (1.0 / norm(c))) <= 1e-12);
        CHECK(std::abs(dot(f.body_vectors[2], f.body_vectors[0])) <= 1e-12);
        CHECK(std::abs(dot(f.body_vectors[2], f.body_vectors[1])) <= 1e-12);
        const Vec3 ci = cross(Vec3{1, -1, 1}, Vec3{0, 0, 1});
        CHECK(norm(f.inertial_vectors[2] - ci * (1.0 / norm(ci))) <= 1e-15);
    }

    SUBCASE("degenerate cross product drops the third vector") {
        SimScenario s = quiet_scenario();
        // Bias that makes the first raw body vector parallel to the second.
        s.observations[0].bias = Vec3{0, 0, 1} - s.observations[0].direction;
        RandomStream rng(0);
        const MeasurementFrame f = sample_vector_measurements(RotationMatrix::identity(), s, rng);
        CHECK(f.body_vectors.size() == 2);
    }
}

TEST_CASE("scenario validation") {
    SimScenario s = SimScenario::paper_iv_a();
    CHECK_NOTHROW(s.validate());
    CHECK(s.sample_count() == 1401);

    SimScenario one = s;
    one.observations.pop_back();
    CHECK_THROWS_AS(one.validate(), std::invalid_argument);

    SimScenario collinear = s;
    collinear.observations[1] = InertialObservation::make(Vec3{-2, 2, -2}, {}, 0.0);
    CHECK_THROWS_AS(collinear.validate(), std::invalid_argument);

    SimScenario bad_dt = s;
    bad_dt.dt = 0.0;
    CHECK_THROWS_AS(bad_dt.validate(), std::invalid_argument);

    CHECK_THROWS((void)InertialObservation::make({0, 0, 0}, {}, 0.0));
    CHECK_THROWS((void)InertialObservation::make({1, 0, 0}, {}, -1.0));
    CHECK_THROWS((void)InertialObservation::make({1, 0, 0}, {}, 0.1, 0.0));
    const auto obs = InertialObservation::make({3, 4, 0}, {}, 0.0);
    CHECK(std::abs(norm(obs.direction) - 1.0) <= 1e-12);

    const SimScenario ref = SimScenario::paper_iv_a();
    CHECK(ref.gyro.bias == Vec3{-0.1, 0.1, 0.05});
    CHECK(ref.gyro.noise_std == 0.2);
    CHECK(ref.observations.size() == 2);
    CHECK(ref.derived_third_vector);
    CHECK(max_abs_diff(ref.initial_true_attitude.matrix(), Matrix3::identity()) == 0.0);
}

TEST_CASE("seeded simulation is reproducible") {
    SimScenario s = SimScenario::paper_iv_a();
    s.rng_seed = 42;
    TruthSimulator a(s);
    TruthSimulator b(s);
    s.rng_seed = 43;
    TruthSimulator c(s);
    bool differs = false;
    for (int i = 0; i < 200; ++i) {
        const MeasurementFrame fa = a.measure();
        const MeasurementFrame fb = b.measure();
        const MeasurementFrame fc = c.measure();
        CHECK(fa.omega_m == fb.omega_m);
        for (std::size_t k = 0; k < fa.body_vectors.size(); ++k) CHECK(fa.body_vectors[k] == fb.body_vectors[k]);
        differs = differs || !(fa.omega_m == fc.omega_m);
        a.advance();
        b.advance();
        c.advance();
    }
    CHECK(differs);

    RandomStream r(9);
    (void)r.gaussian(1.0);
    const std::string saved = r.save();
    const double next = r.gaussian(1.0);
    RandomStream restored(0);
    restored.restore(saved);
    CHECK(restored.gaussian(1.0) == next);
}
