#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "so3fuzzy/signal_sim.hpp"
#include "so3fuzzy/so3.hpp"
#include "test_support.hpp"

using namespace so3fuzzy;
using testsupport::max_abs_diff;
using testsupport::Rng;

namespace {

Matrix3 explicit_skew(const Vec3& v) { return Matrix3({0, -v.z, v.y, v.z, 0, -v.x, -v.y, v.x, 0}); }

}  // namespace

TEST_CASE("hat matches the explicit skew layout and the cross product") {
    CHECK(hat({0, 0, 0}).matrix() == Matrix3::zero());
    CHECK(hat({1, 2, 3}).matrix() == Matrix3({0, -3, 2, 3, 0, -1, -2, 1, 0}));

    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const Vec3 v = rng.vec(5.0);
        const Vec3 w = rng.vec(5.0);
        const Vec3 a = hat(v).matrix() * w;
        const Vec3 b = cross(v, w);
        CHECK(norm(a - b) <= 1e-14 * std::max(1.0, norm(v) * norm(w)));
        CHECK(max_abs_diff(hat(v).matrix(), explicit_skew(v)) == 0.0);
    }
}

TEST_CASE("vex inverts hat and matches the elementwise formula on pa") {
    CHECK(vex(hat({1, 2, 3})) == Vec3{1, 2, 3});
    CHECK(vex(pa(Matrix3::zero())) == Vec3{0, 0, 0});

    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 x = rng.vec(100.0);
        CHECK(vex(hat(x)) == x);
        const Matrix3 m = rng.matrix(3.0);
        const Vec3 brute{0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)), 0.5 * (m(1, 0) - m(0, 1))};
        CHECK(norm(vex(pa(m)) - brute) <= 1e-15);
    }
}

TEST_CASE("SkewMatrix::from_matrix rejects matrices that are not antisymmetric") {
    const Matrix3 skew = explicit_skew({0.3, -0.2, 0.1});
    CHECK(SkewMatrix::from_matrix(skew).axial() == Vec3{0.3, -0.2, 0.1});
    Matrix3 bad = skew;
    bad(0, 1) += 1e-6;
    CHECK_THROWS_AS((void)SkewMatrix::from_matrix(bad), std::invalid_argument);
    CHECK_THROWS_AS((void)SkewMatrix::from_matrix(Matrix3::identity()), std::invalid_argument);
}

TEST_CASE("pa kills symmetric matrices and fixes antisymmetric ones") {
    const Matrix3 sym({1, 2, 3, 2, 5, 6, 3, 6, 9});
    CHECK(pa(sym).matrix() == Matrix3::zero());
    const Matrix3 anti = explicit_skew({4, -5, 6});
    CHECK(pa(anti).matrix() == anti);

    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const Matrix3 m = rng.matrix(10.0);
        const Matrix3 p = pa(m).matrix();
        CHECK(max_abs_diff(pa(p).matrix(), p) <= 1e-12 * std::max(1.0, m.frobenius_norm()));
        CHECK(max_abs_diff(p.transpose(), p * -1.0) == 0.0);
    }
}

TEST_CASE("trace identity Tr(M hat(x)) = Tr(pa(M) hat(x)) = -2 vex(pa(M)).x") {
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        const Matrix3 m = rng.matrix(10.0);
        const Vec3 x = rng.vec(10.0);
        const auto hx = testsupport::to_mat(explicit_skew(x));
        const double lhs = testsupport::trace(testsupport::mul(testsupport::to_mat(m), hx));
        const double mid = testsupport::trace(testsupport::mul(testsupport::to_mat(pa(m).matrix()), hx));
        const double rhs = -2.0 * dot(vex(pa(m)), x);
        const double scale = m.frobenius_norm() * norm(x);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
        CHECK(std::abs(mid - rhs) <= 1e-12 * scale);
    }
}

TEST_CASE("exp_so3 closed form") {
    CHECK(exp_so3({0, 0, 0}).matrix() == Matrix3::identity());
    const Matrix3 rz = exp_so3({0, 0, std::numbers::pi / 2}).matrix();
    CHECK(max_abs_diff(rz, Matrix3({0, -1, 0, 1, 0, 0, 0, 0, 1})) <= 1e-15);

    SUBCASE("tiny arguments follow the second-order series") {
        const Vec3 v{3e-13, -1e-13, 2e-13};
        const Matrix3 h = explicit_skew(v);
        const Matrix3 series = Matrix3::identity() + h + 0.5 * (h * h);
        CHECK(max_abs_diff(exp_so3(v).matrix(), series) <= 1e-18);
    }

    SUBCASE("group inverse and manifold invariants") {
        Rng rng(5);
        for (int i = 0; i < 1000; ++i) {
            const Vec3 v = rng.unit() * rng.uniform(0.0, 10.0);
            const RotationMatrix r = exp_so3(v);
            const Matrix3 prod = (r * exp_so3(-v)).matrix();
            CHECK(max_abs_diff(prod, Matrix3::identity()) <= 1e-12);
            CHECK(orthonormality_defect(r.matrix()) <= 1e-12);
            CHECK(std::abs(r.matrix().determinant() - 1.0) <= 1e-12);
        }
    }

    SUBCASE("rotation about a unit axis leaves the axis fixed") {
        Rng rng(6);
        for (int i = 0; i < 100; ++i) {
            const Vec3 u = rng.unit();
            const double angle = rng.uniform(-3.0, 3.0);
            const RotationMatrix r = exp_so3(u * angle);
            CHECK(norm(r.apply(u) - u) <= 1e-14);
            CHECK(r.matrix().trace() == doctest::Approx(1.0 + 2.0 * std::cos(angle)).epsilon(1e-12));
        }
    }
}

TEST_CASE("project_to_so3") {
    Rng rng(7);
    SUBCASE("rotations are fixed points and scaling is removed") {
        for (int i = 0; i < 100; ++i) {
            const Matrix3 r = rng.rotation_matrix();
            CHECK(max_abs_diff(project_to_so3(r).matrix(), r) <= 1e-12);
            CHECK(max_abs_diff(project_to_so3(1.001 * r).matrix(), r) <= 1e-9);
        }
    }

    SUBCASE("the four-decimal initial estimate") {
        const Matrix3 raw = reference_initial_estimate_raw();
        CHECK(orthonormality_defect(raw) > 1e-6);
        const RotationMatrix r = project_to_so3(raw);
        CHECK(orthonormality_defect(r.matrix()) <= 1e-12);
        CHECK(max_abs_diff(r.matrix(), raw) <= 1e-3);
    }

    SUBCASE("result is the nearest rotation among random perturbations of it") {
        const Matrix3 m = rng.matrix(1.0) + 3.0 * rng.rotation_matrix();
        if (m.determinant() > 0.0) {
            const RotationMatrix p = project_to_so3(m);
            const double best = (m - p.matrix()).frobenius_norm();
            for (int i = 0; i < 200; ++i) {
                const Matrix3 q = (p * exp_so3(rng.vec(0.05))).matrix();
                CHECK((m - q).frobenius_norm() >= best - 1e-12);
            }
        }
    }

    SUBCASE("singular and reflected inputs are rejected") {
        CHECK_THROWS_AS((void)project_to_so3(Matrix3::zero()), std::domain_error);
        CHECK_THROWS_AS((void)project_to_so3(Matrix3::diagonal({1, 1, 0})), std::domain_error);
        CHECK_THROWS_AS((void)project_to_so3(Matrix3::diagonal({1, 1, -1})), std::domain_error);
    }
}

TEST_CASE("RotationMatrix::from_matrix validates") {
    CHECK_NOTHROW((void)RotationMatrix::from_matrix(Matrix3::identity()));
    CHECK_THROWS((void)RotationMatrix::from_matrix(Matrix3::diagonal({1, 1, -1})));
    CHECK_THROWS((void)RotationMatrix::from_matrix(1.01 * Matrix3::identity()));
}

TEST_CASE("attitude_distance") {
    Rng rng(8);
    const RotationMatrix r = rng.rotation();
    CHECK(attitude_distance(r, r) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(attitude_distance(RotationMatrix::identity(), exp_so3(rng.unit() * std::numbers::pi)) ==
          doctest::Approx(1.0).epsilon(1e-15));

    const Matrix3 raw = reference_initial_estimate_raw();
    const double printed = (3.0 - raw.trace()) / 4.0;
    CHECK(printed == doctest::Approx(0.99967).epsilon(1e-5));
    const double d = attitude_distance(RotationMatrix::identity(), project_to_so3(raw));
    CHECK(std::abs(d - printed) <= 1e-3);
    CHECK(d == doctest::Approx(0.9997).epsilon(2e-4));

    for (int i = 0; i < 1000; ++i) {
        const RotationMatrix a = rng.rotation();
        const RotationMatrix b = rng.rotation();
        const double ab = attitude_distance(a, b);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(ab == doctest::Approx(attitude_distance(b, a)).epsilon(1e-14));
        const auto rt = testsupport::mul(testsupport::transpose(testsupport::to_mat(a.matrix())),
                                         testsupport::to_mat(b.matrix()));
        CHECK(ab == doctest::Approx(0.25 * (3.0 - testsupport::trace(rt))).epsilon(1e-12));
    }
}

TEST_CASE("Euler angles, ZYX convention") {
    const EulerAngles zero = to_euler(RotationMatrix::identity());
    CHECK(zero.roll == 0.0);
    CHECK(zero.pitch == 0.0);
    CHECK(zero.yaw == 0.0);

    const EulerAngles yaw = to_euler(exp_so3({0, 0, 0.3}));
    CHECK(yaw.roll == doctest::Approx(0.0));
    CHECK(yaw.pitch == doctest::Approx(0.0));
    CHECK(yaw.yaw == doctest::Approx(0.3).epsilon(1e-14));

    SUBCASE("composition order Rz(yaw) Ry(pitch) Rx(roll)") {
        const EulerAngles e{0.2, -0.4, 1.1};
        const Matrix3 expected =
            (exp_so3({0, 0, e.yaw}) * exp_so3({0, e.pitch, 0}) * exp_so3({e.roll, 0, 0})).matrix();
        CHECK(max_abs_diff(from_euler(e).matrix(), expected) <= 1e-14);
    }

    SUBCASE("random round trips") {
        Rng rng(9);
        for (int i = 0; i < 1000; ++i) {
            const RotationMatrix r = rng.rotation();
            const EulerAngles e = to_euler(r);
            CHECK(e.roll > -std::numbers::pi);
            CHECK(e.roll <= std::numbers::pi);
            CHECK(e.yaw > -std::numbers::pi);
            CHECK(e.yaw <= std::numbers::pi);
            CHECK(std::abs(e.pitch) <= std::numbers::pi / 2);
            CHECK(attitude_distance(r, from_euler(e)) < 1e-9);
        }
    }

    SUBCASE("gimbal lock folds yaw into roll") {
        const RotationMatrix r = from_euler({0.4, std::numbers::pi / 2, 0.7});
        const EulerAngles e = to_euler(r);
        CHECK(e.yaw == 0.0);
        CHECK(e.pitch == doctest::Approx(std::numbers::pi / 2));
        CHECK(attitude_distance(r, from_euler(e)) < 1e-9);
    }
}
