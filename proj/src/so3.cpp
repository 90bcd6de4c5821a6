#include "so3fuzzy/so3.hpp"

#include <algorithm>
#include <numbers>

namespace so3fuzzy {

Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 1e-300) || !std::isfinite(n)) {
        throw std::domain_error("cannot normalize a zero or non-finite vector");
    }
    return v * (1.0 / n);
}

Matrix3 Matrix3::diagonal(const Vec3& d) {
    return Matrix3{{d.x, 0, 0, 0, d.y, 0, 0, 0, d.z}};
}

Matrix3 Matrix3::outer(const Vec3& a, const Vec3& b) {
    Matrix3 out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out(r, c) = a[r] * b[c];
    }
    return out;
}

Matrix3 Matrix3::transpose() const {
    Matrix3 out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out(c, r) = (*this)(r, c);
    }
    return out;
}

double Matrix3::determinant() const {
    const auto& a = *this;
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

double Matrix3::frobenius_norm() const {
    double s = 0.0;
    for (double v : m_) s += v * v;
    return std::sqrt(s);
}

bool Matrix3::is_finite() const {
    return std::all_of(m_.begin(), m_.end(), [](double v) { return std::isfinite(v); });
}

Matrix3& Matrix3::operator+=(const Matrix3& o) {
    for (std::size_t i = 0; i < 9; ++i) m_[i] += o.m_[i];
    return *this;
}

Matrix3& Matrix3::operator-=(const Matrix3& o) {
    for (std::size_t i = 0; i < 9; ++i) m_[i] -= o.m_[i];
    return *this;
}

Matrix3& Matrix3::operator*=(double s) {
    for (double& v : m_) v *= s;
    return *this;
}

Matrix3 operator*(const Matrix3& a, const Matrix3& b) {
    Matrix3 out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
        }
    }
    return out;
}

Vec3 operator*(const Matrix3& a, const Vec3& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

Matrix3 Matrix3::inverse() const {
    const double det = determinant();
    if (!(std::abs(det) > 1e-300)) throw std::domain_error("matrix is singular");
    const auto& a = *this;
    Matrix3 adj{{
        a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1),
        a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2),
        a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1),
        a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2),
        a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0),
        a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2),
        a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0),
        a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1),
        a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
    }};
    return adj * (1.0 / det);
}

SkewMatrix SkewMatrix::from_matrix(const Matrix3& m, double tolerance) {
    if (!m.is_finite()) throw std::invalid_argument("skew matrix has non-finite entries");
    double defect = 0.0;
    for (int r = 0; r < 3; ++r) {
        for (int c = r; c < 3; ++c) defect = std::max(defect, std::abs(m(r, c) + m(c, r)));
    }
    if (defect > tolerance) {
        throw std::invalid_argument("matrix is not antisymmetric (defect " + std::to_string(defect) + ")");
    }
    return pa(m);
}

Matrix3 SkewMatrix::matrix() const {
    const Vec3& v = axial_;
    return Matrix3{{0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0}};
}

SkewMatrix hat(const Vec3& v) { return SkewMatrix(v); }

SkewMatrix pa(const Matrix3& m) {
    return hat({0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)), 0.5 * (m(1, 0) - m(0, 1))});
}

double orthonormality_defect(const Matrix3& m) {
    return (m.transpose() * m - Matrix3::identity()).frobenius_norm();
}

RotationMatrix RotationMatrix::from_matrix(const Matrix3& m, double tolerance) {
    if (!m.is_finite()) throw std::invalid_argument("rotation matrix has non-finite entries");
    const double defect = orthonormality_defect(m);
    if (defect > tolerance) {
        throw std::invalid_argument("matrix is not orthonormal (defect " + std::to_string(defect) + ")");
    }
    if (!(m.determinant() > 0.0)) throw std::invalid_argument("matrix is a reflection (det <= 0)");
    return RotationMatrix(m);
}

Vec3 RotationMatrix::apply_transpose(const Vec3& v) const {
    return {m_(0, 0) * v.x + m_(1, 0) * v.y + m_(2, 0) * v.z,
            m_(0, 1) * v.x + m_(1, 1) * v.y + m_(2, 1) * v.z,
            m_(0, 2) * v.x + m_(1, 2) * v.y + m_(2, 2) * v.z};
}

RotationMatrix exp_so3(const Vec3& v) {
    const double angle = norm(v);
    if (angle < 1e-12) {
        const Matrix3 k = hat(v).matrix();
        return RotationMatrix(Matrix3::identity() + k + 0.5 * (k * k));
    }
    const Matrix3 k = hat(v * (1.0 / angle)).matrix();
    const double half_sin = std::sin(0.5 * angle);
    // 1 - cos(a) written as 2 sin^2(a/2) keeps precision for small angles.
    return RotationMatrix(Matrix3::identity() + std::sin(angle) * k + (2.0 * half_sin * half_sin) * (k * k));
}

RotationMatrix project_to_so3(const Matrix3& m) {
    if (!m.is_finite()) throw std::domain_error("cannot project a non-finite matrix");
    const double det = m.determinant();
    const double scale = m.frobenius_norm();
    if (!(std::abs(det) > 1e-12 * scale * scale * scale)) throw std::domain_error("cannot project a singular matrix");
    if (det < 0.0) throw std::domain_error("cannot project a reflection onto SO(3)");

    // Scaled Newton iteration for the orthogonal polar factor.
    Matrix3 x = m;
    for (int iter = 0; iter < 100; ++iter) {
        const Matrix3 inv_t = x.inverse().transpose();
        const double gamma = std::sqrt(inv_t.frobenius_norm() / x.frobenius_norm());
        const Matrix3 next = 0.5 * (gamma * x + (1.0 / gamma) * inv_t);
        const double change = (next - x).frobenius_norm();
        x = next;
        if (change < 1e-15) break;
    }
    // One unscaled step polishes the last ulps.
    x = 0.5 * (x + x.inverse().transpose());
    return RotationMatrix(x);
}

double attitude_distance(const RotationMatrix& r, const RotationMatrix& rhat) {
    // Tr{R^T Rhat} is the elementwise inner product of R and Rhat.
    double tr = 0.0;
    for (std::size_t i = 0; i < 9; ++i) tr += r.matrix().data()[i] * rhat.matrix().data()[i];
    return std::clamp(0.25 * (3.0 - tr), 0.0, 1.0);
}

namespace {

double wrap_pi(double a) {
    // atan2 yields [-pi, pi]; the half-open range excludes -pi.
    return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

}  // namespace

EulerAngles to_euler(const RotationMatrix& r) {
    EulerAngles e;
    e.pitch = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
    if (std::abs(std::abs(e.pitch) - 0.5 * std::numbers::pi) < 1e-6) {
        e.yaw = 0.0;
        e.roll = wrap_pi(std::atan2(-r(1, 2), r(1, 1)));
        return e;
    }
    e.roll = wrap_pi(std::atan2(r(2, 1), r(2, 2)));
    e.yaw = wrap_pi(std::atan2(r(1, 0), r(0, 0)));
    return e;
}

RotationMatrix from_euler(const EulerAngles& e) {
    const double cr = std::cos(e.roll), sr = std::sin(e.roll);
    const double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
    const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
    return RotationMatrix(Matrix3{{
        cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
        sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
        -sp,     cp * sr,                cp * cr,
    }});
}

}  // namespace so3fuzzy
