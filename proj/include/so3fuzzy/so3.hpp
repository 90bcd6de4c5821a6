#pragma once

/**
 * @file so3.hpp
 * @brief Fixed-size linear algebra and Lie-group operators on SO(3).
 *
 * Everything here is a small value type. Rotation matrices act on column
 * vectors; a RotationMatrix R maps body-frame coordinates to the inertial
 * frame, so R^T v^I is the body-frame view of an inertial direction.
 *
 * Euler angles follow the ZYX (yaw-pitch-roll) sequence:
 *   R = Rz(yaw) * Ry(pitch) * Rx(roll)
 */

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace so3fuzzy {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

/// Returns v / |v|. Throws std::domain_error for a (near) zero vector.
Vec3 normalized(const Vec3& v);

/// Dense 3x3 matrix, row-major.
class Matrix3 {
public:
    constexpr Matrix3() = default;
    constexpr explicit Matrix3(const std::array<double, 9>& row_major) : m_(row_major) {}

    static constexpr Matrix3 zero() { return Matrix3{}; }
    static constexpr Matrix3 identity() { return Matrix3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
    static Matrix3 diagonal(const Vec3& d);
    static Matrix3 outer(const Vec3& a, const Vec3& b);

    constexpr double operator()(int r, int c) const { return m_[static_cast<std::size_t>(3 * r + c)]; }
    constexpr double& operator()(int r, int c) { return m_[static_cast<std::size_t>(3 * r + c)]; }
    const std::array<double, 9>& data() const { return m_; }

    Vec3 row(int r) const { return {(*this)(r, 0), (*this)(r, 1), (*this)(r, 2)}; }
    Vec3 col(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }

    Matrix3 transpose() const;
    double trace() const { return m_[0] + m_[4] + m_[8]; }
    double determinant() const;
    double frobenius_norm() const;
    bool is_finite() const;

    Matrix3& operator+=(const Matrix3& o);
    Matrix3& operator-=(const Matrix3& o);
    Matrix3& operator*=(double s);

    friend Matrix3 operator+(Matrix3 a, const Matrix3& b) { return a += b; }
    friend Matrix3 operator-(Matrix3 a, const Matrix3& b) { return a -= b; }
    friend Matrix3 operator*(Matrix3 a, double s) { return a *= s; }
    friend Matrix3 operator*(double s, Matrix3 a) { return a *= s; }
    friend Matrix3 operator*(const Matrix3& a, const Matrix3& b);
    friend Vec3 operator*(const Matrix3& a, const Vec3& v);
    friend bool operator==(const Matrix3&, const Matrix3&) = default;

    /// Inverse via adjugate. Throws std::domain_error when |det| < 1e-300.
    Matrix3 inverse() const;

private:
    std::array<double, 9> m_{};
};

/// Element of so(3). Only the three generating scalars are stored, so
/// S^T = -S holds by construction.
class SkewMatrix {
public:
    constexpr SkewMatrix() = default;

    /// Builds a skew matrix from untrusted data. Throws std::invalid_argument
    /// when max |M + M^T| exceeds `tolerance`.
    static SkewMatrix from_matrix(const Matrix3& m, double tolerance = 1e-9);

    Matrix3 matrix() const;
    constexpr const Vec3& axial() const { return axial_; }

    /// S * w, i.e. axial x w.
    Vec3 apply(const Vec3& w) const { return cross(axial_, w); }

private:
    friend SkewMatrix hat(const Vec3& v);
    constexpr explicit SkewMatrix(const Vec3& axial) : axial_(axial) {}
    Vec3 axial_{};
};

/// [v]x such that hat(v) * w = v x w.
SkewMatrix hat(const Vec3& v);

/// Inverse of hat.
inline Vec3 vex(const SkewMatrix& s) { return s.axial(); }

/// Anti-symmetric projection (M - M^T) / 2.
SkewMatrix pa(const Matrix3& m);

/// Orthonormality defect |R^T R - I|_F.
double orthonormality_defect(const Matrix3& m);

struct EulerAngles {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
};

class RotationMatrix {
public:
    RotationMatrix() : m_(Matrix3::identity()) {}

    static RotationMatrix identity() { return RotationMatrix{}; }

    /// Validates orthonormality (defect <= tolerance) and det > 0.
    static RotationMatrix from_matrix(const Matrix3& m, double tolerance = 1e-9);

    const Matrix3& matrix() const { return m_; }
    double operator()(int r, int c) const { return m_(r, c); }

    RotationMatrix transpose() const { return RotationMatrix(m_.transpose()); }
    Vec3 apply(const Vec3& v) const { return m_ * v; }
    Vec3 apply_transpose(const Vec3& v) const;

    friend RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) {
        return RotationMatrix(a.m_ * b.m_);
    }

private:
    friend RotationMatrix exp_so3(const Vec3& v);
    friend RotationMatrix project_to_so3(const Matrix3& m);
    friend RotationMatrix from_euler(const EulerAngles& e);
    explicit RotationMatrix(const Matrix3& m) : m_(m) {}
    Matrix3 m_;
};

/// Rodrigues exponential. Falls back to I + [v]x + [v]x^2/2 when |v| < 1e-12.
RotationMatrix exp_so3(const Vec3& v);

/// Closest rotation in Frobenius norm (orthogonal polar factor).
/// Throws std::domain_error on singular input or when the polar factor
/// would be a reflection (det(M) < 0).
RotationMatrix project_to_so3(const Matrix3& m);

/// Normalized Euclidean distance 1/4 Tr{I - R^T Rhat}, in [0, 1].
double attitude_distance(const RotationMatrix& r, const RotationMatrix& rhat);

/// ZYX decomposition. Within 1e-6 of gimbal lock, yaw is set to 0 and the
/// remaining freedom is reported as roll.
EulerAngles to_euler(const RotationMatrix& r);
RotationMatrix from_euler(const EulerAngles& e);

}  // namespace so3fuzzy
