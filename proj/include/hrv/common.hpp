#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hrv {

using Vec2 = std::array<double, 2>;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline Vec2 add(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 scale(const Vec2& a, double s) { return {a[0] * s, a[1] * s}; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

// Row-major 2x2 matrix; enough linear algebra for this project.
struct Mat2 {
    double m00 = 0, m01 = 0, m10 = 0, m11 = 0;

    static Mat2 identity() { return {1, 0, 0, 1}; }
    double det() const { return m00 * m11 - m01 * m10; }
    bool symmetric(double tol = 1e-12) const { return std::abs(m01 - m10) <= tol; }

    Vec2 mul(const Vec2& v) const { return {m00 * v[0] + m01 * v[1], m10 * v[0] + m11 * v[1]}; }

    // Lower-triangular Cholesky factor; requires SPD.
    Mat2 cholesky() const;

    Vec2 solve(const Vec2& rhs) const;

    bool positive_definite() const {
        return m00 > 0 && det() > 0;
    }
};

inline Mat2 Mat2::cholesky() const {
    if (!symmetric(1e-9) || !positive_definite())
        throw std::invalid_argument("matrix must be symmetric positive definite");
    Mat2 l;
    l.m00 = std::sqrt(m00);
    l.m10 = m10 / l.m00;
    l.m11 = std::sqrt(m11 - l.m10 * l.m10);
    return l;
}

inline Vec2 Mat2::solve(const Vec2& rhs) const {
    const double d = det();
    if (std::abs(d) < 1e-300) throw std::runtime_error("singular 2x2 system");
    return {(m11 * rhs[0] - m01 * rhs[1]) / d, (m00 * rhs[1] - m10 * rhs[0]) / d};
}

// Error taxonomy. The CLI maps ConfigError to exit 3 and the rest to exit 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct DegenerateModelError : Error { using Error::Error; };
struct NoRootError : Error { using Error::Error; };
struct NegativeDriftError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };
struct OutsideDomainError : Error { using Error::Error; };
struct TraceDivergedError : Error { using Error::Error; };
struct OpenArcError : Error { using Error::Error; };
struct NotFoundError : Error { using Error::Error; };
struct NonContractingError : Error { using Error::Error; };
struct RejectionStallError : Error { using Error::Error; };
struct NonTransientError : Error { using Error::Error; };
struct GroupMismatchError : Error { using Error::Error; };

}  // namespace hrv
