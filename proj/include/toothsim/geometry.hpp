#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace toothsim {

/// Library-wide error type. Every precondition violation surfaces as one of these.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr double squaredNorm(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    return n > 0.0 ? a * (1.0 / n) : a;
}
inline bool isFinite(const Vec3& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// Axis-aligned box. Default-constructed boxes are empty (min > max).
struct Aabb {
    Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
    Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};

    bool empty() const { return min.x > max.x || min.y > max.y || min.z > max.z; }
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return (min + max) * 0.5; }

    void expand(const Vec3& p) {
        min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
        max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
    }
    void expand(const Vec3& p, double r) {
        expand(p - Vec3{r, r, r});
        expand(p + Vec3{r, r, r});
    }
    bool contains(const Vec3& p, double tol = 0.0) const {
        return p.x >= min.x - tol && p.y >= min.y - tol && p.z >= min.z - tol &&
               p.x <= max.x + tol && p.y <= max.y + tol && p.z <= max.z + tol;
    }
    /// True when every axis has positive, finite extent.
    bool nonDegenerate() const {
        const Vec3 e = extent();
        return isFinite(min) && isFinite(max) && e.x > 0.0 && e.y > 0.0 && e.z > 0.0;
    }
};

/// Position plus per-axis Euler angles in degrees. Units of `position` depend on
/// context: millimetres in the tooth frame, centimetres in the VR/table frame.
struct Pose {
    Vec3 position;
    Vec3 orientation;

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Wraps an angle in degrees into (-180, 180]. +180 stays +180, -180 maps to +180.
double normalizeAngle(double degrees);
Vec3 normalizeAngles(const Vec3& degrees);

} // namespace toothsim
