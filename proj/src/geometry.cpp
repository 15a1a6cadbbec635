#include "toothsim/geometry.hpp"

namespace toothsim {

double normalizeAngle(double degrees) {
    if (!std::isfinite(degrees)) {
        throw Error("angle is not finite");
    }
    double r = std::fmod(degrees, 360.0);
    if (r > 180.0) {
        r -= 360.0;
    } else if (r <= -180.0) {
        r += 360.0;
    }
    return r;
}

Vec3 normalizeAngles(const Vec3& degrees) {
    return {normalizeAngle(degrees.x), normalizeAngle(degrees.y), normalizeAngle(degrees.z)};
}

} // namespace toothsim
