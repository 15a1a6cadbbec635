#pragma once

#include "toothsim/geometry.hpp"
#include "toothsim/mesh.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace toothsim {

/// One eye-tracker sample in the world frame (cm).
struct GazeSample {
    double timestamp = 0.0;  // s
    Vec3 leftEye;
    Vec3 rightEye;
    Vec3 direction;  // unit

    /// Throws if any value is non-finite or the direction is not unit within 1e-6.
    void validate() const;
};

struct Ray {
    Vec3 origin;
    Vec3 direction;
};

/// Ray from the midpoint between the eyes along the logged gaze direction.
Ray cyclopsRay(const GazeSample& sample);

struct RayHit {
    Vec3 point;
    double distance = 0.0;  // |point - origin|, in direction units
};

/// Nearest ray-triangle intersection with t >= 0 (Moller-Trumbore). Throws on an
/// empty mesh. Rays must have a unit direction for `distance` to equal t.
std::optional<RayHit> toothHit(const Ray& ray, const TriangleMesh& mesh);

/// Scales and translates a mesh, e.g. from tooth millimetres into the world frame in cm.
TriangleMesh placeMesh(const TriangleMesh& mesh, double scale, const Vec3& offset);

struct GazeHit {
    std::size_t sample = 0;  // index into TrialGazeLog::samples
    Vec3 point;
    double distance = 0.0;  // cyclops eye to hit point, cm
};

struct TrialGazeLog {
    std::string trialId;
    std::vector<GazeSample> samples;
    Vec3 toothCenter;
    std::vector<GazeHit> hits;

    /// Checks sample validity, nondecreasing timestamps and that hits index samples.
    void validate() const;
};

/// Fills `log.hits` by casting every sample's cyclops ray against `mesh` (world frame).
void detectHits(TrialGazeLog& log, const TriangleMesh& mesh, unsigned jobs = 0);

/// Mean of the per-hit eye-to-hit-point distances. Throws "no fixation" without hits.
double meanEyeToothDistance(const TrialGazeLog& log);

struct HmdConfig {
    unsigned perEyeWidth = 1440;
    unsigned perEyeHeight = 1600;
    double horizontalFov = 98.0;  // degrees per eye

    void validate() const;
};

/// Horizontal pixels covered by an object of `extent` at `distance` (same units):
/// width * 2 atan(extent / (2 distance)) / fov.
double pixelFootprint(double extent, double distance, const HmdConfig& hmd = {});

struct ScreenShare {
    double perEye = 0.0;    // footprint^2 / (width * height)
    double combined = 0.0;  // footprint^2 / (2 width * height), both eyes side by side
};

ScreenShare screenShare(double footprintPixels, const HmdConfig& hmd = {});

/// Plain-text gaze log. Each data line is `t lx ly lz rx ry rz dx dy dz`. Optional
/// directives: `trial <id>` and `tooth <x> <y> <z>`. `#` starts a comment.
TrialGazeLog parseGazeLog(const std::string& text, const std::string& defaultTrialId = "trial");
TrialGazeLog loadGazeLog(const std::filesystem::path& path);
std::string serializeGazeLog(const TrialGazeLog& log);

/// CSV with header trialId,hitCount,meanDistance. Trials without hits get an empty
/// meanDistance cell.
std::string gazeTrialCsv(const std::vector<TrialGazeLog>& logs);

} // namespace toothsim
