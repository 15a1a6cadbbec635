#pragma once

#include "toothsim/geometry.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace toothsim {

/// Rigid offset between the mirror device origin and the tracked controller, applied
/// componentwise (positions in cm, Euler angles in degrees).
struct CalibrationOffset {
    Vec3 translation;
    Vec3 rotation;

    void validate() const;
};

/// Offset of the physical rig: 22 cm, 26 cm, -7 cm and a quarter turn about z.
inline constexpr CalibrationOffset kRigOffset{{22.0, 26.0, -7.0}, {0.0, 0.0, 90.0}};

/// Where the controller should be: mirror pose plus offset, angles normalized.
Pose targetControllerPose(const Pose& mirror, const CalibrationOffset& offset);

/// Delta that moves the measured controller pose onto the target. Angles are
/// normalized per component.
Pose cameraCorrection(const Pose& target, const Pose& measured);

/// Applies a correction delta to a pose (positions added, angles added and normalized).
Pose applyCorrection(const Pose& measured, const Pose& delta);

/// Axis-aligned table frame. Each axis is one of +x, -x, +y, -y, +z, -z.
struct TableFrame {
    std::string down;
    std::string forward;

    Vec3 downAxis() const;
    Vec3 forwardAxis() const;
};

inline constexpr double kMisalignDown = 20.0;     // cm
inline constexpr double kMisalignForward = 50.0;  // cm

/// Moves the device 20 cm along `down` and 50 cm along `forward`. Throws when the frame
/// axes are undeclared, malformed or parallel.
Pose applyMisalignment(const Pose& device, const std::optional<TableFrame>& frame);
Pose removeMisalignment(const Pose& device, const std::optional<TableFrame>& frame);

struct AlignmentResidual {
    double position = 0.0;  // cm, Euclidean
    double angle = 0.0;     // degrees, largest absolute normalized component
};

AlignmentResidual alignmentResidual(const Pose& target, const Pose& achieved);

/// Calibration setup as read from JSON:
/// {"mirrorOrigin": {"position": [..], "orientation": [..]},
///  "drillOrigin": {...},                      optional, recorded only
///  "offset": {"translation": [..], "rotation": [..]},   optional, defaults to the rig
///  "frame": {"down": "-z", "forward": "+x"},  optional
///  "measuredController": {...},               optional
///  "misaligned": false}
struct CalibrationConfig {
    Pose mirrorOrigin;
    std::optional<Pose> drillOrigin;
    CalibrationOffset offset = kRigOffset;
    std::optional<TableFrame> frame;
    std::optional<Pose> measuredController;
    bool misaligned = false;
};

CalibrationConfig parseCalibrationConfig(const std::string& text);
CalibrationConfig loadCalibrationConfig(const std::filesystem::path& path);

/// Audit of the whole chain: mirror -> (misalignment) -> target -> correction.
std::string calibrationAuditJson(const CalibrationConfig& config, int indent = 2);

} // namespace toothsim
