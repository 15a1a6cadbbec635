#pragma once

#include "toothsim/geometry.hpp"
#include "toothsim/volume.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace toothsim {

struct DrillStep {
    double timestamp = 0.0;  // s
    Pose burTip;             // mm, degrees
    double burRadius = 0.0;  // mm
    bool drillingActive = true;
};

/// Recorded bur trajectory. Timestamps strictly increase and every radius is positive.
class DrillScript {
public:
    DrillScript() = default;
    explicit DrillScript(std::vector<DrillStep> steps);

    const std::vector<DrillStep>& steps() const { return steps_; }
    std::size_t size() const { return steps_.size(); }
    bool empty() const { return steps_.empty(); }

    /// Appends `other`; its first timestamp must exceed this script's last.
    DrillScript concatenated(const DrillScript& other) const;

private:
    std::vector<DrillStep> steps_;
};

/// Text format, one step per line, '#' starts a comment:
///   t px py pz rx ry rz burRadius active
/// `active` is 1/0 (or true/false).
DrillScript parseDrillScript(std::string_view text);
DrillScript loadDrillScript(const std::filesystem::path& path);
std::string serializeDrillScript(const DrillScript& script);

/// Removes every non-removed sphere whose center lies within `burRadius` of the bur tip
/// (distance <= radius). Returns how many were removed. Bur orientation is ignored.
std::size_t applyDrillStep(SpherePackVolume& volume, const Pose& burTip, double burRadius);

struct StepRemoval {
    std::size_t step = 0;
    double timestamp = 0.0;
    std::size_t removed = 0;
};

struct ReplayResult {
    SpherePackVolume volume;
    std::vector<StepRemoval> log;  // one entry per script step
    std::size_t totalRemoved() const;
};

/// Sequential application of the active steps to a copy of `volume`.
ReplayResult replay(const SpherePackVolume& volume, const DrillScript& script);

std::string serializeRemovalLog(const std::vector<StepRemoval>& log);

} // namespace toothsim
