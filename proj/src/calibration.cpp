#include "toothsim/calibration.hpp"

#include "json_util.hpp"

#include <cmath>

namespace toothsim {

namespace {

void requireFinite(const Pose& p, const char* what) {
    if (!isFinite(p.position) || !isFinite(p.orientation)) {
        throw Error(std::string(what) + " pose is not finite");
    }
}

Vec3 parseAxis(const std::string& text, const char* role) {
    if (text.size() == 2 && (text[0] == '+' || text[0] == '-')) {
        const double sign = text[0] == '+' ? 1.0 : -1.0;
        switch (text[1]) {
        case 'x': return {sign, 0.0, 0.0};
        case 'y': return {0.0, sign, 0.0};
        case 'z': return {0.0, 0.0, sign};
        default: break;
        }
    }
    throw Error(std::string("table frame ") + role + " axis '" + text + "' is not one of +x,-x,+y,-y,+z,-z");
}

const TableFrame& requireFrame(const std::optional<TableFrame>& frame) {
    if (!frame || frame->down.empty() || frame->forward.empty()) {
        throw Error("misalignment needs a table frame with declared down and forward axes");
    }
    if (dot(frame->downAxis(), frame->forwardAxis()) != 0.0) {
        throw Error("table frame down and forward axes must be perpendicular");
    }
    return *frame;
}

Vec3 readVec3(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) {
        throw Error(what + ": expected an array of 3 numbers");
    }
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) {
            throw Error(what + ": expected an array of 3 numbers");
        }
        v[i] = j[i].get<double>();
    }
    if (!isFinite(v)) {
        throw Error(what + ": non-finite value");
    }
    return v;
}

Pose readPose(const nlohmann::json& j, const std::string& what) {
    if (!j.is_object()) {
        throw Error(what + ": expected an object with position and orientation");
    }
    Pose p;
    p.position = readVec3(j.value("position", nlohmann::json()), what + ".position");
    p.orientation = j.contains("orientation") ? readVec3(j["orientation"], what + ".orientation") : Vec3{};
    return p;
}

nlohmann::json toJson(const Vec3& v) {
    return {v.x, v.y, v.z};
}

nlohmann::json toJson(const Pose& p) {
    return {{"position", toJson(p.position)}, {"orientation", toJson(p.orientation)}};
}

} // namespace

void CalibrationOffset::validate() const {
    if (!isFinite(translation) || !isFinite(rotation)) {
        throw Error("calibration offset is not finite");
    }
}

Pose targetControllerPose(const Pose& mirror, const CalibrationOffset& offset) {
    requireFinite(mirror, "mirror");
    offset.validate();
    return {mirror.position + offset.translation, normalizeAngles(mirror.orientation + offset.rotation)};
}

Pose cameraCorrection(const Pose& target, const Pose& measured) {
    requireFinite(target, "target");
    requireFinite(measured, "measured");
    return {target.position - measured.position, normalizeAngles(target.orientation - measured.orientation)};
}

Pose applyCorrection(const Pose& measured, const Pose& delta) {
    requireFinite(measured, "measured");
    requireFinite(delta, "correction");
    return {measured.position + delta.position, normalizeAngles(measured.orientation + delta.orientation)};
}

Vec3 TableFrame::downAxis() const {
    return parseAxis(down, "down");
}

Vec3 TableFrame::forwardAxis() const {
    return parseAxis(forward, "forward");
}

Pose applyMisalignment(const Pose& device, const std::optional<TableFrame>& frame) {
    const TableFrame& f = requireFrame(frame);
    requireFinite(device, "device");
    return {device.position + f.downAxis() * kMisalignDown + f.forwardAxis() * kMisalignForward, device.orientation};
}

Pose removeMisalignment(const Pose& device, const std::optional<TableFrame>& frame) {
    const TableFrame& f = requireFrame(frame);
    requireFinite(device, "device");
    return {device.position - f.downAxis() * kMisalignDown - f.forwardAxis() * kMisalignForward, device.orientation};
}

AlignmentResidual alignmentResidual(const Pose& target, const Pose& achieved) {
    requireFinite(target, "target");
    requireFinite(achieved, "achieved");
    const Vec3 dAngle = normalizeAngles(target.orientation - achieved.orientation);
    return {distance(target.position, achieved.position),
            std::max({std::fabs(dAngle.x), std::fabs(dAngle.y), std::fabs(dAngle.z)})};
}

CalibrationConfig parseCalibrationConfig(const std::string& text) {
    const nlohmann::json doc = detail::parseJson(text, "calibration config");
    if (!doc.is_object()) {
        throw Error("calibration config: top level must be an object");
    }
    CalibrationConfig c;
    if (!doc.contains("mirrorOrigin")) {
        throw Error("calibration config: missing mirrorOrigin");
    }
    c.mirrorOrigin = readPose(doc["mirrorOrigin"], "mirrorOrigin");
    if (doc.contains("drillOrigin")) {
        c.drillOrigin = readPose(doc["drillOrigin"], "drillOrigin");
    }
    if (doc.contains("offset")) {
        const auto& o = doc["offset"];
        if (!o.is_object() || !o.contains("translation") || !o.contains("rotation")) {
            throw Error("calibration config: offset needs translation and rotation");
        }
        c.offset = {readVec3(o["translation"], "offset.translation"), readVec3(o["rotation"], "offset.rotation")};
    }
    if (doc.contains("frame")) {
        const auto& f = doc["frame"];
        if (!f.is_object() || !f.contains("down") || !f.contains("forward") || !f["down"].is_string() ||
            !f["forward"].is_string()) {
            throw Error("calibration config: frame needs string axes down and forward");
        }
        c.frame = TableFrame{f["down"].get<std::string>(), f["forward"].get<std::string>()};
        (void)c.frame->downAxis();
        (void)c.frame->forwardAxis();
    }
    if (doc.contains("measuredController")) {
        c.measuredController = readPose(doc["measuredController"], "measuredController");
    }
    if (doc.contains("misaligned")) {
        if (!doc["misaligned"].is_boolean()) {
            throw Error("calibration config: misaligned must be true or false");
        }
        c.misaligned = doc["misaligned"].get<bool>();
    }
    return c;
}

CalibrationConfig loadCalibrationConfig(const std::filesystem::path& path) {
    return parseCalibrationConfig(detail::readFile(path));
}

std::string calibrationAuditJson(const CalibrationConfig& config, int indent) {
    nlohmann::json out;
    out["mirrorOrigin"] = toJson(config.mirrorOrigin);
    if (config.drillOrigin) {
        out["drillOrigin"] = toJson(*config.drillOrigin);
    }
    out["offset"] = {{"translation", toJson(config.offset.translation)}, {"rotation", toJson(config.offset.rotation)}};
    Pose mirror = config.mirrorOrigin;
    if (config.misaligned) {
        mirror = applyMisalignment(mirror, config.frame);
        out["misalignedMirror"] = toJson(mirror);
    }
    const Pose target = targetControllerPose(mirror, config.offset);
    out["targetController"] = toJson(target);
    if (config.measuredController) {
        const Pose delta = cameraCorrection(target, *config.measuredController);
        const Pose corrected = applyCorrection(*config.measuredController, delta);
        const AlignmentResidual res = alignmentResidual(target, corrected);
        out["measuredController"] = toJson(*config.measuredController);
        out["cameraCorrection"] = toJson(delta);
        out["correctedController"] = toJson(corrected);
        out["residual"] = {{"position", res.position}, {"angle", res.angle}};
    }
    return out.dump(indent) + "\n";
}

} // namespace toothsim
