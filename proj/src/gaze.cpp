#include "toothsim/gaze.hpp"

#include "json_util.hpp"
#include "parallel.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace toothsim {

void GazeSample::validate() const {
    if (!std::isfinite(timestamp) || !isFinite(leftEye) || !isFinite(rightEye) || !isFinite(direction)) {
        throw Error("gaze sample is not finite");
    }
    if (std::fabs(norm(direction) - 1.0) > 1e-6) {
        throw Error("gaze direction is not unit length");
    }
}

Ray cyclopsRay(const GazeSample& sample) {
    sample.validate();
    return {(sample.leftEye + sample.rightEye) * 0.5, sample.direction};
}

std::optional<RayHit> toothHit(const Ray& ray, const TriangleMesh& mesh) {
    if (mesh.empty()) {
        throw Error("ray cast against an empty mesh");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& tri : mesh.triangles) {
        const Vec3& a = mesh.vertices[tri[0]];
        const Vec3 e1 = mesh.vertices[tri[1]] - a;
        const Vec3 e2 = mesh.vertices[tri[2]] - a;
        const Vec3 p = cross(ray.direction, e2);
        const double det = dot(e1, p);
        // Parallel to the triangle plane, relative to the triangle's size.
        if (std::fabs(det) <= 1e-14 * squaredNorm(e1) + 1e-300) {
            continue;
        }
        const double inv = 1.0 / det;
        const Vec3 s = ray.origin - a;
        const double u = dot(s, p) * inv;
        if (u < 0.0 || u > 1.0) {
            continue;
        }
        const Vec3 q = cross(s, e1);
        const double v = dot(ray.direction, q) * inv;
        if (v < 0.0 || u + v > 1.0) {
            continue;
        }
        const double t = dot(e2, q) * inv;
        if (t >= 0.0 && t < best) {
            best = t;
        }
    }
    if (!std::isfinite(best)) {
        return std::nullopt;
    }
    const Vec3 point = ray.origin + ray.direction * best;
    return RayHit{point, distance(point, ray.origin)};
}

TriangleMesh placeMesh(const TriangleMesh& mesh, double scale, const Vec3& offset) {
    if (!(scale > 0.0) || !std::isfinite(scale) || !isFinite(offset)) {
        throw Error("mesh placement needs a positive scale and finite offset");
    }
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) {
        v = v * scale + offset;
    }
    return out;
}

void TrialGazeLog::validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].validate();
        if (i > 0 && samples[i].timestamp < samples[i - 1].timestamp) {
            throw Error("gaze log " + trialId + ": timestamps decrease at sample " + std::to_string(i));
        }
    }
    for (const GazeHit& h : hits) {
        if (h.sample >= samples.size()) {
            throw Error("gaze log " + trialId + ": hit refers to a missing sample");
        }
    }
}

void detectHits(TrialGazeLog& log, const TriangleMesh& mesh, unsigned jobs) {
    log.validate();
    if (mesh.empty()) {
        throw Error("ray cast against an empty mesh");
    }
    std::vector<std::optional<RayHit>> found(log.samples.size());
    detail::parallelFor(log.samples.size(), jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            found[i] = toothHit(cyclopsRay(log.samples[i]), mesh);
        }
    });
    log.hits.clear();
    for (std::size_t i = 0; i < found.size(); ++i) {
        if (found[i]) {
            log.hits.push_back({i, found[i]->point, found[i]->distance});
        }
    }
}

double meanEyeToothDistance(const TrialGazeLog& log) {
    if (log.hits.empty()) {
        throw Error("no fixation: trial " + log.trialId + " has no tooth hits");
    }
    double sum = 0.0;
    for (const GazeHit& h : log.hits) {
        sum += h.distance;
    }
    return sum / static_cast<double>(log.hits.size());
}

void HmdConfig::validate() const {
    if (perEyeWidth == 0 || perEyeHeight == 0 || !(horizontalFov > 0.0) || !(horizontalFov < 360.0)) {
        throw Error("HMD resolution and field of view must be positive");
    }
}

double pixelFootprint(double extent, double dist, const HmdConfig& hmd) {
    hmd.validate();
    if (!(extent > 0.0) || !(dist > 0.0) || !std::isfinite(extent) || !std::isfinite(dist)) {
        throw Error("pixel footprint needs positive extent and distance");
    }
    const double angleDeg = 2.0 * std::atan(extent / (2.0 * dist)) * 180.0 / std::numbers::pi;
    return hmd.perEyeWidth * angleDeg / hmd.horizontalFov;
}

ScreenShare screenShare(double footprintPixels, const HmdConfig& hmd) {
    hmd.validate();
    const double area = footprintPixels * footprintPixels;
    const double eyePixels = static_cast<double>(hmd.perEyeWidth) * hmd.perEyeHeight;
    return {area / eyePixels, area / (2.0 * eyePixels)};
}

TrialGazeLog parseGazeLog(const std::string& text, const std::string& defaultTrialId) {
    TrialGazeLog log;
    log.trialId = defaultTrialId;
    std::istringstream in(text);
    std::string line;
    std::size_t lineNo = 0;
    auto fail = [&](const std::string& msg) {
        throw Error("gaze log line " + std::to_string(lineNo) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) {
            continue;
        }
        if (first == "trial") {
            if (!(ls >> log.trialId)) fail("trial directive needs an id");
            continue;
        }
        if (first == "tooth") {
            if (!(ls >> log.toothCenter.x >> log.toothCenter.y >> log.toothCenter.z)) {
                fail("tooth directive needs 3 numbers");
            }
            continue;
        }
        GazeSample s;
        try {
            std::size_t used = 0;
            s.timestamp = std::stod(first, &used);
            if (used != first.size()) fail("bad timestamp '" + first + "'");
        } catch (const std::logic_error&) {
            fail("bad timestamp '" + first + "'");
        }
        if (!(ls >> s.leftEye.x >> s.leftEye.y >> s.leftEye.z >> s.rightEye.x >> s.rightEye.y >> s.rightEye.z >>
              s.direction.x >> s.direction.y >> s.direction.z)) {
            fail("expected 10 numbers: t lx ly lz rx ry rz dx dy dz");
        }
        std::string extra;
        if (ls >> extra) fail("trailing field '" + extra + "'");
        try {
            s.validate();
        } catch (const Error& e) {
            fail(e.what());
        }
        if (!log.samples.empty() && s.timestamp < log.samples.back().timestamp) {
            fail("timestamps must be nondecreasing");
        }
        log.samples.push_back(s);
    }
    return log;
}

TrialGazeLog loadGazeLog(const std::filesystem::path& path) {
    return parseGazeLog(detail::readFile(path), path.stem().string());
}

std::string serializeGazeLog(const TrialGazeLog& log) {
    std::ostringstream out;
    char buf[512];
    out << "trial " << log.trialId << "\n";
    std::snprintf(buf, sizeof buf, "tooth %.17g %.17g %.17g\n", log.toothCenter.x, log.toothCenter.y,
                  log.toothCenter.z);
    out << buf;
    for (const GazeSample& s : log.samples) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", s.timestamp,
                      s.leftEye.x, s.leftEye.y, s.leftEye.z, s.rightEye.x, s.rightEye.y, s.rightEye.z, s.direction.x,
                      s.direction.y, s.direction.z);
        out << buf;
    }
    return out.str();
}

std::string gazeTrialCsv(const std::vector<TrialGazeLog>& logs) {
    std::ostringstream out;
    out << "trialId,hitCount,meanDistance\n";
    char buf[64];
    for (const TrialGazeLog& log : logs) {
        out << log.trialId << "," << log.hits.size() << ",";
        if (!log.hits.empty()) {
            std::snprintf(buf, sizeof buf, "%.10g", meanEyeToothDistance(log));
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

} // namespace toothsim
