#include "toothsim/drilling.hpp"

#include "json_util.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace toothsim {

DrillScript::DrillScript(std::vector<DrillStep> steps) : steps_(std::move(steps)) {
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        const DrillStep& s = steps_[i];
        if (!std::isfinite(s.timestamp) || !isFinite(s.burTip.position) || !isFinite(s.burTip.orientation)) {
            throw Error("drill step " + std::to_string(i) + ": non-finite value");
        }
        if (!(s.burRadius > 0.0) || !std::isfinite(s.burRadius)) {
            throw Error("drill step " + std::to_string(i) + ": bur radius must be positive");
        }
        if (i > 0 && !(s.timestamp > steps_[i - 1].timestamp)) {
            throw Error("drill step " + std::to_string(i) + ": timestamps must be strictly increasing");
        }
    }
}

DrillScript DrillScript::concatenated(const DrillScript& other) const {
    std::vector<DrillStep> all = steps_;
    all.insert(all.end(), other.steps_.begin(), other.steps_.end());
    return DrillScript(std::move(all));
}

DrillScript parseDrillScript(std::string_view text) {
    std::vector<DrillStep> steps;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineNo = 0;
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
        ls.clear();
        ls.seekg(0);
        DrillStep s;
        std::string active;
        Vec3& p = s.burTip.position;
        Vec3& r = s.burTip.orientation;
        if (!(ls >> s.timestamp >> p.x >> p.y >> p.z >> r.x >> r.y >> r.z >> s.burRadius >> active)) {
            throw Error("drill script line " + std::to_string(lineNo) +
                        ": expected 't px py pz rx ry rz burRadius active'");
        }
        std::string extra;
        if (ls >> extra) {
            throw Error("drill script line " + std::to_string(lineNo) + ": trailing field '" + extra + "'");
        }
        if (active == "1" || active == "true") {
            s.drillingActive = true;
        } else if (active == "0" || active == "false") {
            s.drillingActive = false;
        } else {
            throw Error("drill script line " + std::to_string(lineNo) + ": active flag must be 0/1");
        }
        if (!steps.empty() && !(s.timestamp > steps.back().timestamp)) {
            throw Error("drill script line " + std::to_string(lineNo) + ": timestamps must be strictly increasing");
        }
        if (!(s.burRadius > 0.0)) {
            throw Error("drill script line " + std::to_string(lineNo) + ": bur radius must be positive");
        }
        steps.push_back(s);
    }
    return DrillScript(std::move(steps));
}

DrillScript loadDrillScript(const std::filesystem::path& path) {
    try {
        return parseDrillScript(detail::readFile(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string serializeDrillScript(const DrillScript& script) {
    std::string out = "# t px py pz rx ry rz burRadius active\n";
    char buf[256];
    for (const DrillStep& s : script.steps()) {
        const Vec3& p = s.burTip.position;
        const Vec3& r = s.burTip.orientation;
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %d\n", s.timestamp, p.x, p.y,
                      p.z, r.x, r.y, r.z, s.burRadius, s.drillingActive ? 1 : 0);
        out += buf;
    }
    return out;
}

namespace {

bool insideBur(const Sphere& s, const Vec3& tip, double radiusSquared) {
    return squaredNorm(s.center - tip) <= radiusSquared;
}

// Uniform hash over sphere centers for replaying many steps against one volume.
class CenterIndex {
public:
    CenterIndex(const SpherePackVolume& volume, double cell) : cell_(cell) {
        const auto& spheres = volume.spheres();
        for (std::uint32_t i = 0; i < spheres.size(); ++i) {
            if (!spheres[i].removed) {
                buckets_[key(coord(spheres[i].center.x), coord(spheres[i].center.y), coord(spheres[i].center.z))]
                    .push_back(i);
            }
        }
    }

    template <typename Fn>
    void forEachNear(const Vec3& p, double r, Fn&& fn) const {
        const auto x0 = coord(p.x - r), x1 = coord(p.x + r);
        const auto y0 = coord(p.y - r), y1 = coord(p.y + r);
        const auto z0 = coord(p.z - r), z1 = coord(p.z + r);
        for (auto z = z0; z <= z1; ++z) {
            for (auto y = y0; y <= y1; ++y) {
                for (auto x = x0; x <= x1; ++x) {
                    const auto it = buckets_.find(key(x, y, z));
                    if (it != buckets_.end()) {
                        for (std::uint32_t i : it->second) fn(i);
                    }
                }
            }
        }
    }

private:
    std::int64_t coord(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }
    static std::uint64_t key(std::int64_t x, std::int64_t y, std::int64_t z) {
        constexpr std::int64_t bias = 1 << 20;
        constexpr std::uint64_t mask = (1u << 21) - 1;
        return ((static_cast<std::uint64_t>(x + bias) & mask) << 42) |
               ((static_cast<std::uint64_t>(y + bias) & mask) << 21) | (static_cast<std::uint64_t>(z + bias) & mask);
    }

    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

} // namespace

std::size_t applyDrillStep(SpherePackVolume& volume, const Pose& burTip, double burRadius) {
    if (!(burRadius > 0.0)) {
        throw Error("bur radius must be positive");
    }
    const double r2 = burRadius * burRadius;
    std::size_t removed = 0;
    for (std::size_t i = 0; i < volume.size(); ++i) {
        const Sphere& s = volume.spheres()[i];
        if (!s.removed && insideBur(s, burTip.position, r2)) {
            volume.markRemoved(i);
            ++removed;
        }
    }
    return removed;
}

std::size_t ReplayResult::totalRemoved() const {
    std::size_t n = 0;
    for (const auto& e : log) n += e.removed;
    return n;
}

ReplayResult replay(const SpherePackVolume& volume, const DrillScript& script) {
    ReplayResult result{volume, {}};
    double maxRadius = 0.0;
    for (const auto& s : script.steps()) {
        if (s.drillingActive) maxRadius = std::max(maxRadius, s.burRadius);
    }
    if (maxRadius == 0.0) {
        for (std::size_t i = 0; i < script.size(); ++i) {
            result.log.push_back({i, script.steps()[i].timestamp, 0});
        }
        return result;
    }
    const CenterIndex index(volume, maxRadius);
    for (std::size_t i = 0; i < script.size(); ++i) {
        const DrillStep& step = script.steps()[i];
        StepRemoval entry{i, step.timestamp, 0};
        if (step.drillingActive) {
            const double r2 = step.burRadius * step.burRadius;
            index.forEachNear(step.burTip.position, step.burRadius, [&](std::uint32_t k) {
                const Sphere& s = result.volume.spheres()[k];
                if (!s.removed && insideBur(s, step.burTip.position, r2)) {
                    result.volume.markRemoved(k);
                    ++entry.removed;
                }
            });
        }
        result.log.push_back(entry);
    }
    return result;
}

std::string serializeRemovalLog(const std::vector<StepRemoval>& log) {
    std::string out = "step,timestamp,removed\n";
    char buf[96];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu\n", e.step, e.timestamp, e.removed);
        out += buf;
    }
    return out;
}

} // namespace toothsim
