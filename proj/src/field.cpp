#include "toothsim/field.hpp"

#include <algorithm>
#include <cmath>

namespace toothsim {

double MetaballKernel::isoRadius(double sphereRadius) const {
    return support(sphereRadius) * std::sqrt(1.0 - std::sqrt(isoLevel));
}

void MetaballKernel::validate() const {
    if (!(supportScale > 0.0) || !std::isfinite(supportScale)) {
        throw Error("kernel support scale must be positive");
    }
    if (!(isoLevel > 0.0 && isoLevel < maxValue())) {
        throw Error("iso level must lie strictly between 0 and the kernel maximum");
    }
}

namespace {

std::uint64_t packCell(std::int64_t x, std::int64_t y, std::int64_t z) {
    constexpr std::int64_t bias = 1 << 20;
    constexpr std::uint64_t mask = (1u << 21) - 1;
    return ((static_cast<std::uint64_t>(x + bias) & mask) << 42) |
           ((static_cast<std::uint64_t>(y + bias) & mask) << 21) |
           (static_cast<std::uint64_t>(z + bias) & mask);
}

} // namespace

ScalarField::ScalarField(const SpherePackVolume& volume, MetaballKernel kernel) : kernel_(kernel) {
    kernel_.validate();
    const auto& spheres = volume.spheres();
    sources_.reserve(spheres.size());
    for (std::size_t i = 0; i < spheres.size(); ++i) {
        const Sphere& s = spheres[i];
        if (s.removed) {
            continue;
        }
        const double support = kernel_.support(s.radius);
        sources_.push_back({s.center, 1.0 / (support * support), support,
                            static_cast<std::uint32_t>(i), s.tissue});
        supportBox_.expand(s.center, support);
        maxSupport_ = std::max(maxSupport_, support);
    }
    for (std::uint32_t k = 0; k < sources_.size(); ++k) {
        const auto c = cellOf(sources_[k].center);
        hash_[packCell(c[0], c[1], c[2])].push_back(k);
    }
}

std::array<std::int64_t, 3> ScalarField::cellOf(const Vec3& p) const {
    const double inv = 1.0 / maxSupport_;
    return {static_cast<std::int64_t>(std::floor(p.x * inv)),
            static_cast<std::int64_t>(std::floor(p.y * inv)),
            static_cast<std::int64_t>(std::floor(p.z * inv))};
}

void ScalarField::candidates(const Vec3& p, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (sources_.empty() || !supportBox_.contains(p)) {
        return;
    }
    const auto c = cellOf(p);
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                const auto it = hash_.find(packCell(c[0] + dx, c[1] + dy, c[2] + dz));
                if (it != hash_.end()) {
                    out.insert(out.end(), it->second.begin(), it->second.end());
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
}

FieldSample ScalarField::sample(const Vec3& p) const {
    thread_local std::vector<std::uint32_t> cand;
    candidates(p, cand);
    FieldSample result;
    double best = 0.0;
    for (std::uint32_t k : cand) {
        const Source& s = sources_[k];
        const double dx = p.x - s.center.x;
        const double dy = p.y - s.center.y;
        const double dz = p.z - s.center.z;
        const double w = MetaballKernel::evaluate(dx * dx + (dy * dy + dz * dz), s.inverseSupportSquared);
        result.value += w;
        if (w > best) {
            best = w;
            result.dominantTissue = static_cast<std::uint8_t>(s.tissue);
        }
    }
    return result;
}

Vec3 ScalarField::gradient(const Vec3& p) const {
    thread_local std::vector<std::uint32_t> cand;
    candidates(p, cand);
    Vec3 g;
    for (std::uint32_t k : cand) {
        const Source& s = sources_[k];
        const Vec3 d = p - s.center;
        const double u = squaredNorm(d) * s.inverseSupportSquared;
        if (u >= 1.0) {
            continue;
        }
        // d/dp (1 - |d|^2 / R^2)^2 = -4 (1 - u) d / R^2
        g -= d * (4.0 * (1.0 - u) * s.inverseSupportSquared);
    }
    return g;
}

ScalarField buildField(const SpherePackVolume& volume, MetaballKernel kernel) {
    if (volume.empty()) {
        throw Error("empty volume");
    }
    return ScalarField(volume, kernel);
}

} // namespace toothsim
