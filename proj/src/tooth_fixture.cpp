#include "toothsim/tooth_fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace toothsim {

namespace {

constexpr double kCrownCenterY = 11.0;
constexpr Vec3 kCrownSemiAxes{5.0, 3.5, 4.5};
constexpr Vec3 kCoreSemiAxes{3.9, 2.4, 3.4};
constexpr double kEnamelLineY = 9.0;
constexpr double kRootX = 2.4;
constexpr double kRootApexY = 1.0;
constexpr double kRootTopY = 9.0;
constexpr double kRootApexRadius = 0.7;
constexpr double kRootTopRadius = 1.8;
constexpr Vec3 kChamberCenter{0.0, 10.0, 0.0};
constexpr Vec3 kChamberSemiAxes{2.2, 1.1, 2.0};
constexpr double kCanalRadius = 0.3;
constexpr double kCanalApexY = 2.0;

double superEllipsoid(const Vec3& p, double cy, const Vec3& a) {
    const double x = p.x / a.x, y = (p.y - cy) / a.y, z = p.z / a.z;
    return x * x * x * x + y * y * y * y + z * z * z * z;
}

bool inRoot(const Vec3& p) {
    if (p.y < kRootApexY || p.y > kRootTopY) {
        return false;
    }
    const double f = (p.y - kRootApexY) / (kRootTopY - kRootApexY);
    const double r = kRootApexRadius + f * (kRootTopRadius - kRootApexRadius);
    for (double cx : {-kRootX, kRootX}) {
        const double dx = p.x - cx;
        if (dx * dx + p.z * p.z <= r * r) {
            return true;
        }
    }
    return false;
}

std::uint64_t spreadBits(std::uint64_t v) {
    v &= 0x1FFFFF;
    v = (v | v << 32) & 0x1F00000000FFFFULL;
    v = (v | v << 16) & 0x1F0000FF0000FFULL;
    v = (v | v << 8) & 0x100F00F00F00F00FULL;
    v = (v | v << 4) & 0x10C30C30C30C30C3ULL;
    v = (v | v << 2) & 0x1249249249249249ULL;
    return v;
}

} // namespace

Aabb ToothShape::bounds() const {
    Aabb b;
    b.min = {-kCrownSemiAxes.x, kRootApexY, -kCrownSemiAxes.z};
    b.max = {kCrownSemiAxes.x, kCrownCenterY + kCrownSemiAxes.y, kCrownSemiAxes.z};
    return b;
}

bool ToothShape::inTooth(const Vec3& p) const {
    return superEllipsoid(p, kCrownCenterY, kCrownSemiAxes) <= 1.0 || inRoot(p);
}

bool ToothShape::inPulp(const Vec3& p) const {
    const Vec3 d = p - kChamberCenter;
    const double e = d.x * d.x / (kChamberSemiAxes.x * kChamberSemiAxes.x) +
                     d.y * d.y / (kChamberSemiAxes.y * kChamberSemiAxes.y) +
                     d.z * d.z / (kChamberSemiAxes.z * kChamberSemiAxes.z);
    if (e <= 1.0) {
        return true;
    }
    if (p.y < kCanalApexY || p.y > kChamberCenter.y) {
        return false;
    }
    for (double cx : {-kRootX, kRootX}) {
        const double dx = p.x - cx;
        if (dx * dx + p.z * p.z <= kCanalRadius * kCanalRadius) {
            return true;
        }
    }
    return false;
}

bool ToothShape::inEnamel(const Vec3& p) const {
    return p.y > kEnamelLineY && superEllipsoid(p, kCrownCenterY, kCrownSemiAxes) <= 1.0 &&
           superEllipsoid(p, kCrownCenterY - 0.6, kCoreSemiAxes) > 1.0;
}

std::optional<Tissue> ToothShape::tissueAt(const Vec3& p) const {
    if (!inTooth(p)) {
        return std::nullopt;
    }
    if (inPulp(p)) {
        return Tissue::Pulp;
    }
    if (inEnamel(p)) {
        return Tissue::Enamel;
    }
    return Tissue::Dentin;
}

SpherePackVolume generateReferenceTooth(TissueCounts counts, std::uint64_t seed) {
    const ToothShape shape;
    const Aabb box = shape.bounds();
    const Vec3 ext = box.extent();
    std::mt19937_64 rng(seed);

    std::vector<Sphere> spheres;
    spheres.reserve(counts.total());
    TissueCounts accepted;
    TissueCounts hits;
    std::size_t draws = 0;
    const std::size_t maxDraws = 4000 * (counts.total() + 1000);
    while (accepted.enamel < counts.enamel || accepted.dentin < counts.dentin || accepted.pulp < counts.pulp) {
        if (++draws > maxDraws) {
            throw Error("tooth generation failed to fill tissue quotas");
        }
        const Vec3 p{box.min.x + ext.x * unitFromBits(rng()), box.min.y + ext.y * unitFromBits(rng()),
                     box.min.z + ext.z * unitFromBits(rng())};
        const auto tissue = shape.tissueAt(p);
        if (!tissue) {
            continue;
        }
        ++hits[*tissue];
        if (accepted[*tissue] < counts[*tissue]) {
            ++accepted[*tissue];
            spheres.push_back({p, 0.0, *tissue, false});
        }
    }

    // Radius equals the mean spacing within each tissue. Smaller radii leave sparse
    // spots of the random pack below the iso level, which show up as internal voids.
    const double boxVolume = ext.x * ext.y * ext.z;
    double radius[3] = {0.0, 0.0, 0.0};
    for (Tissue t : kAllTissues) {
        if (counts[t] == 0) continue;
        const double volume = boxVolume * static_cast<double>(hits[t]) / static_cast<double>(draws);
        radius[static_cast<int>(t)] = std::cbrt(volume / static_cast<double>(counts[t]));
    }
    for (Sphere& s : spheres) {
        s.radius = radius[static_cast<int>(s.tissue)];
    }

    std::vector<std::uint64_t> keys(spheres.size());
    for (std::size_t i = 0; i < spheres.size(); ++i) {
        const Vec3 q = spheres[i].center - box.min;
        auto quant = [](double v, double e) {
            return static_cast<std::uint64_t>(std::clamp(v / e, 0.0, 1.0) * 1023.0);
        };
        keys[i] = spreadBits(quant(q.x, ext.x)) | spreadBits(quant(q.y, ext.y)) << 1 |
                  spreadBits(quant(q.z, ext.z)) << 2;
    }
    std::vector<std::size_t> order(spheres.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<Sphere> sorted;
    sorted.reserve(spheres.size());
    for (std::size_t i : order) sorted.push_back(spheres[i]);
    return SpherePackVolume(std::move(sorted));
}

VoxelGrid carveCavity(const VoxelGrid& grid, const AccessCavity& cavity) {
    const GridSpec& spec = grid.spec();
    std::vector<std::uint8_t> labels = grid.labels();
    for (std::size_t k = 0; k < spec.dims.nz; ++k) {
        for (std::size_t j = 0; j < spec.dims.ny; ++j) {
            for (std::size_t i = 0; i < spec.dims.nx; ++i) {
                if (cavity.contains(spec.center(i, j, k))) {
                    labels[spec.index(i, j, k)] = kNoTissue;
                }
            }
        }
    }
    return VoxelGrid(spec, std::move(labels));
}

DrillScript accessOpeningScript(const AccessCavity& cavity, double burRadius, double spacing, double topY) {
    if (!(burRadius > 0.0) || !(spacing > 0.0)) {
        throw Error("bur radius and spacing must be positive");
    }
    std::vector<DrillStep> steps;
    double t = 0.0;
    const double x0 = cavity.minX + burRadius, x1 = cavity.maxX - burRadius;
    const double z0 = cavity.minZ + burRadius, z1 = cavity.maxZ - burRadius;
    const double y0 = cavity.floorY + burRadius;
    const auto nx = static_cast<int>(std::max(0.0, std::floor((x1 - x0) / spacing))) + 1;
    const auto nz = static_cast<int>(std::max(0.0, std::floor((z1 - z0) / spacing))) + 1;
    const auto ny = static_cast<int>(std::max(0.0, std::floor((topY - y0) / spacing))) + 1;
    for (int iz = 0; iz < nz; ++iz) {
        for (int ix = 0; ix < nx; ++ix) {
            const double x = nx == 1 ? 0.5 * (x0 + x1) : x0 + (x1 - x0) * ix / (nx - 1);
            const double z = nz == 1 ? 0.5 * (z0 + z1) : z0 + (z1 - z0) * iz / (nz - 1);
            // Lift out with the drill off before the next plunge.
            steps.push_back({t += 0.05, {{x, topY + 1.0, z}, {90.0, 0.0, 0.0}}, burRadius, false});
            for (int iy = 0; iy < ny; ++iy) {
                const double y = topY - (topY - y0) * iy / std::max(1, ny - 1);
                steps.push_back({t += 0.05, {{x, y, z}, {90.0, 0.0, 0.0}}, burRadius, true});
            }
        }
    }
    return DrillScript(std::move(steps));
}

std::vector<AccessCavity> syntheticCavities(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unitFromBits(rng()); };
    std::vector<AccessCavity> out;
    out.reserve(count);
    const AccessCavity ideal = kIdealAccessCavity;
    for (std::size_t n = 0; n < count; ++n) {
        AccessCavity c = ideal;
        // Walls move in (under-drilling) or out (over-drilling) independently; the floor
        // goes shallower or deeper.
        c.minX = ideal.minX + uniform(-1.6, 1.2);
        c.maxX = ideal.maxX + uniform(-1.2, 1.6);
        c.minZ = ideal.minZ + uniform(-1.4, 1.1);
        c.maxZ = ideal.maxZ + uniform(-1.1, 1.4);
        c.floorY = ideal.floorY + uniform(-2.0, 2.5);
        if (c.maxX - c.minX < 0.3) c.maxX = c.minX + 0.3;
        if (c.maxZ - c.minZ < 0.3) c.maxZ = c.minZ + 0.3;
        out.push_back(c);
    }
    return out;
}

} // namespace toothsim
