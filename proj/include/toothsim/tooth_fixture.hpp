#pragma once

#include "toothsim/drilling.hpp"
#include "toothsim/volume.hpp"
#include "toothsim/voxel_grid.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace toothsim {

/// Procedural lower-molar stand-in (mm): boxy crown, two tapered roots, a pulp chamber
/// with canals, and an enamel cap over the crown above the cemento-enamel line.
/// The long axis is +y, occlusal surface on top.
struct ToothShape {
    Aabb bounds() const;
    bool inTooth(const Vec3& p) const;
    bool inPulp(const Vec3& p) const;
    bool inEnamel(const Vec3& p) const;
    std::optional<Tissue> tissueAt(const Vec3& p) const;
};

/// Sphere pack sampled uniformly inside each tissue region of ToothShape. Defaults give
/// the reference tooth: 100k enamel, 170k dentin, 10k pulp spheres. Deterministic for a
/// given seed on every platform; spheres are ordered along a Morton curve.
SpherePackVolume generateReferenceTooth(TissueCounts counts = {100000, 170000, 10000},
                                        std::uint64_t seed = 1);

/// Axis-aligned access opening: removes everything above `floorY` inside the x/z footprint.
struct AccessCavity {
    double minX = -2.2;
    double maxX = 2.2;
    double minZ = -2.0;
    double maxZ = 2.0;
    double floorY = 9.0;

    bool contains(const Vec3& p) const {
        return p.x >= minX && p.x <= maxX && p.z >= minZ && p.z <= maxZ && p.y >= floorY;
    }
};

/// Ideal root-canal access opening for the reference tooth: opens the pulp-chamber roof.
inline constexpr AccessCavity kIdealAccessCavity{};

/// Copy of `grid` with every voxel whose center lies in the cavity emptied.
VoxelGrid carveCavity(const VoxelGrid& grid, const AccessCavity& cavity);

/// Raster of vertical bur plunges covering the cavity footprint down to its floor.
DrillScript accessOpeningScript(const AccessCavity& cavity, double burRadius = 0.6, double spacing = 0.4,
                                double topY = 15.5);

/// Perturbed versions of the ideal cavity, mixing under- and over-drilling.
std::vector<AccessCavity> syntheticCavities(std::size_t count, std::uint64_t seed);

/// Uniform double in [0, 1) from a 64-bit generator word; portable across standard libraries.
inline double unitFromBits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace toothsim
