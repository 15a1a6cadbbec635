#pragma once

#include "toothsim/geometry.hpp"
#include "toothsim/volume.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace toothsim {

/// Compact-support polynomial falloff k(d) = (1 - d^2/R^2)^2 for d < R, else 0,
/// with R = supportScale * sphereRadius. Maximum value is 1 at the center.
struct MetaballKernel {
    double supportScale = 2.0;
    double isoLevel = 0.5;

    double support(double sphereRadius) const { return supportScale * sphereRadius; }
    static constexpr double maxValue() { return 1.0; }

    /// Kernel from a squared distance and the reciprocal squared support radius.
    static double evaluate(double distanceSquared, double inverseSupportSquared) {
        // max() instead of a branch; outside the support 1 - u <= 0 clamps to +0.
        const double t = std::max(0.0, 1.0 - distanceSquared * inverseSupportSquared);
        return t * t;
    }

    /// Distance from a lone sphere's center at which its kernel equals the iso level.
    double isoRadius(double sphereRadius) const;

    void validate() const;
};

inline constexpr std::uint8_t kNoTissue = 0xFF;

/// Point sample of the metaball field: summed value plus the tissue whose single
/// kernel contributed most (kNoTissue where nothing contributes).
struct FieldSample {
    double value = 0.0;
    std::uint8_t dominantTissue = kNoTissue;
};

/// Sum of metaball kernels over the non-removed spheres of a volume.
///
/// Contributions are always accumulated in sphere-index order, so point queries,
/// grid sampling (serial or parallel) and brute force agree bit for bit.
class ScalarField {
public:
    struct Source {
        Vec3 center;
        double inverseSupportSquared;
        double support;
        std::uint32_t index;
        Tissue tissue;
    };

    ScalarField(const SpherePackVolume& volume, MetaballKernel kernel);

    FieldSample sample(const Vec3& p) const;
    double evaluate(const Vec3& p) const { return sample(p).value; }
    /// Analytic gradient of the field.
    Vec3 gradient(const Vec3& p) const;

    double isoLevel() const { return kernel_.isoLevel; }
    const MetaballKernel& kernel() const { return kernel_; }
    std::span<const Source> sources() const { return sources_; }
    /// Box enclosing every kernel support; empty when no sphere contributes.
    const Aabb& supportBox() const { return supportBox_; }
    /// Largest kernel support among contributing spheres; also the hash cell size.
    double maxSupport() const { return maxSupport_; }

private:
    std::array<std::int64_t, 3> cellOf(const Vec3& p) const;
    void candidates(const Vec3& p, std::vector<std::uint32_t>& out) const;

    MetaballKernel kernel_;
    std::vector<Source> sources_;
    Aabb supportBox_;
    double maxSupport_ = 0.0;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> hash_;
};

/// Builds the metaball field of a volume. Throws Error("empty volume") when the
/// volume has no spheres; a volume whose spheres are all removed yields a zero field.
ScalarField buildField(const SpherePackVolume& volume, MetaballKernel kernel = {});

} // namespace toothsim
