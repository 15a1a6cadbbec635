#pragma once

#include "toothsim/geometry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toothsim {

enum class Tissue : std::uint8_t { Enamel = 0, Dentin = 1, Pulp = 2 };

inline constexpr std::array<Tissue, 3> kAllTissues{Tissue::Enamel, Tissue::Dentin, Tissue::Pulp};

std::string_view tissueName(Tissue t);
std::optional<Tissue> parseTissue(std::string_view name);

struct Sphere {
    Vec3 center;       // mm
    double radius = 0; // mm
    Tissue tissue = Tissue::Dentin;
    bool removed = false;
};

struct TissueCounts {
    std::size_t enamel = 0;
    std::size_t dentin = 0;
    std::size_t pulp = 0;

    std::size_t& operator[](Tissue t);
    std::size_t operator[](Tissue t) const;
    std::size_t total() const { return enamel + dentin + pulp; }
    friend bool operator==(const TissueCounts&, const TissueCounts&) = default;
};

/// Inner-spheres tooth volume: an ordered, tissue-labelled sphere pack.
/// Drilling flips `removed` flags; spheres are never erased so indices stay stable.
class SpherePackVolume {
public:
    SpherePackVolume() = default;
    /// Validates radii and computes the bounding box of all sphere extents.
    explicit SpherePackVolume(std::vector<Sphere> spheres);

    const std::vector<Sphere>& spheres() const { return spheres_; }
    std::size_t size() const { return spheres_.size(); }
    bool empty() const { return spheres_.empty(); }
    const Aabb& boundingBox() const { return box_; }

    TissueCounts tissueCounts() const;
    std::size_t removedCount() const;
    double maxRadius() const { return maxRadius_; }

    void markRemoved(std::size_t index);
    void restoreAll();

private:
    std::vector<Sphere> spheres_;
    Aabb box_;
    double maxRadius_ = 0.0;
};

/// JSON sphere-pack file:
///   {"header": {"counts": {"enamel": n, "dentin": n, "pulp": n},
///               "boundingBox": {"min": [x,y,z], "max": [x,y,z]}},
///    "spheres": [{"center": [x,y,z], "radius": r, "tissue": "enamel", "removed": false}, ...]}
/// `removed` is optional. Loading verifies header counts and that the header box contains
/// every sphere extent.
SpherePackVolume loadSpherePack(const std::filesystem::path& path);
SpherePackVolume parseSpherePack(std::string_view text);
void saveSpherePack(const SpherePackVolume& volume, const std::filesystem::path& path);
std::string serializeSpherePack(const SpherePackVolume& volume);

} // namespace toothsim
