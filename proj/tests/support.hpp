#pragma once

#include "toothsim/field.hpp"
#include "toothsim/mesh.hpp"
#include "toothsim/volume.hpp"
#include "toothsim/voxel_grid.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testing {

using namespace toothsim;

inline SpherePackVolume singleSphere(Vec3 center, double radius, Tissue tissue = Tissue::Dentin) {
    return SpherePackVolume({Sphere{center, radius, tissue, false}});
}

// Straight sum over every sphere, independent of the spatial hash and the scatter.
inline FieldSample bruteForceSample(const SpherePackVolume& volume, const MetaballKernel& kernel, const Vec3& p) {
    FieldSample out;
    double best = 0.0;
    for (const Sphere& s : volume.spheres()) {
        if (s.removed) continue;
        const double support = kernel.support(s.radius);
        const double dx = p.x - s.center.x, dy = p.y - s.center.y, dz = p.z - s.center.z;
        const double w = MetaballKernel::evaluate(dx * dx + (dy * dy + dz * dz), 1.0 / (support * support));
        out.value += w;
        if (w > best) {
            best = w;
            out.dominantTissue = static_cast<std::uint8_t>(s.tissue);
        }
    }
    return out;
}

inline double signedVolume(const TriangleMesh& m) {
    double v = 0.0;
    for (const auto& t : m.triangles) {
        v += dot(m.vertices[t[0]], cross(m.vertices[t[1]], m.vertices[t[2]]));
    }
    return v / 6.0;
}

inline SpherePackVolume randomPack(std::mt19937_64& rng, std::size_t n, double extent) {
    std::uniform_real_distribution<double> pos(-extent, extent), rad(0.3, 1.2);
    std::uniform_int_distribution<int> tissue(0, 2);
    std::vector<Sphere> spheres;
    for (std::size_t i = 0; i < n; ++i) {
        spheres.push_back({{pos(rng), pos(rng), pos(rng)}, rad(rng), static_cast<Tissue>(tissue(rng)), false});
    }
    return SpherePackVolume(std::move(spheres));
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("toothsim_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

} // namespace testing
