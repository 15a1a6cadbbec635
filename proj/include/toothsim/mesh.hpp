#pragma once

#include "toothsim/geometry.hpp"
#include "toothsim/voxel_grid.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace toothsim {

struct TriangleMesh {
    std::vector<Vec3> vertices;  // mm
    std::vector<Vec3> normals;   // unit, outward
    std::vector<std::uint8_t> tissues;  // per vertex, kNoTissue if unknown
    std::vector<std::array<std::uint32_t, 3>> triangles;

    bool empty() const { return triangles.empty(); }
    Aabb bounds() const;
};

struct MeshTopology {
    std::size_t vertices = 0;
    std::size_t edges = 0;
    std::size_t faces = 0;
    std::size_t boundaryEdges = 0;     // used by one triangle
    std::size_t nonManifoldEdges = 0;  // used by more than two
    bool indicesInRange = true;

    long long eulerCharacteristic() const {
        return static_cast<long long>(vertices) - static_cast<long long>(edges) + static_cast<long long>(faces);
    }
    bool watertight() const { return indicesInRange && boundaryEdges == 0 && nonManifoldEdges == 0; }
};

MeshTopology analyzeTopology(const TriangleMesh& mesh);

/// Marching cubes over the voxel-center lattice of an already sampled field. Vertices
/// are shared between adjacent cubes. Work is split into z slabs; vertex and triangle
/// order are those of a serial x-fastest sweep regardless of `jobs`.
TriangleMesh extractMesh(const SampledField& sampled, unsigned jobs = 0);
TriangleMesh extractMesh(const ScalarField& field, const GridSpec& spec, unsigned jobs = 0);
TriangleMesh extractMesh(const ScalarField& field, GridDims dims, const Aabb& box, unsigned jobs = 0);

/// ASCII PLY with position, normal and per-vertex tissue colour.
std::string serializePly(const TriangleMesh& mesh);
void savePly(const TriangleMesh& mesh, const std::filesystem::path& path);
/// Reads the subset of ASCII PLY written by savePly (positions, optional normals,
/// triangular faces).
TriangleMesh loadPly(const std::filesystem::path& path);
TriangleMesh parsePly(const std::string& text);

} // namespace toothsim
