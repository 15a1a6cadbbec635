#pragma once

#include "toothsim/field.hpp"
#include "toothsim/geometry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace toothsim {

struct GridDims {
    std::size_t nx = 90;
    std::size_t ny = 135;
    std::size_t nz = 90;

    std::size_t count() const { return nx * ny * nz; }
    friend bool operator==(const GridDims&, const GridDims&) = default;
};

inline constexpr GridDims kReferenceDims{90, 135, 90};

/// Parses "90x135x90".
GridDims parseGridDims(const std::string& text);
std::string formatGridDims(const GridDims& d);

/// Cell-centred lattice: voxel (i,j,k) covers [origin + idx*cell, origin + (idx+1)*cell)
/// and is sampled at its center. Linear index is x-fastest.
struct GridSpec {
    GridDims dims;
    Vec3 origin;
    Vec3 cellSize;

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return (k * dims.ny + j) * dims.nx + i;
    }
    double centerX(std::size_t i) const { return origin.x + (static_cast<double>(i) + 0.5) * cellSize.x; }
    double centerY(std::size_t j) const { return origin.y + (static_cast<double>(j) + 0.5) * cellSize.y; }
    double centerZ(std::size_t k) const { return origin.z + (static_cast<double>(k) + 0.5) * cellSize.z; }
    Vec3 center(std::size_t i, std::size_t j, std::size_t k) const {
        return {centerX(i), centerY(j), centerZ(k)};
    }
    Aabb box() const;
    double cellVolume() const { return cellSize.x * cellSize.y * cellSize.z; }
    double cellDiagonal() const { return norm(cellSize); }

    /// Same dims and matching placement up to a relative tolerance.
    bool compatible(const GridSpec& other, double relTol = 1e-9) const;
};

/// Grid of `dims` cells exactly covering `box`. Throws on degenerate boxes or dims < 2.
GridSpec gridForBox(const Aabb& box, GridDims dims);

/// Reference placement: the tight box of the field support with a one-cell margin on
/// every side, so the iso-surface never touches the grid boundary.
GridSpec referenceGridSpec(const ScalarField& field, GridDims dims = kReferenceDims);

/// Field values and dominant tissue at every voxel center.
struct SampledField {
    GridSpec spec;
    double isoLevel = 0.5;
    std::vector<double> values;
    std::vector<std::uint8_t> dominant;
};

/// Evaluates the field at every voxel center by splatting each sphere's kernel into
/// the cells it reaches. `jobs` worker threads split the grid into z slabs; 0 means
/// hardware concurrency. Output is bitwise independent of `jobs`.
SampledField sampleField(const ScalarField& field, const GridSpec& spec, unsigned jobs = 0);

/// Occupancy and tissue labels on a lattice. Immutable once built.
class VoxelGrid {
public:
    VoxelGrid() = default;
    VoxelGrid(GridSpec spec, std::vector<std::uint8_t> labels);

    const GridSpec& spec() const { return spec_; }
    const GridDims& dims() const { return spec_.dims; }
    std::size_t size() const { return labels_.size(); }

    bool occupied(std::size_t idx) const { return labels_[idx] != kNoTissue; }
    /// Tissue label, or kNoTissue for empty voxels.
    std::uint8_t label(std::size_t idx) const { return labels_[idx]; }
    const std::vector<std::uint8_t>& labels() const { return labels_; }
    std::size_t occupiedCount() const;

    friend bool operator==(const VoxelGrid& a, const VoxelGrid& b) {
        return a.spec_.dims == b.spec_.dims && a.spec_.origin == b.spec_.origin &&
               a.spec_.cellSize == b.spec_.cellSize && a.labels_ == b.labels_;
    }

private:
    GridSpec spec_;
    std::vector<std::uint8_t> labels_;
};

/// occupancy(v) = field(center(v)) >= isoLevel; label = dominant contributor.
VoxelGrid voxelize(const SampledField& sampled);
VoxelGrid voxelize(const ScalarField& field, const GridSpec& spec, unsigned jobs = 0);
VoxelGrid voxelize(const ScalarField& field, GridDims dims, const Aabb& box, unsigned jobs = 0);

/// Binary grid dump: the line "TSVOX1", a one-line JSON header with dims, origin and
/// cell size, then one byte per voxel (0 enamel, 1 dentin, 2 pulp, 255 empty).
void saveVoxelGrid(const VoxelGrid& grid, const std::filesystem::path& path);
std::string serializeVoxelGrid(const VoxelGrid& grid);
VoxelGrid loadVoxelGrid(const std::filesystem::path& path);
VoxelGrid parseVoxelGrid(const std::string& bytes);

} // namespace toothsim
