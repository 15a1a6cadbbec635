#include "toothsim/voxel_grid.hpp"

#include "json_util.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace toothsim {

GridDims parseGridDims(const std::string& text) {
    GridDims d;
    char x1 = 0;
    char x2 = 0;
    std::istringstream in(text);
    long long a = 0;
    long long b = 0;
    long long c = 0;
    if (!(in >> a >> x1 >> b >> x2 >> c) || (x1 != 'x' && x1 != 'X') || (x2 != 'x' && x2 != 'X') ||
        !(in >> std::ws).eof() || a < 2 || b < 2 || c < 2) {
        throw Error("invalid grid dims '" + text + "' (expected e.g. 90x135x90, each >= 2)");
    }
    d.nx = static_cast<std::size_t>(a);
    d.ny = static_cast<std::size_t>(b);
    d.nz = static_cast<std::size_t>(c);
    return d;
}

std::string formatGridDims(const GridDims& d) {
    return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

Aabb GridSpec::box() const {
    Aabb b;
    b.min = origin;
    b.max = origin + Vec3{cellSize.x * static_cast<double>(dims.nx), cellSize.y * static_cast<double>(dims.ny),
                          cellSize.z * static_cast<double>(dims.nz)};
    return b;
}

bool GridSpec::compatible(const GridSpec& other, double relTol) const {
    if (!(dims == other.dims)) {
        return false;
    }
    const double scale = norm(cellSize) + norm(origin);
    return norm(origin - other.origin) <= relTol * scale &&
           norm(cellSize - other.cellSize) <= relTol * norm(cellSize);
}

GridSpec gridForBox(const Aabb& box, GridDims dims) {
    if (dims.nx < 2 || dims.ny < 2 || dims.nz < 2) {
        throw Error("grid dims must all be >= 2");
    }
    if (!box.nonDegenerate()) {
        throw Error("degenerate grid box");
    }
    GridSpec spec;
    spec.dims = dims;
    spec.origin = box.min;
    const Vec3 e = box.extent();
    spec.cellSize = {e.x / static_cast<double>(dims.nx), e.y / static_cast<double>(dims.ny),
                     e.z / static_cast<double>(dims.nz)};
    return spec;
}

GridSpec referenceGridSpec(const ScalarField& field, GridDims dims) {
    if (dims.nx < 3 || dims.ny < 3 || dims.nz < 3) {
        throw Error("reference grid needs at least 3 cells per axis");
    }
    const Aabb& support = field.supportBox();
    if (!support.nonDegenerate()) {
        throw Error("field has no support to place a grid around");
    }
    const Vec3 e = support.extent();
    const Vec3 cell{e.x / static_cast<double>(dims.nx - 2), e.y / static_cast<double>(dims.ny - 2),
                    e.z / static_cast<double>(dims.nz - 2)};
    GridSpec spec;
    spec.dims = dims;
    spec.cellSize = cell;
    spec.origin = support.min - cell;
    return spec;
}

namespace {

// Floor for values well inside the ptrdiff_t range, without a libm call.
std::ptrdiff_t floorIndex(double v) {
    const auto t = static_cast<std::ptrdiff_t>(v);
    return t - (static_cast<double>(t) > v);
}

// Index range [lo, hi] of voxel centers within `radius` of `c` along one axis. The
// bounds are widened by 1e-9 cells, far above the rounding error of the arithmetic,
// so no sample with a nonzero kernel value is ever left out.
void axisRange(double c, double radius, double origin, double invCell, std::size_t n, std::ptrdiff_t& lo,
               std::ptrdiff_t& hi) {
    constexpr double kSlack = 1e-9;
    lo = -floorIndex(-((c - radius - origin) * invCell - 0.5 - kSlack));
    hi = floorIndex((c + radius - origin) * invCell - 0.5 + kSlack);
    lo = std::max<std::ptrdiff_t>(lo, 0);
    hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n) - 1);
}

} // namespace

SampledField sampleField(const ScalarField& field, const GridSpec& spec, unsigned jobs) {
    if (spec.dims.nx < 2 || spec.dims.ny < 2 || spec.dims.nz < 2) {
        throw Error("grid dims must all be >= 2");
    }
    if (!spec.box().nonDegenerate()) {
        throw Error("degenerate grid box");
    }
    const GridDims d = spec.dims;
    SampledField out;
    out.spec = spec;
    out.isoLevel = field.isoLevel();
    out.values.assign(d.count(), 0.0);
    out.dominant.assign(d.count(), kNoTissue);

    std::vector<double> xs(d.nx), ys(d.ny), zs(d.nz);
    for (std::size_t i = 0; i < d.nx; ++i) xs[i] = spec.centerX(i);
    for (std::size_t j = 0; j < d.ny; ++j) ys[j] = spec.centerY(j);
    for (std::size_t k = 0; k < d.nz; ++k) zs[k] = spec.centerZ(k);

    // Running sum and largest single contribution per sample, kept side by side.
    struct Accumulator {
        double value;
        double best;
    };
    std::vector<Accumulator> acc(d.count(), Accumulator{0.0, 0.0});
    const Vec3 invCell{1.0 / spec.cellSize.x, 1.0 / spec.cellSize.y, 1.0 / spec.cellSize.z};
    const auto sources = field.sources();

    // Every z slab visits the sources in index order, so each sample sums its
    // contributions in the same order as ScalarField::sample.
    detail::parallelFor(d.nz, jobs, [&](std::size_t k0, std::size_t k1) {
        if (k0 >= k1) {
            return;
        }
        std::vector<double> dx2, dy2;
        for (const auto& s : sources) {
            std::ptrdiff_t klo, khi, ilo, ihi;
            axisRange(s.center.z, s.support, spec.origin.z, invCell.z, d.nz, klo, khi);
            klo = std::max<std::ptrdiff_t>(klo, static_cast<std::ptrdiff_t>(k0));
            khi = std::min<std::ptrdiff_t>(khi, static_cast<std::ptrdiff_t>(k1) - 1);
            if (klo > khi) {
                continue;
            }
            axisRange(s.center.x, s.support, spec.origin.x, invCell.x, d.nx, ilo, ihi);
            if (ilo > ihi) {
                continue;
            }
            dx2.resize(static_cast<std::size_t>(ihi - ilo + 1));
            for (std::ptrdiff_t i = ilo; i <= ihi; ++i) {
                const double dx = xs[i] - s.center.x;
                dx2[static_cast<std::size_t>(i - ilo)] = dx * dx;
            }
            std::ptrdiff_t jlo, jhi;
            axisRange(s.center.y, s.support, spec.origin.y, invCell.y, d.ny, jlo, jhi);
            dy2.resize(static_cast<std::size_t>(std::max<std::ptrdiff_t>(jhi - jlo + 1, 0)));
            for (std::ptrdiff_t j = jlo; j <= jhi; ++j) {
                const double dy = ys[j] - s.center.y;
                dy2[static_cast<std::size_t>(j - jlo)] = dy * dy;
            }
            const double inv = s.inverseSupportSquared;
            const auto tissue = static_cast<std::uint8_t>(s.tissue);
            const std::size_t width = dx2.size();
            // The whole bounding box is visited without distance tests: outside the
            // support the kernel is an exact zero, which leaves the sum unchanged and
            // never beats the running best. Fewer mispredicted branches outweigh the
            // extra evaluations.
            for (std::ptrdiff_t k = klo; k <= khi; ++k) {
                const double dz = zs[k] - s.center.z;
                const double dz2 = dz * dz;
                for (std::ptrdiff_t j = jlo; j <= jhi; ++j) {
                    const double dyz = dy2[static_cast<std::size_t>(j - jlo)] + dz2;
                    const std::size_t row = spec.index(static_cast<std::size_t>(ilo), static_cast<std::size_t>(j),
                                                       static_cast<std::size_t>(k));
                    Accumulator* a = acc.data() + row;
                    std::uint8_t* dom = out.dominant.data() + row;
                    for (std::size_t m = 0; m < width; ++m) {
                        const double w = MetaballKernel::evaluate(dx2[m] + dyz, inv);
                        a[m].value += w;
                        const bool better = w > a[m].best;
                        a[m].best = better ? w : a[m].best;
                        dom[m] = better ? tissue : dom[m];
                    }
                }
            }
        }
    });
    for (std::size_t idx = 0; idx < acc.size(); ++idx) {
        out.values[idx] = acc[idx].value;
    }
    return out;
}

VoxelGrid::VoxelGrid(GridSpec spec, std::vector<std::uint8_t> labels)
    : spec_(spec), labels_(std::move(labels)) {
    if (labels_.size() != spec_.dims.count()) {
        throw Error("voxel label count does not match grid dims");
    }
    for (std::uint8_t l : labels_) {
        if (l > 2 && l != kNoTissue) {
            throw Error("invalid voxel label");
        }
    }
}

std::size_t VoxelGrid::occupiedCount() const {
    return static_cast<std::size_t>(
        std::count_if(labels_.begin(), labels_.end(), [](std::uint8_t l) { return l != kNoTissue; }));
}

VoxelGrid voxelize(const SampledField& sampled) {
    std::vector<std::uint8_t> labels(sampled.values.size(), kNoTissue);
    for (std::size_t idx = 0; idx < labels.size(); ++idx) {
        if (sampled.values[idx] >= sampled.isoLevel) {
            labels[idx] = sampled.dominant[idx];
        }
    }
    return VoxelGrid(sampled.spec, std::move(labels));
}

VoxelGrid voxelize(const ScalarField& field, const GridSpec& spec, unsigned jobs) {
    return voxelize(sampleField(field, spec, jobs));
}

VoxelGrid voxelize(const ScalarField& field, GridDims dims, const Aabb& box, unsigned jobs) {
    return voxelize(field, gridForBox(box, dims), jobs);
}

namespace {
constexpr std::string_view kMagic = "TSVOX1\n";
}

std::string serializeVoxelGrid(const VoxelGrid& grid) {
    const GridSpec& s = grid.spec();
    nlohmann::json header = {
        {"dims", {s.dims.nx, s.dims.ny, s.dims.nz}},
        {"origin", {s.origin.x, s.origin.y, s.origin.z}},
        {"cellSize", {s.cellSize.x, s.cellSize.y, s.cellSize.z}},
        {"occupied", grid.occupiedCount()},
    };
    std::string out(kMagic);
    out += header.dump();
    out += '\n';
    out.append(reinterpret_cast<const char*>(grid.labels().data()), grid.labels().size());
    return out;
}

void saveVoxelGrid(const VoxelGrid& grid, const std::filesystem::path& path) {
    detail::writeFile(path, serializeVoxelGrid(grid));
}

VoxelGrid parseVoxelGrid(const std::string& bytes) {
    if (bytes.compare(0, kMagic.size(), kMagic) != 0) {
        throw Error("voxel grid: bad magic (expected TSVOX1)");
    }
    const auto eol = bytes.find('\n', kMagic.size());
    if (eol == std::string::npos) {
        throw Error("voxel grid: missing header line");
    }
    const auto header = detail::parseJson(
        std::string_view(bytes).substr(kMagic.size(), eol - kMagic.size()), "voxel grid header");
    GridSpec spec;
    try {
        const auto& dims = header.at("dims");
        spec.dims = {dims.at(0).get<std::size_t>(), dims.at(1).get<std::size_t>(), dims.at(2).get<std::size_t>()};
        const auto& o = header.at("origin");
        spec.origin = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
        const auto& c = header.at("cellSize");
        spec.cellSize = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("voxel grid header: ") + e.what());
    }
    if (spec.dims.nx < 2 || spec.dims.ny < 2 || spec.dims.nz < 2 || !spec.box().nonDegenerate()) {
        throw Error("voxel grid header: degenerate grid");
    }
    const std::size_t payload = bytes.size() - eol - 1;
    if (payload != spec.dims.count()) {
        throw Error("voxel grid: payload has " + std::to_string(payload) + " bytes, expected " +
                    std::to_string(spec.dims.count()));
    }
    std::vector<std::uint8_t> labels(bytes.begin() + static_cast<std::ptrdiff_t>(eol + 1), bytes.end());
    return VoxelGrid(spec, std::move(labels));
}

VoxelGrid loadVoxelGrid(const std::filesystem::path& path) {
    try {
        return parseVoxelGrid(detail::readFile(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

} // namespace toothsim
