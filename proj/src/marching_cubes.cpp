#include "toothsim/mesh.hpp"

#include "mc_tables.hpp"
#include "parallel.hpp"

#include <memory>

namespace toothsim {

namespace {

// For each cube edge: owning sample offset and axis (0=x, 1=y, 2=z).
constexpr int kEdgeOwner[12][4] = {
    {0, 0, 0, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 0, 1},
    {0, 0, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 1, 1},
    {0, 0, 0, 2}, {1, 0, 0, 2}, {1, 1, 0, 2}, {0, 1, 0, 2},
};

struct PlaneVertices {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<std::uint8_t> tissues;
};

class Extractor {
public:
    explicit Extractor(const SampledField& f)
        : f_(f), d_(f.spec.dims), edgeIds_(new std::uint32_t[3 * d_.count()]) {}

    TriangleMesh run(unsigned jobs) {
        inside_.resize(d_.count());
        for (std::size_t idx = 0; idx < inside_.size(); ++idx) {
            inside_[idx] = f_.values[idx] >= f_.isoLevel ? 1 : 0;
        }

        std::vector<PlaneVertices> planes(d_.nz);
        detail::parallelFor(d_.nz, jobs, [&](std::size_t k0, std::size_t k1) {
            for (std::size_t k = k0; k < k1; ++k) {
                buildPlaneVertices(k, planes[k]);
            }
        });

        planeOffset_.assign(d_.nz + 1, 0);
        for (std::size_t k = 0; k < d_.nz; ++k) {
            planeOffset_[k + 1] = planeOffset_[k] + static_cast<std::uint32_t>(planes[k].positions.size());
        }

        const std::size_t cubePlanes = d_.nz - 1;
        std::vector<std::vector<std::array<std::uint32_t, 3>>> tris(cubePlanes);
        detail::parallelFor(cubePlanes, jobs, [&](std::size_t k0, std::size_t k1) {
            for (std::size_t k = k0; k < k1; ++k) {
                buildPlaneTriangles(k, tris[k]);
            }
        });

        TriangleMesh mesh;
        const std::size_t nv = planeOffset_.back();
        mesh.vertices.reserve(nv);
        mesh.normals.reserve(nv);
        mesh.tissues.reserve(nv);
        for (auto& p : planes) {
            mesh.vertices.insert(mesh.vertices.end(), p.positions.begin(), p.positions.end());
            mesh.normals.insert(mesh.normals.end(), p.normals.begin(), p.normals.end());
            mesh.tissues.insert(mesh.tissues.end(), p.tissues.begin(), p.tissues.end());
        }
        std::size_t nt = 0;
        for (const auto& t : tris) nt += t.size();
        mesh.triangles.reserve(nt);
        for (const auto& t : tris) {
            mesh.triangles.insert(mesh.triangles.end(), t.begin(), t.end());
        }
        repairNormals(mesh);
        return mesh;
    }

private:
    double value(std::size_t i, std::size_t j, std::size_t k) const { return f_.values[f_.spec.index(i, j, k)]; }

    // Central differences, one-sided at the boundary.
    Vec3 gradientAt(std::size_t i, std::size_t j, std::size_t k) const {
        auto diff = [&](std::size_t lo, std::size_t hi, double a, double b, double h) {
            return (b - a) / (static_cast<double>(hi - lo) * h);
        };
        const std::size_t il = i > 0 ? i - 1 : i, ih = i + 1 < d_.nx ? i + 1 : i;
        const std::size_t jl = j > 0 ? j - 1 : j, jh = j + 1 < d_.ny ? j + 1 : j;
        const std::size_t kl = k > 0 ? k - 1 : k, kh = k + 1 < d_.nz ? k + 1 : k;
        const Vec3& h = f_.spec.cellSize;
        return {diff(il, ih, value(il, j, k), value(ih, j, k), h.x),
                diff(jl, jh, value(i, jl, k), value(i, jh, k), h.y),
                diff(kl, kh, value(i, j, kl), value(i, j, kh), h.z)};
    }

    void emitVertex(PlaneVertices& out, std::size_t i, std::size_t j, std::size_t k, int axis) {
        std::size_t i1 = i, j1 = j, k1 = k;
        (axis == 0 ? i1 : axis == 1 ? j1 : k1) += 1;
        const std::size_t a = f_.spec.index(i, j, k);
        const std::size_t b = f_.spec.index(i1, j1, k1);
        const double va = f_.values[a];
        const double vb = f_.values[b];
        const double t = (f_.isoLevel - va) / (vb - va);
        const Vec3 pa = f_.spec.center(i, j, k);
        const Vec3 pb = f_.spec.center(i1, j1, k1);
        const Vec3 ga = gradientAt(i, j, k);
        const Vec3 gb = gradientAt(i1, j1, k1);
        // Field decreases outward, so the outward normal is the negated gradient.
        const Vec3 n = -(ga + (gb - ga) * t);
        const double len = norm(n);
        out.positions.push_back(pa + (pb - pa) * t);
        out.normals.push_back(len > 0.0 ? n * (1.0 / len) : Vec3{});
        out.tissues.push_back(inside_[a] ? f_.dominant[a] : f_.dominant[b]);
        edgeIds_[3 * a + static_cast<std::size_t>(axis)] = static_cast<std::uint32_t>(out.positions.size() - 1);
    }

    void buildPlaneVertices(std::size_t k, PlaneVertices& out) {
        for (std::size_t j = 0; j < d_.ny; ++j) {
            for (std::size_t i = 0; i < d_.nx; ++i) {
                const std::size_t idx = f_.spec.index(i, j, k);
                const std::uint8_t in = inside_[idx];
                if (i + 1 < d_.nx && inside_[idx + 1] != in) {
                    emitVertex(out, i, j, k, 0);
                }
                if (j + 1 < d_.ny && inside_[idx + d_.nx] != in) {
                    emitVertex(out, i, j, k, 1);
                }
                if (k + 1 < d_.nz && inside_[idx + d_.nx * d_.ny] != in) {
                    emitVertex(out, i, j, k, 2);
                }
            }
        }
    }

    std::uint32_t edgeVertex(std::size_t i, std::size_t j, std::size_t k, int edge) const {
        const int* o = kEdgeOwner[edge];
        const std::size_t oi = i + static_cast<std::size_t>(o[0]);
        const std::size_t oj = j + static_cast<std::size_t>(o[1]);
        const std::size_t ok = k + static_cast<std::size_t>(o[2]);
        const std::size_t owner = f_.spec.index(oi, oj, ok);
        return planeOffset_[ok] + edgeIds_[3 * owner + static_cast<std::size_t>(o[3])];
    }

    void buildPlaneTriangles(std::size_t k, std::vector<std::array<std::uint32_t, 3>>& out) const {
        const std::size_t sx = 1, sy = d_.nx, sz = d_.nx * d_.ny;
        const std::size_t cornerStride[8] = {0, sx, sx + sy, sy, sz, sz + sx, sz + sx + sy, sz + sy};
        for (std::size_t j = 0; j + 1 < d_.ny; ++j) {
            for (std::size_t i = 0; i + 1 < d_.nx; ++i) {
                const std::size_t base = f_.spec.index(i, j, k);
                int cubeIndex = 0;
                for (int c = 0; c < 8; ++c) {
                    if (!inside_[base + cornerStride[c]]) {
                        cubeIndex |= 1 << c;
                    }
                }
                if (cubeIndex == 0 || cubeIndex == 255) {
                    continue;
                }
                const std::int8_t* row = detail::kTriangleTable[cubeIndex];
                for (int t = 0; row[t] != -1; t += 3) {
                    // With the case bit marking outside corners, table order is
                    // counter-clockwise seen from outside.
                    out.push_back({edgeVertex(i, j, k, row[t]), edgeVertex(i, j, k, row[t + 1]),
                                   edgeVertex(i, j, k, row[t + 2])});
                }
            }
        }
    }

    // Vertices whose interpolated gradient vanished take the area-weighted face normal.
    static void repairNormals(TriangleMesh& mesh) {
        std::vector<std::size_t> broken;
        for (std::size_t v = 0; v < mesh.normals.size(); ++v) {
            if (squaredNorm(mesh.normals[v]) == 0.0) {
                broken.push_back(v);
            }
        }
        if (broken.empty()) {
            return;
        }
        std::vector<Vec3> acc(mesh.vertices.size());
        for (const auto& t : mesh.triangles) {
            const Vec3 n = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]], mesh.vertices[t[2]] - mesh.vertices[t[0]]);
            for (auto v : t) acc[v] += n;
        }
        for (std::size_t v : broken) {
            const double len = norm(acc[v]);
            mesh.normals[v] = len > 0.0 ? acc[v] * (1.0 / len) : Vec3{0.0, 0.0, 1.0};
        }
    }

    const SampledField& f_;
    GridDims d_;
    std::vector<std::uint8_t> inside_;
    std::unique_ptr<std::uint32_t[]> edgeIds_;
    std::vector<std::uint32_t> planeOffset_;
};

} // namespace

TriangleMesh extractMesh(const SampledField& sampled, unsigned jobs) {
    const GridDims d = sampled.spec.dims;
    if (d.nx < 2 || d.ny < 2 || d.nz < 2) {
        throw Error("grid dims must all be >= 2");
    }
    if (sampled.values.size() != d.count()) {
        throw Error("sampled field size does not match grid dims");
    }
    return Extractor(sampled).run(jobs);
}

TriangleMesh extractMesh(const ScalarField& field, const GridSpec& spec, unsigned jobs) {
    return extractMesh(sampleField(field, spec, jobs), jobs);
}

TriangleMesh extractMesh(const ScalarField& field, GridDims dims, const Aabb& box, unsigned jobs) {
    return extractMesh(field, gridForBox(box, dims), jobs);
}

} // namespace toothsim
