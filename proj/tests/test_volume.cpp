#include "support.hpp"

#include "toothsim/drilling.hpp"
#include "toothsim/tooth_fixture.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace toothsim;
using testing::bruteForceSample;
using testing::randomPack;
using testing::singleSphere;

TEST_CASE("kernel peaks at the center and vanishes at the support") {
    const MetaballKernel k;
    CHECK(MetaballKernel::evaluate(0.0, 0.25) == MetaballKernel::maxValue());
    CHECK(MetaballKernel::evaluate(4.0, 0.25) == 0.0);
    CHECK(MetaballKernel::evaluate(9.0, 0.25) == 0.0);
    // Iso radius inverts the kernel at the iso level.
    const double r = k.isoRadius(1.0);
    CHECK(MetaballKernel::evaluate(r * r, 1.0 / (k.support(1.0) * k.support(1.0))) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kernel parameters are validated") {
    CHECK_THROWS(MetaballKernel{0.0, 0.5}.validate());
    CHECK_THROWS(MetaballKernel{2.0, 1.0}.validate());
    CHECK_THROWS(MetaballKernel{2.0, 0.0}.validate());
    CHECK_NOTHROW(MetaballKernel{3.0, 0.3}.validate());
}

TEST_CASE("single sphere field") {
    const auto field = buildField(singleSphere({1, 2, 3}, 1.0));
    CHECK(field.evaluate({1, 2, 3}) == MetaballKernel::maxValue());
    CHECK(field.evaluate({3.0001, 2, 3}) == 0.0);
    CHECK(field.evaluate({10, 10, 10}) == 0.0);
    CHECK(field.sample({1, 2, 3}).dominantTissue == static_cast<std::uint8_t>(Tissue::Dentin));
}

TEST_CASE("two identical overlapping spheres double the field at their midpoint") {
    const Sphere s{{0, 0, 0}, 1.0, Tissue::Enamel, false};
    const auto one = buildField(SpherePackVolume({s}));
    const auto two = buildField(SpherePackVolume({s, s}));
    const Vec3 p{0.7, 0.0, 0.0};
    // (1 - 0.49/4)^2 by hand
    const double single = (1.0 - 0.49 / 4.0) * (1.0 - 0.49 / 4.0);
    CHECK(one.evaluate(p) == doctest::Approx(single).epsilon(1e-15));
    CHECK(two.evaluate(p) == doctest::Approx(2.0 * single).epsilon(1e-15));
}

TEST_CASE("removed spheres contribute nothing") {
    SpherePackVolume v({Sphere{{0, 0, 0}, 1.0, Tissue::Enamel, false}, Sphere{{0.5, 0, 0}, 1.0, Tissue::Pulp, false}});
    v.markRemoved(1);
    const auto field = buildField(v);
    CHECK(field.evaluate({0.2, 0, 0}) == buildField(singleSphere({0, 0, 0}, 1.0, Tissue::Enamel)).evaluate({0.2, 0, 0}));
    CHECK(field.sources().size() == 1);
}

TEST_CASE("empty volume is rejected by buildField") {
    CHECK_THROWS_WITH(buildField(SpherePackVolume{}), "empty volume");
}

TEST_CASE("field gradient matches central differences") {
    std::mt19937_64 rng(7);
    const auto v = randomPack(rng, 30, 3.0);
    const auto field = buildField(v);
    std::uniform_real_distribution<double> pos(-2.5, 2.5);
    for (int i = 0; i < 50; ++i) {
        const Vec3 p{pos(rng), pos(rng), pos(rng)};
        const Vec3 g = field.gradient(p);
        const double h = 1e-6;
        for (int a = 0; a < 3; ++a) {
            Vec3 lo = p, hi = p;
            lo[a] -= h;
            hi[a] += h;
            const double fd = (field.evaluate(hi) - field.evaluate(lo)) / (2 * h);
            CHECK(g[a] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("grid dims parse and format") {
    CHECK(parseGridDims("90x135x90") == kReferenceDims);
    CHECK(parseGridDims("4X5x6") == GridDims{4, 5, 6});
    CHECK(formatGridDims({4, 5, 6}) == "4x5x6");
    CHECK_THROWS(parseGridDims("1x5x6"));
    CHECK_THROWS(parseGridDims("4x5"));
    CHECK_THROWS(parseGridDims("4x5x6x"));
    CHECK_THROWS(parseGridDims("ax5x6"));
}

TEST_CASE("gridForBox rejects degenerate input") {
    Aabb box;
    box.expand({0, 0, 0});
    box.expand({1, 1, 0});
    CHECK_THROWS(gridForBox(box, {4, 4, 4}));
    box.expand({1, 1, 1});
    CHECK_THROWS(gridForBox(box, {1, 4, 4}));
    const GridSpec spec = gridForBox(box, {4, 2, 5});
    CHECK(spec.cellSize.x == 0.25);
    CHECK(spec.centerZ(0) == doctest::Approx(0.1));
}

TEST_CASE("reference grid has a one-cell margin around the support box") {
    const auto field = buildField(singleSphere({0, 0, 0}, 1.0));
    const GridSpec spec = referenceGridSpec(field, {12, 12, 12});
    CHECK(spec.cellSize.x == doctest::Approx(4.0 / 10.0));
    CHECK(spec.origin.x == doctest::Approx(-2.4));
    CHECK(spec.box().max.y == doctest::Approx(2.4));
}

TEST_CASE("voxelize matches a per-voxel brute-force field evaluation exactly") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto v = randomPack(rng, 40, 3.0);
        for (std::size_t i = 0; i < v.size(); i += 7) v.markRemoved(i);
        const MetaballKernel kernel{1.5 + 0.1 * trial, 0.3 + 0.02 * trial};
        const auto field = buildField(v, kernel);
        std::uniform_int_distribution<std::size_t> dim(2, 16);
        const GridSpec spec = referenceGridSpec(field, {dim(rng) + 1, dim(rng) + 1, dim(rng) + 1});
        const SampledField sampled = sampleField(field, spec, 1 + trial % 3);
        const VoxelGrid grid = voxelize(sampled);
        for (std::size_t k = 0; k < spec.dims.nz; ++k)
            for (std::size_t j = 0; j < spec.dims.ny; ++j)
                for (std::size_t i = 0; i < spec.dims.nx; ++i) {
                    const std::size_t idx = spec.index(i, j, k);
                    const FieldSample ref = bruteForceSample(v, kernel, spec.center(i, j, k));
                    REQUIRE(sampled.values[idx] == ref.value);
                    const bool occ = ref.value >= kernel.isoLevel;
                    REQUIRE(grid.occupied(idx) == occ);
                    if (occ) REQUIRE(grid.label(idx) == ref.dominantTissue);
                    // The hashed point query agrees too.
                    REQUIRE(field.sample(spec.center(i, j, k)).value == ref.value);
                }
    }
}

TEST_CASE("analytic sphere volume") {
    // A sphere whose iso-surface has radius 10 mm in a 90^3 box.
    const MetaballKernel kernel;
    const double radius = 10.0 / kernel.isoRadius(1.0);
    const auto field = buildField(singleSphere({0, 0, 0}, radius));
    Aabb box;
    box.expand({-15, -15, -15});
    box.expand({15, 15, 15});
    const VoxelGrid grid = voxelize(field, GridDims{90, 90, 90}, box);
    const double expected = 4.0 / 3.0 * std::numbers::pi * 1000.0 / grid.spec().cellVolume();
    CHECK(std::fabs(static_cast<double>(grid.occupiedCount()) - expected) <= 0.05 * expected);
}

TEST_CASE("empty and filling fields") {
    Aabb box;
    box.expand({-1, -1, -1});
    box.expand({1, 1, 1});
    const ScalarField empty(SpherePackVolume{}, MetaballKernel{});
    CHECK(voxelize(empty, GridDims{5, 5, 5}, box).occupiedCount() == 0);
    CHECK(extractMesh(empty, GridDims{5, 5, 5}, box).empty());
    const auto big = buildField(singleSphere({0, 0, 0}, 50.0));
    CHECK(voxelize(big, GridDims{5, 5, 5}, box).occupiedCount() == 125);
}

TEST_CASE("single metaball mesh is a closed sphere at the iso radius") {
    const double r = 1.0;
    const auto field = buildField(singleSphere({0.3, -0.2, 0.1}, r));
    const GridSpec spec = referenceGridSpec(field, kReferenceDims);
    const TriangleMesh mesh = extractMesh(field, spec);
    REQUIRE_FALSE(mesh.empty());
    const double iso = field.kernel().isoRadius(r);
    double worst = 0.0;
    for (const Vec3& v : mesh.vertices) worst = std::max(worst, std::fabs(distance(v, {0.3, -0.2, 0.1}) - iso));
    CHECK(worst <= spec.cellDiagonal());
    const MeshTopology topo = analyzeTopology(mesh);
    CHECK(topo.watertight());
    CHECK(topo.eulerCharacteristic() == 2);
    // Outward winding: positive enclosed volume close to the analytic ball.
    const double ball = 4.0 / 3.0 * std::numbers::pi * iso * iso * iso;
    CHECK(testing::signedVolume(mesh) == doctest::Approx(ball).epsilon(0.02));
}

TEST_CASE("vertex normals are unit, outward and agree with face winding") {
    std::mt19937_64 rng(5);
    const auto v = randomPack(rng, 25, 1.5);
    const auto field = buildField(v);
    const TriangleMesh mesh = extractMesh(field, referenceGridSpec(field, {40, 40, 40}));
    REQUIRE(mesh.normals.size() == mesh.vertices.size());
    for (const Vec3& n : mesh.normals) CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-6));
    std::size_t agree = 0;
    for (const auto& t : mesh.triangles) {
        const Vec3 face = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]], mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        const Vec3 vn = mesh.normals[t[0]] + mesh.normals[t[1]] + mesh.normals[t[2]];
        agree += dot(face, vn) > 0.0;
    }
    CHECK(static_cast<double>(agree) >= 0.99 * static_cast<double>(mesh.triangles.size()));
    CHECK(testing::signedVolume(mesh) > 0.0);
    CHECK(analyzeTopology(mesh).watertight());
}

TEST_CASE("parallel sampling and meshing are bitwise equal to serial") {
    std::mt19937_64 rng(3);
    const auto v = randomPack(rng, 200, 4.0);
    const auto field = buildField(v);
    const GridSpec spec = referenceGridSpec(field, {30, 37, 29});
    const SampledField serial = sampleField(field, spec, 1);
    for (unsigned jobs : {2u, 3u, 8u}) {
        const SampledField par = sampleField(field, spec, jobs);
        CHECK(par.values == serial.values);
        CHECK(par.dominant == serial.dominant);
        const TriangleMesh a = extractMesh(serial, 1), b = extractMesh(par, jobs);
        CHECK(a.vertices == b.vertices);
        CHECK(a.triangles == b.triangles);
        CHECK(a.normals == b.normals);
    }
}

TEST_CASE("voxel grid serialization round-trips") {
    std::mt19937_64 rng(9);
    const auto field = buildField(randomPack(rng, 20, 2.0));
    const VoxelGrid g = voxelize(field, referenceGridSpec(field, {7, 9, 11}));
    CHECK(parseVoxelGrid(serializeVoxelGrid(g)) == g);
    CHECK_THROWS(parseVoxelGrid("garbage"));
    std::string bytes = serializeVoxelGrid(g);
    bytes.pop_back();
    CHECK_THROWS(parseVoxelGrid(bytes));
}

TEST_CASE("voxel labels are validated") {
    GridSpec spec = gridForBox([] {
        Aabb b;
        b.expand({0, 0, 0});
        b.expand({1, 1, 1});
        return b;
    }(), {2, 2, 2});
    CHECK_THROWS(VoxelGrid(spec, std::vector<std::uint8_t>(7, kNoTissue)));
    CHECK_THROWS(VoxelGrid(spec, std::vector<std::uint8_t>(8, 3)));
}

TEST_CASE("PLY round trip keeps geometry") {
    const auto field = buildField(singleSphere({0, 0, 0}, 1.0));
    const TriangleMesh m = extractMesh(field, referenceGridSpec(field, {12, 12, 12}));
    const TriangleMesh back = parsePly(serializePly(m));
    REQUIRE(back.vertices.size() == m.vertices.size());
    CHECK(back.triangles == m.triangles);
    // Coordinates are written with nine significant digits.
    for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK(distance(back.vertices[i], m.vertices[i]) <= 1e-8);
    CHECK_THROWS(parsePly("ply\nformat binary_little_endian 1.0\nend_header\n"));
}

TEST_CASE("sphere pack JSON round trip and validation") {
    std::mt19937_64 rng(1);
    auto v = randomPack(rng, 10, 2.0);
    v.markRemoved(3);
    const auto back = parseSpherePack(serializeSpherePack(v));
    REQUIRE(back.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(back.spheres()[i].center == v.spheres()[i].center);
        CHECK(back.spheres()[i].radius == v.spheres()[i].radius);
        CHECK(back.spheres()[i].tissue == v.spheres()[i].tissue);
    }
    CHECK(back.tissueCounts() == v.tissueCounts());
    CHECK_THROWS(parseSpherePack("{\"spheres\": 3}"));
    CHECK_THROWS(parseSpherePack("not json"));
    CHECK_THROWS(SpherePackVolume({Sphere{{0, 0, 0}, -1.0, Tissue::Pulp, false}}));
}

TEST_CASE("tissue names") {
    for (Tissue t : kAllTissues) CHECK(parseTissue(tissueName(t)) == t);
    CHECK_FALSE(parseTissue("bone").has_value());
}

// ---------------------------------------------------------------- drilling

TEST_CASE("drill step removal rule") {
    SpherePackVolume v({Sphere{{0, 0, 0}, 0.5, Tissue::Enamel, false}, Sphere{{1, 0, 0}, 0.5, Tissue::Enamel, false},
                        Sphere{{10, 0, 0}, 0.5, Tissue::Dentin, false}});
    CHECK(applyDrillStep(v, Pose{{50, 50, 50}, {}}, 1.0) == 0);
    // Boundary: distance equal to the radius removes.
    CHECK(applyDrillStep(v, Pose{{0, 0, 0}, {}}, 1.0) == 2);
    CHECK(applyDrillStep(v, Pose{{0, 0, 0}, {}}, 1.0) == 0);
    CHECK(v.removedCount() == 2);
    CHECK_THROWS(applyDrillStep(v, Pose{}, 0.0));
}

TEST_CASE("drill script parsing and validation") {
    const auto s = parseDrillScript("# header\n0 0 0 0 0 0 0 0.5 1\n0.1 1 2 3 0 0 0 0.5 false\n");
    REQUIRE(s.size() == 2);
    CHECK_FALSE(s.steps()[1].drillingActive);
    CHECK(parseDrillScript(serializeDrillScript(s)).steps()[1].burTip.position == Vec3{1, 2, 3});
    CHECK_THROWS_WITH(parseDrillScript("0 0 0 0 0 0 0 0.5 1\n0 0 0 0 0 0 0 0.5 1\n"),
                      doctest::Contains("line 2"));
    CHECK_THROWS(parseDrillScript("0 0 0 0 0 0 0 -1 1\n"));
    CHECK_THROWS(parseDrillScript("0 0 0 0 0 0 0 1 2\n"));
    CHECK_THROWS(parseDrillScript("0 0 0 0 0 0 0 1 1 extra\n"));
}

namespace {

DrillScript randomScript(std::mt19937_64& rng, std::size_t n, double t0, bool active) {
    std::uniform_real_distribution<double> pos(-3, 3), rad(0.3, 1.0);
    std::vector<DrillStep> steps;
    for (std::size_t i = 0; i < n; ++i) {
        steps.push_back({t0 + 0.1 * static_cast<double>(i), Pose{{pos(rng), pos(rng), pos(rng)}, {}}, rad(rng),
                         active || i % 2 == 1});
    }
    return DrillScript(std::move(steps));
}

} // namespace

TEST_CASE("replay equals a sequential brute-force oracle") {
    std::mt19937_64 rng(21);
    const auto v = randomPack(rng, 2000, 3.5);
    const DrillScript script = randomScript(rng, 30, 0.0, false);
    const ReplayResult r = replay(v, script);
    std::vector<bool> removed(v.size(), false);
    for (std::size_t s = 0; s < script.size(); ++s) {
        const DrillStep& step = script.steps()[s];
        std::size_t count = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!step.drillingActive || removed[i]) continue;
            if (distance(v.spheres()[i].center, step.burTip.position) <= step.burRadius) {
                removed[i] = true;
                ++count;
            }
        }
        CHECK(r.log[s].removed == count);
    }
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(r.volume.spheres()[i].removed == removed[i]);
    CHECK(r.totalRemoved() == static_cast<std::size_t>(std::count(removed.begin(), removed.end(), true)));
}

TEST_CASE("inactive steps remove nothing and scripts compose") {
    std::mt19937_64 rng(22);
    const auto v = randomPack(rng, 800, 3.0);
    std::vector<DrillStep> idle;
    for (int i = 0; i < 5; ++i) idle.push_back({0.1 * i, Pose{}, 2.0, false});
    CHECK(replay(v, DrillScript(idle)).totalRemoved() == 0);

    const DrillScript a = randomScript(rng, 8, 0.0, true);
    const DrillScript b = randomScript(rng, 8, 5.0, true);
    const auto joint = replay(v, a.concatenated(b)).volume;
    const auto staged = replay(replay(v, a).volume, b).volume;
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(joint.spheres()[i].removed == staged.spheres()[i].removed);
    CHECK_THROWS(b.concatenated(a));
}

TEST_CASE("drilling never increases occupancy") {
    std::mt19937_64 rng(23);
    auto v = randomPack(rng, 600, 3.0);
    const GridSpec spec = referenceGridSpec(buildField(v), {20, 20, 20});
    std::size_t previous = voxelize(buildField(v), spec).occupiedCount();
    std::uniform_real_distribution<double> pos(-3, 3);
    for (int i = 0; i < 10; ++i) {
        applyDrillStep(v, Pose{{pos(rng), pos(rng), pos(rng)}, {}}, 0.8);
        const std::size_t now = voxelize(ScalarField(v, MetaballKernel{}), spec).occupiedCount();
        CHECK(now <= previous);
        previous = now;
    }
}

// ---------------------------------------------------------------- reference tooth

TEST_CASE("reference tooth generator") {
    const auto small = generateReferenceTooth({300, 500, 40}, 4);
    CHECK(small.tissueCounts() == TissueCounts{300, 500, 40});
    const auto again = generateReferenceTooth({300, 500, 40}, 4);
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(small.spheres()[i].center == again.spheres()[i].center);
    const ToothShape shape;
    for (const Sphere& s : small.spheres()) CHECK(shape.tissueAt(s.center) == s.tissue);
}

TEST_CASE("access script carves the access cavity") {
    const DrillScript s = accessOpeningScript(kIdealAccessCavity);
    CHECK_FALSE(s.empty());
    for (const DrillStep& st : s.steps()) {
        CHECK(st.burTip.position.y >= kIdealAccessCavity.floorY - 1e-9);
    }
    CHECK_THROWS(accessOpeningScript(kIdealAccessCavity, 0.0));
}

TEST_CASE("carveCavity empties exactly the voxels inside the cavity") {
    const auto v = generateReferenceTooth({2000, 3000, 300}, 2);
    const auto field = buildField(v);
    const VoxelGrid g = voxelize(field, referenceGridSpec(field, {20, 30, 20}));
    const VoxelGrid c = carveCavity(g, kIdealAccessCavity);
    const GridSpec& spec = g.spec();
    for (std::size_t k = 0; k < spec.dims.nz; ++k)
        for (std::size_t j = 0; j < spec.dims.ny; ++j)
            for (std::size_t i = 0; i < spec.dims.nx; ++i) {
                const std::size_t idx = spec.index(i, j, k);
                if (kIdealAccessCavity.contains(spec.center(i, j, k))) {
                    CHECK_FALSE(c.occupied(idx));
                } else {
                    CHECK(c.label(idx) == g.label(idx));
                }
            }
}

TEST_CASE("synthetic cavities are deterministic and varied") {
    const auto a = syntheticCavities(50, 3), b = syntheticCavities(50, 3);
    std::set<double> floors;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].floorY == b[i].floorY);
        CHECK(a[i].minX < a[i].maxX);
        floors.insert(a[i].floorY);
    }
    CHECK(floors.size() > 10);
}
