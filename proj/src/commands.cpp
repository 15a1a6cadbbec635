#include "toothsim/commands.hpp"

#include "toothsim/calibration.hpp"
#include "toothsim/comparison.hpp"
#include "toothsim/drilling.hpp"
#include "toothsim/gaze.hpp"
#include "toothsim/mesh.hpp"
#include "toothsim/scoring.hpp"
#include "toothsim/study.hpp"
#include "toothsim/tooth_fixture.hpp"
#include "toothsim/volume.hpp"

#include "json_util.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

namespace toothsim::cli {

namespace {

const fs::path& require(const std::optional<fs::path>& p, const char* what) {
    if (!p) {
        throw Error(std::string("no ") + what + " given");
    }
    if (!fs::exists(*p)) {
        throw Error(std::string(what) + " '" + p->string() + "' does not exist");
    }
    return *p;
}

void requireAll(const std::vector<fs::path>& paths, const char* what) {
    if (paths.empty()) {
        throw Error(std::string("no ") + what + " given");
    }
    for (const auto& p : paths) {
        if (!fs::exists(p)) {
            throw Error(std::string(what) + " '" + p.string() + "' does not exist");
        }
    }
}

std::vector<fs::path> sortedFiles(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

RunManifest loadManifest(const fs::path& path) {
    const nlohmann::json doc = detail::parseJson(detail::readFile(path), "manifest");
    if (!doc.is_object()) {
        throw Error("manifest: top level must be an object");
    }
    const fs::path base = path.parent_path();
    auto resolve = [&](const nlohmann::json& j, const std::string& key) -> fs::path {
        if (!j.is_string()) {
            throw Error("manifest: " + key + " must be a path string");
        }
        const fs::path p = j.get<std::string>();
        return p.is_absolute() ? p : base / p;
    };
    RunManifest m;
    try {
        if (doc.contains("inputs")) {
            const auto& in = doc["inputs"];
            const std::pair<const char*, std::optional<fs::path>*> singles[] = {
                {"tooth", &m.tooth},   {"pristine", &m.pristine}, {"ideal", &m.ideal},
                {"mesh", &m.mesh},     {"counts", &m.counts},     {"experts", &m.experts},
                {"study", &m.study},   {"calibration", &m.calibration}};
            for (const auto& [key, slot] : singles) {
                if (in.contains(key)) *slot = resolve(in[key], key);
            }
            const std::pair<const char*, std::vector<fs::path>*> lists[] = {
                {"scripts", &m.scripts}, {"outcomes", &m.outcomes}, {"gazeLogs", &m.gazeLogs}};
            for (const auto& [key, slot] : lists) {
                if (!in.contains(key)) continue;
                if (!in[key].is_array()) throw Error(std::string("manifest: ") + key + " must be an array");
                for (const auto& item : in[key]) slot->push_back(resolve(item, key));
            }
        }
        if (doc.contains("outputs")) m.outputDir = resolve(doc["outputs"], "outputs");
        if (doc.contains("options")) {
            const auto& o = doc["options"];
            if (o.contains("grid")) m.grid = parseGridDims(o["grid"].get<std::string>());
            if (o.contains("iso")) m.kernel.isoLevel = o["iso"].get<double>();
            if (o.contains("kernelSupport")) m.kernel.supportScale = o["kernelSupport"].get<double>();
            if (o.contains("kappaWeighting")) {
                m.kappaWeighting = stats::parseKappaWeighting(o["kappaWeighting"].get<std::string>());
            }
            if (o.contains("tails")) m.tails = stats::parseTails(o["tails"].get<std::string>());
            if (o.contains("k")) m.k = o["k"].get<std::size_t>();
            if (o.contains("selectionMetric")) m.selectionMetric = o["selectionMetric"].get<std::string>();
            if (o.contains("seed")) m.seed = o["seed"].get<std::uint64_t>();
            if (o.contains("jobs")) m.jobs = o["jobs"].get<unsigned>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("manifest: ") + e.what());
    }
    m.kernel.validate();
    return m;
}

void discoverInputs(RunManifest& m, const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw Error("input directory '" + dir.string() + "' does not exist");
    }
    auto single = [&](std::optional<fs::path>& slot, const char* name) {
        if (!slot && fs::exists(dir / name)) slot = dir / name;
    };
    single(m.tooth, "tooth.json");
    single(m.pristine, "pristine.tsvox");
    single(m.ideal, "ideal.tsvox");
    single(m.mesh, "tooth.ply");
    single(m.counts, "counts.csv");
    single(m.experts, "experts.csv");
    single(m.study, "study.csv");
    single(m.calibration, "calibration.json");
    if (m.scripts.empty()) m.scripts = sortedFiles(dir / "scripts", ".drill");
    if (m.outcomes.empty()) m.outcomes = sortedFiles(dir / "outcomes", ".tsvox");
    if (m.gazeLogs.empty()) m.gazeLogs = sortedFiles(dir / "gaze", ".gaze");
}

void cmdVoxelize(const RunManifest& m, std::ostream& out, std::ostream& err) {
    const SpherePackVolume tooth = loadSpherePack(require(m.tooth, "tooth file"));
    const ScalarField field = buildField(tooth, m.kernel);
    const GridSpec spec = referenceGridSpec(field, m.grid);
    const SampledField sampled = sampleField(field, spec, m.jobs);
    const VoxelGrid grid = voxelize(sampled);
    const TriangleMesh mesh = extractMesh(sampled, m.jobs);
    const MeshTopology topo = analyzeTopology(mesh);
    saveVoxelGrid(grid, m.outputDir / "pristine.tsvox");
    savePly(mesh, m.outputDir / "tooth.ply");
    out << "grid " << formatGridDims(spec.dims) << "\n"
        << "occupied " << grid.occupiedCount() << "\n"
        << "vertices " << mesh.vertices.size() << "\n"
        << "triangles " << mesh.triangles.size() << "\n"
        << "watertight " << (topo.watertight() ? "yes" : "no") << "\n"
        << "euler " << topo.eulerCharacteristic() << "\n";
    if (!topo.watertight()) {
        err << "warning: mesh has " << topo.boundaryEdges << " boundary and " << topo.nonManifoldEdges
            << " non-manifold edges\n";
    }
}

void cmdDrillReplay(const RunManifest& m, std::ostream& out, std::ostream&) {
    const SpherePackVolume tooth = loadSpherePack(require(m.tooth, "tooth file"));
    requireAll(m.scripts, "drill script");
    std::vector<DrillScript> scripts;
    for (const auto& p : m.scripts) scripts.push_back(loadDrillScript(p));
    // Outcomes are voxelized on the pristine placement so they stay comparable.
    const GridSpec spec = referenceGridSpec(buildField(tooth, m.kernel), m.grid);
    out << "script,steps,removed,occupied\n";
    for (std::size_t i = 0; i < scripts.size(); ++i) {
        const ReplayResult r = replay(tooth, scripts[i]);
        const VoxelGrid grid = voxelize(buildField(r.volume, m.kernel), spec, m.jobs);
        const std::string id = m.scripts[i].stem().string();
        saveVoxelGrid(grid, m.outputDir / "outcomes" / (id + ".tsvox"));
        detail::writeFile(m.outputDir / "removals" / (id + ".csv"), serializeRemovalLog(r.log));
        out << id << "," << scripts[i].size() << "," << r.totalRemoved() << "," << grid.occupiedCount() << "\n";
    }
}

void cmdScore(const RunManifest& m, std::ostream& out, std::ostream&) {
    const VoxelGrid pristine = loadVoxelGrid(require(m.pristine, "pristine grid"));
    const VoxelGrid ideal = loadVoxelGrid(require(m.ideal, "ideal grid"));
    requireAll(m.outcomes, "outcome grid");
    std::vector<ScoredOutcome> scored(m.outcomes.size());
    detail::parallelFor(m.outcomes.size(), m.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            scored[i] = {m.outcomes[i].stem().string(), classify(loadVoxelGrid(m.outcomes[i]), ideal, pristine)};
        }
    });
    for (const auto& s : scored) {
        detail::writeFile(m.outputDir / "scores" / (s.id + ".json"), scoreReportJson(s.id, s.counts));
    }
    const std::string csv = batchCsv(scored);
    detail::writeFile(m.outputDir / "scores.csv", csv);
    out << csv;
}

void cmdCompareMetrics(const RunManifest& m, std::ostream& out, std::ostream& err) {
    std::vector<ScoredOutcome> outcomes;
    if (m.counts) {
        outcomes = loadCountsCsv(require(m.counts, "counts table"));
    } else {
        const VoxelGrid pristine = loadVoxelGrid(require(m.pristine, "pristine grid"));
        const VoxelGrid ideal = loadVoxelGrid(require(m.ideal, "ideal grid"));
        requireAll(m.outcomes, "outcome grid");
        for (const auto& p : m.outcomes) {
            outcomes.push_back({p.stem().string(), classify(loadVoxelGrid(p), ideal, pristine)});
        }
    }
    std::optional<ExpertTable> experts;
    if (m.experts) {
        experts = parseExpertCsv(detail::readFile(require(m.experts, "expert table")));
        if (!experts) {
            err << "notice: expert table has no 'outcome'/'expert' columns; correlations skipped\n";
        }
    } else {
        err << "notice: no expert table; correlations skipped\n";
    }
    const MetricComparison c = compareMetrics(outcomes, experts, {m.k, m.selectionMetric, m.kappaWeighting});
    for (const auto& metric : c.metrics) {
        if (!metric.normality) {
            err << "notice: " << metric.name << ": normality not computed (" << metric.normalityError << ")\n";
        }
    }
    if (!c.selectionError.empty()) {
        err << "notice: coverage selection skipped (" << c.selectionError << ")\n";
    }
    const std::string report = comparisonReportJson(c);
    detail::writeFile(m.outputDir / "comparison.json", report);
    out << report;
}

void cmdCalibrate(const RunManifest& m, std::ostream& out, std::ostream&) {
    out << calibrationAuditJson(loadCalibrationConfig(require(m.calibration, "calibration config")));
}

void cmdGazeStats(const RunManifest& m, std::ostream& out, std::ostream& err) {
    requireAll(m.gazeLogs, "gaze log");
    TriangleMesh mesh;
    if (m.mesh) {
        mesh = loadPly(require(m.mesh, "mesh"));
    } else {
        const SpherePackVolume tooth = loadSpherePack(require(m.tooth, "tooth file"));
        const ScalarField field = buildField(tooth, m.kernel);
        mesh = extractMesh(field, referenceGridSpec(field, m.grid), m.jobs);
    }
    if (mesh.empty()) {
        throw Error("tooth mesh is empty");
    }
    // Tooth meshes are in mm and centred on the logged tooth position (cm).
    const Vec3 meshCenter = mesh.bounds().center();
    std::vector<TrialGazeLog> logs;
    for (const auto& p : m.gazeLogs) {
        TrialGazeLog log = loadGazeLog(p);
        const TriangleMesh world = placeMesh(mesh, 0.1, log.toothCenter - meshCenter * 0.1);
        detectHits(log, world, m.jobs);
        if (log.hits.empty()) {
            err << "notice: trial " << log.trialId << " has no tooth fixation\n";
        }
        logs.push_back(std::move(log));
    }
    const std::string csv = gazeTrialCsv(logs);
    detail::writeFile(m.outputDir / "gaze.csv", csv);
    out << csv;
}

void cmdStudyReport(const RunManifest& m, std::ostream& out, std::ostream& err) {
    const StudyTable table = loadStudyCsv(require(m.study, "study table"));
    for (const SkippedRow& s : table.skipped) {
        err << "notice: study table line " << s.line << " skipped: " << s.reason << "\n";
    }
    const std::string report = studyReportJson(analyzeStudy(table.records, m.tails), table.skipped);
    detail::writeFile(m.outputDir / "study_report.json", report);
    out << report;
}

void cmdMakeFixtures(const RunManifest& m, const FixtureOptions& options, std::ostream& out, std::ostream&) {
    const fs::path& dir = m.outputDir;
    const SpherePackVolume tooth = generateReferenceTooth({options.enamel, options.dentin, options.pulp}, m.seed);
    saveSpherePack(tooth, dir / "tooth.json");
    const ScalarField field = buildField(tooth, m.kernel);
    const GridSpec spec = referenceGridSpec(field, m.grid);
    const SampledField sampled = sampleField(field, spec, m.jobs);
    const VoxelGrid pristine = voxelize(sampled);
    const VoxelGrid ideal = carveCavity(pristine, kIdealAccessCavity);
    saveVoxelGrid(pristine, dir / "pristine.tsvox");
    saveVoxelGrid(ideal, dir / "ideal.tsvox");
    savePly(extractMesh(sampled, m.jobs), dir / "tooth.ply");
    detail::writeFile(dir / "scripts" / "access.drill", serializeDrillScript(accessOpeningScript(kIdealAccessCavity)));

    const auto batch = syntheticOutcomeBatch(pristine, ideal, options.outcomes, m.seed, m.jobs);
    detail::writeFile(dir / "counts.csv", batchCsv(batch));
    detail::writeFile(dir / "experts.csv", expertCsv(syntheticExperts(batch, m.seed + 1)));

    detail::writeFile(dir / "calibration.json", R"({
  "mirrorOrigin": {"position": [0, 0, 0], "orientation": [0, 0, 0]},
  "drillOrigin": {"position": [30, 0, 0], "orientation": [0, 0, 0]},
  "offset": {"translation": [22, 26, -7], "rotation": [0, 0, 90]},
  "frame": {"down": "-z", "forward": "+x"},
  "measuredController": {"position": [20, 20, 0], "orientation": [0, 0, 85]},
  "misaligned": false
}
)");

    // A viewer about 23 cm in front of the tooth, glancing at and around it.
    TrialGazeLog log;
    log.trialId = "trial01";
    log.toothCenter = {0.0, 0.0, 23.0};
    std::mt19937_64 rng(m.seed + 2);
    auto jitter = [&](double s) { return s * (2.0 * unitFromBits(rng()) - 1.0); };
    for (int i = 0; i < 200; ++i) {
        GazeSample s;
        s.timestamp = 0.02 * i;
        const Vec3 head{jitter(1.0), jitter(1.0), jitter(1.5)};
        s.leftEye = head + Vec3{-3.2, 0.0, 0.0};
        s.rightEye = head + Vec3{3.2, 0.0, 0.0};
        const Vec3 focus = log.toothCenter + Vec3{jitter(0.8), jitter(0.9), 0.0};
        s.direction = normalized(focus - (s.leftEye + s.rightEye) * 0.5);
        log.samples.push_back(s);
    }
    detail::writeFile(dir / "gaze" / "trial01.gaze", serializeGazeLog(log));

    out << "wrote fixtures to " << dir.string() << "\n"
        << "spheres " << tooth.size() << "\n"
        << "occupied " << pristine.occupiedCount() << "\n"
        << "ideal occupied " << ideal.occupiedCount() << "\n"
        << "outcomes " << batch.size() << "\n";
}

} // namespace toothsim::cli
