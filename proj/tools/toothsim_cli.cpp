#include "toothsim/commands.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

namespace {

using namespace toothsim;
namespace fs = std::filesystem;

struct Flags {
    std::string manifest;
    std::string inputDir;
    std::string output;
    std::string grid;
    std::optional<double> iso;
    std::optional<double> kernelSupport;
    std::string kappaWeighting;
    std::string tails;
    std::optional<std::size_t> k;
    std::string selectionMetric;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;

    std::string tooth, pristine, ideal, mesh, counts, experts, study, calibration;
    std::vector<std::string> scripts, outcomes, gazeLogs;
};

void addCommon(CLI::App* cmd, Flags& f) {
    cmd->add_option("--manifest", f.manifest, "JSON run manifest");
    cmd->add_option("--input-dir", f.inputDir, "Directory searched for inputs by conventional names");
    cmd->add_option("-o,--output", f.output, "Output directory (default: out)");
    cmd->add_option("--grid", f.grid, "Grid dimensions, e.g. 90x135x90");
    cmd->add_option("--iso", f.iso, "Iso level of the metaball field");
    cmd->add_option("--kernel-support", f.kernelSupport, "Kernel support as a multiple of the sphere radius");
    cmd->add_option("--kappa-weighting", f.kappaWeighting, "none, linear or quadratic");
    cmd->add_option("--tails", f.tails, "two, less or greater");
    cmd->add_option("--k", f.k, "Size of the uniform-coverage subset");
    cmd->add_option("--selection-metric", f.selectionMetric, "Metric used for coverage selection");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--jobs", f.jobs, "Worker threads (0 = all cores)");
    cmd->add_option("--tooth", f.tooth, "Sphere pack JSON");
    cmd->add_option("--pristine", f.pristine, "Pristine voxel grid");
    cmd->add_option("--ideal", f.ideal, "Ideal preparation voxel grid");
    cmd->add_option("--script", f.scripts, "Drill script (repeatable)");
    cmd->add_option("--outcome", f.outcomes, "Outcome voxel grid (repeatable)");
    cmd->add_option("--gaze", f.gazeLogs, "Gaze log (repeatable)");
    cmd->add_option("--mesh", f.mesh, "Tooth mesh (PLY)");
    cmd->add_option("--counts", f.counts, "Confusion counts CSV");
    cmd->add_option("--experts", f.experts, "Expert ratings CSV");
    cmd->add_option("--study", f.study, "Study table CSV");
    cmd->add_option("--config", f.calibration, "Calibration config JSON");
}

// Command-line values override the manifest, which overrides discovered inputs.
cli::RunManifest buildManifest(const Flags& f) {
    cli::RunManifest m = f.manifest.empty() ? cli::RunManifest{} : cli::loadManifest(f.manifest);
    auto setPath = [](std::optional<fs::path>& slot, const std::string& v) {
        if (!v.empty()) slot = v;
    };
    auto setList = [](std::vector<fs::path>& slot, const std::vector<std::string>& v) {
        if (!v.empty()) slot.assign(v.begin(), v.end());
    };
    setPath(m.tooth, f.tooth);
    setPath(m.pristine, f.pristine);
    setPath(m.ideal, f.ideal);
    setPath(m.mesh, f.mesh);
    setPath(m.counts, f.counts);
    setPath(m.experts, f.experts);
    setPath(m.study, f.study);
    setPath(m.calibration, f.calibration);
    setList(m.scripts, f.scripts);
    setList(m.outcomes, f.outcomes);
    setList(m.gazeLogs, f.gazeLogs);
    if (!f.inputDir.empty()) cli::discoverInputs(m, f.inputDir);
    if (!f.output.empty()) m.outputDir = f.output;
    if (!f.grid.empty()) m.grid = parseGridDims(f.grid);
    if (f.iso) m.kernel.isoLevel = *f.iso;
    if (f.kernelSupport) m.kernel.supportScale = *f.kernelSupport;
    m.kernel.validate();
    if (!f.kappaWeighting.empty()) m.kappaWeighting = stats::parseKappaWeighting(f.kappaWeighting);
    if (!f.tails.empty()) m.tails = stats::parseTails(f.tails);
    if (f.k) m.k = *f.k;
    if (!f.selectionMetric.empty()) m.selectionMetric = f.selectionMetric;
    if (f.seed) m.seed = *f.seed;
    if (f.jobs) m.jobs = *f.jobs;
    return m;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tooth drilling simulation and outcome scoring"};
    app.require_subcommand(1);
    Flags flags;
    cli::FixtureOptions fixture;
    std::function<void(const cli::RunManifest&)> action;

    using Command = void (*)(const cli::RunManifest&, std::ostream&, std::ostream&);
    const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
        {"voxelize", {"Voxelize a tooth and extract its surface mesh", cli::cmdVoxelize}},
        {"drill-replay", {"Replay drill scripts and voxelize the outcomes", cli::cmdDrillReplay}},
        {"score", {"Score outcome grids against the ideal preparation", cli::cmdScore}},
        {"compare-metrics", {"Rank scoring metrics against expert ratings", cli::cmdCompareMetrics}},
        {"calibrate", {"Print the hand-tool calibration chain", cli::cmdCalibrate}},
        {"gaze-stats", {"Per-trial eye-tooth distances from gaze logs", cli::cmdGazeStats}},
        {"study-report", {"Learning-gain analysis of a study table", cli::cmdStudyReport}},
    };
    for (const auto& [name, info] : commands) {
        CLI::App* cmd = app.add_subcommand(name, info.first);
        addCommon(cmd, flags);
        const Command run = info.second;
        cmd->callback([&action, run] { action = [run](const cli::RunManifest& m) { run(m, std::cout, std::cerr); }; });
    }
    CLI::App* make = app.add_subcommand("make-fixtures", "Generate a synthetic input directory");
    addCommon(make, flags);
    make->add_option("--enamel", fixture.enamel, "Enamel sphere count");
    make->add_option("--dentin", fixture.dentin, "Dentin sphere count");
    make->add_option("--pulp", fixture.pulp, "Pulp sphere count");
    make->add_option("--outcomes", fixture.outcomes, "Synthetic outcome count");
    make->callback([&] {
        action = [&](const cli::RunManifest& m) { cli::cmdMakeFixtures(m, fixture, std::cout, std::cerr); };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        action(buildManifest(flags));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
