#pragma once

#include "toothsim/field.hpp"
#include "toothsim/stats.hpp"
#include "toothsim/voxel_grid.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace toothsim::cli {

namespace fs = std::filesystem;

/// Inputs, output directory and options for a run. Every command reads the subset it
/// needs and fails up front when a referenced file does not exist.
struct RunManifest {
    std::optional<fs::path> tooth;        // sphere pack JSON
    std::optional<fs::path> pristine;     // voxel grid of the undrilled tooth
    std::optional<fs::path> ideal;        // voxel grid of the ideal preparation
    std::vector<fs::path> scripts;        // drill scripts
    std::vector<fs::path> outcomes;       // drilled voxel grids
    std::vector<fs::path> gazeLogs;
    std::optional<fs::path> mesh;         // PLY for gaze hit tests
    std::optional<fs::path> counts;       // per-outcome confusion counts CSV
    std::optional<fs::path> experts;      // expert ratings CSV
    std::optional<fs::path> study;        // study table CSV
    std::optional<fs::path> calibration;  // calibration config JSON
    fs::path outputDir = "out";

    GridDims grid = kReferenceDims;
    MetaballKernel kernel;
    stats::KappaWeighting kappaWeighting = stats::KappaWeighting::Linear;
    stats::Tails tails = stats::Tails::Less;
    std::size_t k = 20;
    std::string selectionMetric = "f1";
    std::uint64_t seed = 1;
    unsigned jobs = 0;
};

/// Reads a JSON manifest. Relative paths resolve against the manifest's directory.
///   {"inputs": {"tooth": .., "pristine": .., "ideal": .., "scripts": [..],
///               "outcomes": [..], "gazeLogs": [..], "mesh": .., "counts": ..,
///               "experts": .., "study": .., "calibration": ..},
///    "outputs": "dir",
///    "options": {"grid": "90x135x90", "iso": 0.5, "kernelSupport": 2.0,
///                "kappaWeighting": "linear", "tails": "less", "k": 20,
///                "selectionMetric": "f1", "seed": 1, "jobs": 0}}
RunManifest loadManifest(const fs::path& path);

/// Fills inputs that are still unset from conventional names inside `dir`:
/// tooth.json, pristine.tsvox, ideal.tsvox, scripts/*.drill, outcomes/*.tsvox,
/// gaze/*.gaze, tooth.ply, counts.csv, experts.csv, study.csv, calibration.json.
void discoverInputs(RunManifest& manifest, const fs::path& dir);

/// voxelize writes pristine.tsvox and tooth.ply, matching the discovery names.
/// Each command writes data to `out` or into the output directory and diagnostics to
/// `err`. Fatal problems throw Error.
void cmdVoxelize(const RunManifest& m, std::ostream& out, std::ostream& err);
void cmdDrillReplay(const RunManifest& m, std::ostream& out, std::ostream& err);
void cmdScore(const RunManifest& m, std::ostream& out, std::ostream& err);
void cmdCompareMetrics(const RunManifest& m, std::ostream& out, std::ostream& err);
void cmdCalibrate(const RunManifest& m, std::ostream& out, std::ostream& err);
void cmdGazeStats(const RunManifest& m, std::ostream& out, std::ostream& err);
void cmdStudyReport(const RunManifest& m, std::ostream& out, std::ostream& err);

struct FixtureOptions {
    std::size_t enamel = 100000;
    std::size_t dentin = 170000;
    std::size_t pulp = 10000;
    std::size_t outcomes = 240;
};

/// Writes a self-consistent input directory into m.outputDir: tooth, pristine and
/// ideal grids, a drill script, a synthetic outcome batch with expert ratings, a
/// calibration config and a gaze log.
void cmdMakeFixtures(const RunManifest& m, const FixtureOptions& options, std::ostream& out, std::ostream& err);

} // namespace toothsim::cli
