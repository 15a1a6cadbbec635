#pragma once

#include "toothsim/stats.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace toothsim {

struct SkippedRow {
    std::size_t line = 0;
    std::string reason;
};

struct StudyTable {
    std::vector<stats::LearningRecord> records;
    std::vector<SkippedRow> skipped;
};

/// Columns: participantId, group, e0, e1, trial1..trial6, meanEyeToothDistance (the last
/// may be empty). Malformed rows are collected in `skipped` instead of aborting.
StudyTable parseStudyCsv(const std::string& text);
StudyTable loadStudyCsv(const std::filesystem::path& path);

/// A statistic that either produced a value or failed with a reason.
template <typename T>
struct Outcome {
    std::optional<T> value;
    std::string error;
};

struct Descriptives {
    std::size_t n = 0;
    double mean = 0.0;
    std::optional<double> sd;
};

struct GroupSummary {
    stats::Group group = stats::Group::StereoAligned;
    Descriptives pre;
    Descriptives post;
    Descriptives gain;
    Outcome<stats::TTestResult> gainTest;
};

struct StudyAnalysis {
    stats::Tails tails = stats::Tails::Less;
    std::vector<double> allGains;
    stats::IqrResult outliers;
    std::vector<stats::LearningRecord> kept;
    std::vector<std::string> removedParticipants;
    Descriptives pre;
    Descriptives post;
    Descriptives gain;
    Outcome<stats::TTestResult> cohortTest;
    std::array<GroupSummary, 4> groups;
    Outcome<stats::AnovaResult> gainAnova;
    Outcome<stats::AnovaResult> simulatorGainAnova;
    Outcome<stats::TTestResult> stereoVsMono;
    Outcome<stats::TTestResult> alignedVsMisaligned;
    Outcome<stats::CorrelationResult> preVsFirstTrial;
    Outcome<stats::CorrelationResult> realVsSimulatorGain;
    Outcome<stats::CorrelationResult> distanceVsGain;
};

/// Learning gains, IQR outlier removal on the gains, then every test on the kept
/// participants. `tails` applies to the gain t-tests (Less: gains below zero).
/// The simulator gain is trial6 - trial1.
StudyAnalysis analyzeStudy(const std::vector<stats::LearningRecord>& records, stats::Tails tails = stats::Tails::Less);

std::string studyReportJson(const StudyAnalysis& analysis, const std::vector<SkippedRow>& skipped, int indent = 2);

} // namespace toothsim
