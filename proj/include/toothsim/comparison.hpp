#pragma once

#include "toothsim/scoring.hpp"
#include "toothsim/stats.hpp"
#include "toothsim/tooth_fixture.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace toothsim {

/// Reads `outcome,TP,TN,FP,FN` columns (extra columns ignored), e.g. a batch score CSV.
std::vector<ScoredOutcome> parseCountsCsv(const std::string& text);
std::vector<ScoredOutcome> loadCountsCsv(const std::filesystem::path& path);

/// Expert ratings on the 0-15 error scale keyed by outcome id. `second` holds an
/// optional second rater for agreement statistics.
struct ExpertTable {
    std::vector<std::string> ids;
    std::vector<double> scores;
    std::optional<std::vector<double>> second;

    std::optional<double> scoreFor(const std::string& id) const;
};

/// Columns `outcome` and `expert`, optionally `expertB`. Returns nullopt when the
/// `expert` column is missing.
std::optional<ExpertTable> parseExpertCsv(const std::string& text);

struct MetricAssessment {
    std::string name;
    std::size_t defined = 0;  // outcomes where the metric has a value
    std::optional<stats::ShapiroWilkResult> normality;
    std::string normalityError;
    std::optional<stats::CorrelationResult> expertCorrelation;
    std::string correlationError;
};

struct InterRaterAgreement {
    double kappa = 0.0;
    double icc = 0.0;
    double ibmd = 0.0;
};

struct MetricComparison {
    std::vector<MetricAssessment> metrics;  // "dentist" first, then the battery
    std::vector<std::string> rankingByCorrelation;  // |R| descending, ties by name
    std::string selectionMetric;
    std::vector<std::string> selectedIds;
    std::string selectionError;
    std::optional<double> selectedIbmd;  // dentist vs expert on the selected outcomes
    std::string ibmdError;
    std::optional<InterRaterAgreement> agreement;
    std::string agreementError;
    bool expertsProvided = false;
};

struct ComparisonOptions {
    std::size_t k = 20;
    std::string selectionMetric = "f1";
    stats::KappaWeighting kappaWeighting = stats::KappaWeighting::Linear;
};

/// Normality screen for every metric, Pearson R against experts when available, a
/// uniform-coverage subset on the selection metric and the IBMD of the dentist score
/// against the experts on that subset. Per-metric failures are recorded, not thrown.
MetricComparison compareMetrics(const std::vector<ScoredOutcome>& outcomes, const std::optional<ExpertTable>& experts,
                                const ComparisonOptions& options = {});

const MetricAssessment* findMetric(const MetricComparison& c, const std::string& name);

std::string comparisonReportJson(const MetricComparison& c, int indent = 2);

/// Scores `count` synthetic cavities carved into the pristine grid against the ideal.
/// Ids are "S001", "S002", ...
std::vector<ScoredOutcome> syntheticOutcomeBatch(const VoxelGrid& pristine, const VoxelGrid& ideal, std::size_t count,
                                                 std::uint64_t seed, unsigned jobs = 0);

/// Two simulated raters: 15 (1 - exp(-D / 8)) plus independent uniform noise in
/// [-noise, noise], clamped to [0, 15] and rounded to half points. Outcomes with an
/// undefined dentist score are left out.
ExpertTable syntheticExperts(const std::vector<ScoredOutcome>& outcomes, std::uint64_t seed, double noise = 0.75);

std::string expertCsv(const ExpertTable& table);

} // namespace toothsim
