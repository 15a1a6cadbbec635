#pragma once

#include "toothsim/voxel_grid.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace toothsim {

/// Voxel confusion counts over the pristine tooth. The positive class is *undrilled*
/// material, which inverts the usual convention:
///   TP kept & should keep      TN drilled & should drill
///   FP kept & should drill     FN drilled & should keep
/// so FN counts over-drilling and FP counts under-drilling.
struct ClassificationCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    friend bool operator==(const ClassificationCounts&, const ClassificationCounts&) = default;
};

/// All three grids must share placement. Throws "material creation" if the outcome
/// occupies a voxel the pristine tooth does not.
ClassificationCounts classify(const VoxelGrid& outcome, const VoxelGrid& ideal, const VoxelGrid& pristine);

struct PrecisionSensitivity {
    double precision = 0.0;
    double sensitivity = 0.0;
};

/// P = TP/(TP+FP), S = TP/(TP+FN). Throws "degenerate counts" on a zero denominator.
PrecisionSensitivity precisionSensitivity(const ClassificationCounts& c);

/// Rescaling anchors: P is mapped from [0.95, 1] and S from [0.2, 1] onto [0, 1].
inline constexpr double kPrecisionFloor = 0.95;
inline constexpr double kSensitivityFloor = 0.2;
inline constexpr double kSensitivityWeight = 1.5;
inline constexpr double kDentistScale = 15.0;

double rescaledPrecision(double precision);
double rescaledSensitivity(double sensitivity);

/// Dentist error score from P and S: (1 - (1.5 S~ + P~) / 2.5) * 15. 0 is ideal.
double dentistFromRates(double precision, double sensitivity);
/// Dentist score via the rescaled weighted mean of P and S.
double dentist(const ClassificationCounts& c);
/// Same score as a single rational expression in the counts:
/// 15 (32 FP TP + 3 FN TP + 35 FN FP) / (4 (TP+FN)(TP+FP)).
double dentistClosedForm(const ClassificationCounts& c);

struct DentistBreakdown {
    double precision = 0.0;
    double sensitivity = 0.0;
    double rescaledPrecision = 0.0;
    double rescaledSensitivity = 0.0;
    double score = 0.0;            // compositional form
    double scoreClosedForm = 0.0;  // rational form
    /// Set when P < 0.95 or S < 0.2: a rescaled term is negative and the score may pass 15.
    bool outOfRange = false;
};

DentistBreakdown dentistBreakdown(const ClassificationCounts& c);

/// F1 = 2TP / (2TP + FP + FN).
double f1(const ClassificationCounts& c);

enum class Orientation { Similarity, Error };

struct MetricScore {
    std::string name;
    std::optional<double> value;  // empty when a denominator vanished
    Orientation orientation = Orientation::Similarity;
    double rangeMin = 0.0;
    double rangeMax = 1.0;
    bool degenerate = false;
    bool outOfRange = false;
};

/// Fixed battery of 24 confusion-matrix metrics, in a stable order:
/// accuracy, balanced_accuracy, error_rate, precision, sensitivity, specificity,
/// negative_predictive_value, false_positive_rate, false_negative_rate,
/// false_discovery_rate, false_omission_rate, f1, f2, f0_5, jaccard,
/// matthews_correlation, informedness, markedness, fowlkes_mallows, cohen_kappa,
/// geometric_mean, positive_likelihood_ratio, negative_likelihood_ratio,
/// diagnostic_odds_ratio.
std::vector<MetricScore> metricBattery(const ClassificationCounts& c);
std::vector<std::string> metricBatteryNames();
inline constexpr std::size_t kBatterySize = 24;

/// JSON report for one outcome: counts, P, S, P~, S~, both Dentist forms, F1, battery.
std::string scoreReportJson(const std::string& outcomeId, const ClassificationCounts& c, int indent = 2);

struct ScoredOutcome {
    std::string id;
    ClassificationCounts counts;
};

/// CSV, one row per outcome: id, counts, P, S, dentist, dentist_closed_form, then every
/// battery metric. Undefined values are written as empty cells.
std::string batchCsv(const std::vector<ScoredOutcome>& outcomes);

} // namespace toothsim
