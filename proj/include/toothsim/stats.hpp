#pragma once

#include "toothsim/geometry.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace toothsim::stats {

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator).
double sampleSd(std::span<const double> v);
double median(std::span<const double> v);

/// Linear-interpolation quantile on the sorted sample (h = (n-1) p), the convention of
/// R type 7 and numpy's default.
double quantile(std::span<const double> v, double p);

enum class Tails { TwoSided, Less, Greater };
Tails parseTails(const std::string& text);
std::string tailsName(Tails t);

struct TTestResult {
    double t = 0.0;
    double dof = 0.0;
    double p = 0.0;
    double meanDifference = 0.0;
};

/// One-sample t-test of paired differences against zero.
/// Less: H1 mean < 0; Greater: H1 mean > 0.
TTestResult pairedTTest(std::span<const double> differences, Tails tails = Tails::TwoSided);
/// Welch's unequal-variance two-sample test of mean(a) - mean(b).
TTestResult welchTTest(std::span<const double> a, std::span<const double> b, Tails tails = Tails::TwoSided);
/// Student's pooled-variance two-sample test of mean(a) - mean(b).
TTestResult pooledTTest(std::span<const double> a, std::span<const double> b, Tails tails = Tails::TwoSided);

struct AnovaResult {
    double f = 0.0;
    double dofBetween = 0.0;
    double dofWithin = 0.0;
    double p = 1.0;
};

/// One-way ANOVA with (k - 1, N - k) degrees of freedom. When the group means coincide
/// exactly F is 0 and p is 1, even if the within-group variance is also zero.
AnovaResult oneWayAnova(const std::vector<std::vector<double>>& groups);

struct CorrelationResult {
    double r = 0.0;
    double p = 1.0;  // two-sided, via t = r sqrt((n-2)/(1-r^2))
    std::size_t n = 0;
};

CorrelationResult pearson(std::span<const double> a, std::span<const double> b);

/// Two raters scoring the same outcomes.
struct PairedRatings {
    std::vector<std::string> outcomeIds;
    std::vector<double> raterA;
    std::vector<double> raterB;

    void validate() const;
    PairedRatings swapped() const { return {outcomeIds, raterB, raterA}; }
};

enum class KappaWeighting { None, Linear, Quadratic };
KappaWeighting parseKappaWeighting(const std::string& text);

/// Cohen's kappa on ratings rounded to the nearest integer category. Weighted forms use
/// disagreement weights |i - j| (linear) or (i - j)^2 (quadratic).
double cohenKappa(const PairedRatings& ratings, KappaWeighting weighting = KappaWeighting::Linear);

/// ICC(2,1): two-way random effects, absolute agreement, single rater.
double icc(const PairedRatings& ratings);

/// Information-based measure of disagreement: mean of log2(|a - b| / max(a, b) + 1),
/// with pairs that are both zero contributing 0. Ratings must be nonnegative.
double ibmd(const PairedRatings& ratings);

struct ShapiroWilkResult {
    double w = 0.0;
    double p = 0.0;
};

/// Shapiro-Wilk normality test (Royston's approximation), 3 <= n <= 5000.
ShapiroWilkResult shapiroWilk(std::span<const double> values);

struct IqrResult {
    std::vector<double> kept;
    std::vector<double> removed;
    std::vector<std::size_t> keptIndices;
    std::vector<std::size_t> removedIndices;
    double q1 = 0.0;
    double q3 = 0.0;
    double lowerFence = 0.0;
    double upperFence = 0.0;
};

/// Tukey fences at 1.5 IQR using `quantile`. Values on a fence are kept. Needs n >= 4.
IqrResult iqrOutliers(std::span<const double> values);

/// Greedy 1-D farthest-point selection of k indices: the minimum first, then the
/// maximum, then repeatedly the score farthest from everything chosen so far. Ties
/// go to the lower index. Indices are returned in selection order.
std::vector<std::size_t> uniformCoverageSelect(std::span<const double> scores, std::size_t k);

enum class Group { StereoAligned = 1, MonoAligned = 2, StereoMisaligned = 3, MonoMisaligned = 4 };
std::string groupName(Group g);
bool isStereo(Group g);
bool isAligned(Group g);

/// One participant's pre/post expert errors and six simulator trial scores.
struct LearningRecord {
    std::string participantId;
    Group group = Group::StereoAligned;
    double e0 = 0.0;
    double e1 = 0.0;
    std::array<double, 6> simulatorErrors{};
    double meanEyeToothDistance = 0.0;  // cm; NaN when unknown

    void validate() const;
};

/// e_delta = e1 - e0; negative values mean the error went down.
double learningGain(const LearningRecord& r);

} // namespace toothsim::stats
