#include "toothsim/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace toothsim::stats {

namespace bm = boost::math;

double mean(std::span<const double> v) {
    if (v.empty()) {
        throw Error("mean of empty sample");
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sampleSd(std::span<const double> v) {
    if (v.size() < 2) {
        throw Error("standard deviation needs at least 2 values");
    }
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::span<const double> v) {
    return quantile(v, 0.5);
}

double quantile(std::span<const double> v, double p) {
    if (v.empty()) {
        throw Error("quantile of empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error("quantile probability must lie in [0, 1]");
    }
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const double h = static_cast<double>(s.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

Tails parseTails(const std::string& text) {
    if (text == "two" || text == "two-sided" || text == "2") return Tails::TwoSided;
    if (text == "less") return Tails::Less;
    if (text == "greater") return Tails::Greater;
    throw Error("unknown tails '" + text + "' (expected two, less or greater)");
}

std::string tailsName(Tails t) {
    switch (t) {
    case Tails::TwoSided: return "two-sided";
    case Tails::Less: return "less";
    case Tails::Greater: return "greater";
    }
    return "?";
}

namespace {

double tPValue(double t, double dof, Tails tails) {
    const bm::students_t dist(dof);
    switch (tails) {
    case Tails::Less: return bm::cdf(dist, t);
    case Tails::Greater: return bm::cdf(bm::complement(dist, t));
    case Tails::TwoSided: break;
    }
    return std::min(1.0, 2.0 * bm::cdf(bm::complement(dist, std::fabs(t))));
}

double sampleVariance(std::span<const double> v, double m) {
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

} // namespace

TTestResult pairedTTest(std::span<const double> d, Tails tails) {
    if (d.size() < 2) {
        throw Error("paired t-test needs at least 2 differences");
    }
    const double m = mean(d);
    const double var = sampleVariance(d, m);
    if (!(var > 0.0)) {
        throw Error("zero variance");
    }
    const double n = static_cast<double>(d.size());
    TTestResult r;
    r.meanDifference = m;
    r.t = m / std::sqrt(var / n);
    r.dof = n - 1.0;
    r.p = tPValue(r.t, r.dof, tails);
    return r;
}

TTestResult welchTTest(std::span<const double> a, std::span<const double> b, Tails tails) {
    if (a.size() < 2 || b.size() < 2) {
        throw Error("Welch t-test needs at least 2 values per sample");
    }
    const double ma = mean(a), mb = mean(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double qa = sampleVariance(a, ma) / na;
    const double qb = sampleVariance(b, mb) / nb;
    if (!(qa + qb > 0.0)) {
        throw Error("zero variance in both samples");
    }
    TTestResult r;
    r.meanDifference = ma - mb;
    r.t = r.meanDifference / std::sqrt(qa + qb);
    r.dof = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    r.p = tPValue(r.t, r.dof, tails);
    return r;
}

TTestResult pooledTTest(std::span<const double> a, std::span<const double> b, Tails tails) {
    if (a.size() < 2 || b.size() < 2) {
        throw Error("pooled t-test needs at least 2 values per sample");
    }
    const double ma = mean(a), mb = mean(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled = ((na - 1.0) * sampleVariance(a, ma) + (nb - 1.0) * sampleVariance(b, mb)) / (na + nb - 2.0);
    if (!(pooled > 0.0)) {
        throw Error("zero variance in both samples");
    }
    TTestResult r;
    r.meanDifference = ma - mb;
    r.t = r.meanDifference / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    r.dof = na + nb - 2.0;
    r.p = tPValue(r.t, r.dof, tails);
    return r;
}

AnovaResult oneWayAnova(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) {
        throw Error("degenerate groups: ANOVA needs at least 2 groups");
    }
    std::size_t total = 0;
    double grandSum = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2) {
            throw Error("degenerate groups: every group needs at least 2 values");
        }
        total += g.size();
        grandSum += std::accumulate(g.begin(), g.end(), 0.0);
    }
    const double grand = grandSum / static_cast<double>(total);
    double ssBetween = 0.0, ssWithin = 0.0;
    bool meansEqual = true;
    const double firstMean = mean(groups.front());
    for (const auto& g : groups) {
        const double m = mean(g);
        meansEqual = meansEqual && m == firstMean;
        ssBetween += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double x : g) ssWithin += (x - m) * (x - m);
    }
    AnovaResult r;
    r.dofBetween = static_cast<double>(groups.size() - 1);
    r.dofWithin = static_cast<double>(total - groups.size());
    if (meansEqual) {
        return r;
    }
    if (!(ssWithin > 0.0)) {
        throw Error("degenerate groups: zero within-group variance");
    }
    r.f = (ssBetween / r.dofBetween) / (ssWithin / r.dofWithin);
    r.p = bm::cdf(bm::complement(bm::fisher_f(r.dofBetween, r.dofWithin), r.f));
    return r;
}

CorrelationResult pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error("pearson: samples differ in length");
    }
    if (a.size() < 3) {
        throw Error("pearson: need at least 3 pairs");
    }
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) {
        throw Error("pearson: zero variance");
    }
    CorrelationResult r;
    r.n = a.size();
    r.r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
    const double dof = static_cast<double>(a.size()) - 2.0;
    if (std::fabs(r.r) >= 1.0) {
        r.p = 0.0;
    } else {
        const double t = r.r * std::sqrt(dof / (1.0 - r.r * r.r));
        r.p = std::min(1.0, 2.0 * bm::cdf(bm::complement(bm::students_t(dof), std::fabs(t))));
    }
    return r;
}

void PairedRatings::validate() const {
    if (raterA.size() != raterB.size()) {
        throw Error("paired ratings: raters have different lengths");
    }
    if (!outcomeIds.empty() && outcomeIds.size() != raterA.size()) {
        throw Error("paired ratings: id count does not match rating count");
    }
    if (raterA.size() < 2) {
        throw Error("paired ratings: need at least 2 outcomes");
    }
    for (std::size_t i = 0; i < raterA.size(); ++i) {
        if (!std::isfinite(raterA[i]) || !std::isfinite(raterB[i])) {
            throw Error("paired ratings: non-finite rating");
        }
    }
}

KappaWeighting parseKappaWeighting(const std::string& text) {
    if (text == "none" || text == "unweighted") return KappaWeighting::None;
    if (text == "linear") return KappaWeighting::Linear;
    if (text == "quadratic") return KappaWeighting::Quadratic;
    throw Error("unknown kappa weighting '" + text + "' (expected none, linear or quadratic)");
}

double cohenKappa(const PairedRatings& ratings, KappaWeighting weighting) {
    ratings.validate();
    const std::size_t n = ratings.raterA.size();
    std::vector<long long> a(n), b(n);
    std::map<long long, std::size_t> category;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::llround(ratings.raterA[i]);
        b[i] = std::llround(ratings.raterB[i]);
        category.emplace(a[i], 0);
        category.emplace(b[i], 0);
    }
    std::vector<long long> values;
    for (auto& [value, idx] : category) {
        idx = values.size();
        values.push_back(value);
    }
    const std::size_t k = values.size();
    std::vector<double> observed(k * k, 0.0), rowMarg(k, 0.0), colMarg(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = category[a[i]], c = category[b[i]];
        observed[r * k + c] += 1.0 / static_cast<double>(n);
        rowMarg[r] += 1.0 / static_cast<double>(n);
        colMarg[c] += 1.0 / static_cast<double>(n);
    }
    auto weight = [&](std::size_t r, std::size_t c) -> double {
        const double d = static_cast<double>(values[r] - values[c]);
        switch (weighting) {
        case KappaWeighting::None: return r == c ? 0.0 : 1.0;
        case KappaWeighting::Linear: return std::fabs(d);
        case KappaWeighting::Quadratic: return d * d;
        }
        return 0.0;
    };
    double obsDis = 0.0, expDis = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            const double w = weight(r, c);
            obsDis += w * observed[r * k + c];
            expDis += w * rowMarg[r] * colMarg[c];
        }
    }
    if (!(expDis > 0.0)) {
        throw Error("undefined expected agreement");
    }
    return 1.0 - obsDis / expDis;
}

double icc(const PairedRatings& ratings) {
    ratings.validate();
    const std::size_t n = ratings.raterA.size();
    constexpr double k = 2.0;
    const double nd = static_cast<double>(n);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) grand += ratings.raterA[i] + ratings.raterB[i];
    grand /= k * nd;
    const double meanA = mean(ratings.raterA), meanB = mean(ratings.raterB);
    double ssRows = 0.0, ssTotal = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double rowMean = 0.5 * (ratings.raterA[i] + ratings.raterB[i]);
        ssRows += k * (rowMean - grand) * (rowMean - grand);
        ssTotal += (ratings.raterA[i] - grand) * (ratings.raterA[i] - grand) +
                   (ratings.raterB[i] - grand) * (ratings.raterB[i] - grand);
    }
    const double ssCols = nd * ((meanA - grand) * (meanA - grand) + (meanB - grand) * (meanB - grand));
    const double ssError = std::max(0.0, ssTotal - ssRows - ssCols);
    if (!(ssRows > 0.0)) {
        throw Error("icc: zero between-target variance");
    }
    const double msRows = ssRows / (nd - 1.0);
    const double msCols = ssCols / (k - 1.0);
    const double msError = ssError / ((nd - 1.0) * (k - 1.0));
    return (msRows - msError) / (msRows + (k - 1.0) * msError + k * (msCols - msError) / nd);
}

double ibmd(const PairedRatings& ratings) {
    ratings.validate();
    double sum = 0.0;
    for (std::size_t i = 0; i < ratings.raterA.size(); ++i) {
        const double a = ratings.raterA[i], b = ratings.raterB[i];
        if (a < 0.0 || b < 0.0) {
            throw Error("ibmd: ratings must be nonnegative");
        }
        const double hi = std::max(a, b);
        if (hi > 0.0) {
            sum += std::log2(std::fabs(a - b) / hi + 1.0);
        }
    }
    return sum / static_cast<double>(ratings.raterA.size());
}

namespace {

double poly(const double* c, int n, double x) {
    double result = c[0];
    if (n > 1) {
        double p = x * c[n - 1];
        for (int j = n - 2; j > 0; --j) p = (p + c[j]) * x;
        result += p;
    }
    return result;
}

} // namespace

ShapiroWilkResult shapiroWilk(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 3) {
        throw Error("Shapiro-Wilk needs at least 3 values");
    }
    if (n > 5000) {
        throw Error("Shapiro-Wilk supports at most 5000 values");
    }
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19 * std::max(1.0, std::fabs(x.back())))) {
        throw Error("Shapiro-Wilk: constant sample");
    }

    static constexpr double g[2] = {-2.273, 0.459};
    static constexpr double c1[6] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[3] = {-0.4803, -0.082676, 0.0030302};

    // Half-vector of coefficients for the lower order statistics, a[0] largest.
    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        const bm::normal stdNormal;
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = bm::quantile(stdNormal, (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, 6, rsn) - m[0] / ssumm2;
        std::size_t first;
        double fac;
        if (n > 5) {
            first = 2;
            const double a2 = -m[1] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
        } else {
            first = 1;
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
    }

    // W is the squared correlation between the antisymmetric coefficients and the data.
    std::vector<double> coeff(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        coeff[i] = -a[i];
        coeff[n - 1 - i] = a[i];
    }
    const double ca = mean(coeff);
    double sx = 0.0;
    for (double v : x) sx += v / range;
    sx /= an;
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = coeff[i] - ca;
        const double dx = x[i] / range - sx;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);

    ShapiroWilkResult r;
    r.w = 1.0 - w1;
    if (n == 3) {
        constexpr double sixOverPi = 1.90985931710274;
        constexpr double piOverThree = 1.04719755119660;
        r.p = std::max(0.0, sixOverPi * (std::asin(std::sqrt(r.w)) - piOverThree));
        return r;
    }
    double y = std::log(w1);
    const double lnN = std::log(an);
    double mu, sigma;
    if (n <= 11) {
        const double gamma = poly(g, 2, an);
        if (y >= gamma) {
            r.p = 1e-99;
            return r;
        }
        y = -std::log(gamma - y);
        mu = poly(c3, 4, an);
        sigma = std::exp(poly(c4, 4, an));
    } else {
        mu = poly(c5, 4, lnN);
        sigma = std::exp(poly(c6, 3, lnN));
    }
    r.p = bm::cdf(bm::complement(bm::normal(mu, sigma), y));
    return r;
}

IqrResult iqrOutliers(std::span<const double> values) {
    if (values.size() < 4) {
        throw Error("IQR outlier analysis needs at least 4 values");
    }
    IqrResult r;
    r.q1 = quantile(values, 0.25);
    r.q3 = quantile(values, 0.75);
    const double iqr = r.q3 - r.q1;
    r.lowerFence = r.q1 - 1.5 * iqr;
    r.upperFence = r.q3 + 1.5 * iqr;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (v < r.lowerFence || v > r.upperFence) {
            r.removed.push_back(v);
            r.removedIndices.push_back(i);
        } else {
            r.kept.push_back(v);
            r.keptIndices.push_back(i);
        }
    }
    return r;
}

std::vector<std::size_t> uniformCoverageSelect(std::span<const double> scores, std::size_t k) {
    const std::size_t n = scores.size();
    if (k > n) {
        throw Error("uniform coverage: k exceeds the number of scores");
    }
    std::vector<std::size_t> chosen;
    if (k == 0) {
        return chosen;
    }
    std::vector<bool> taken(n, false);
    std::vector<double> gap(n, std::numeric_limits<double>::infinity());
    auto take = [&](std::size_t idx) {
        chosen.push_back(idx);
        taken[idx] = true;
        for (std::size_t i = 0; i < n; ++i) {
            gap[i] = std::min(gap[i], std::fabs(scores[i] - scores[idx]));
        }
    };
    // std::min_element / max_element return the first extreme, i.e. the lowest index.
    take(static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin()));
    if (chosen.size() < k) {
        std::size_t hi = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (scores[i] > scores[hi]) hi = i;
        }
        if (taken[hi]) {
            hi = taken[0] ? 1 : 0;  // all scores equal
        }
        take(hi);
    }
    while (chosen.size() < k) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i] && (best == n || gap[i] > gap[best])) best = i;
        }
        take(best);
    }
    return chosen;
}

std::string groupName(Group g) {
    switch (g) {
    case Group::StereoAligned: return "stereo/aligned";
    case Group::MonoAligned: return "mono/aligned";
    case Group::StereoMisaligned: return "stereo/misaligned";
    case Group::MonoMisaligned: return "mono/misaligned";
    }
    return "?";
}

bool isStereo(Group g) {
    return g == Group::StereoAligned || g == Group::StereoMisaligned;
}

bool isAligned(Group g) {
    return g == Group::StereoAligned || g == Group::MonoAligned;
}

void LearningRecord::validate() const {
    const int g = static_cast<int>(group);
    if (g < 1 || g > 4) {
        throw Error("participant " + participantId + ": group must be 1-4");
    }
    auto inScale = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 15.0; };
    if (!inScale(e0) || !inScale(e1)) {
        throw Error("participant " + participantId + ": pre/post error must lie in [0, 15]");
    }
    for (double s : simulatorErrors) {
        if (!std::isfinite(s)) {
            throw Error("participant " + participantId + ": non-finite simulator score");
        }
    }
}

double learningGain(const LearningRecord& r) {
    return r.e1 - r.e0;
}

} // namespace toothsim::stats
