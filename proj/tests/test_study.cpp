#include "toothsim/comparison.hpp"
#include "toothsim/study.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace toothsim;

namespace {

const std::string kHeader =
    "participantId,group,e0,e1,trial1,trial2,trial3,trial4,trial5,trial6,meanEyeToothDistance\n";

std::string row(const std::string& id, int group, double e0, double e1, double dist = 20.0) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s,%d,%g,%g,3,2.9,2.8,2.6,2.5,2.4,%g\n", id.c_str(), group, e0, e1, dist);
    return buf;
}

} // namespace

TEST_CASE("study CSV parsing skips malformed rows with reasons") {
    const std::string text = kHeader + row("P1", 1, 3, 2) + "P2,5,3,2,1,1,1,1,1,1,20\n" +
                             "P3,2,3,x,1,1,1,1,1,1,20\n" + "P4,2,3,20,1,1,1,1,1,1,20\n" +
                             "P5,3,3,2,1,1,1,1,1\n" + "P6,4,3,2,1,1,1,1,1,1,\n";
    const StudyTable t = parseStudyCsv(text);
    REQUIRE(t.records.size() == 2);
    CHECK(t.records[0].participantId == "P1");
    CHECK(std::isnan(t.records[1].meanEyeToothDistance));
    REQUIRE(t.skipped.size() == 4);
    CHECK(t.skipped[0].line == 3);
    for (const auto& s : t.skipped) CHECK_FALSE(s.reason.empty());
    CHECK_THROWS(parseStudyCsv("participantId,group\nP1,1\n"));
}

TEST_CASE("reconstructed study fixture reproduces the published aggregates") {
    const StudyTable t = loadStudyCsv(TOOTHSIM_FIXTURE_DIR "/study_reconstructed.csv");
    REQUIRE(t.records.size() == 40);
    CHECK(t.skipped.empty());
    const StudyAnalysis a = analyzeStudy(t.records);
    CHECK(stats::mean(a.allGains) == doctest::Approx(-0.375).epsilon(1e-12));
    std::vector<double> removed = a.outliers.removed;
    std::sort(removed.begin(), removed.end());
    CHECK(removed == std::vector<double>{-5, -5, 4});
    CHECK(a.kept.size() == 37);
    CHECK(std::fabs(a.gain.mean - (-0.24324324324324326)) <= 1e-6);
    CHECK(*a.gain.sd == doctest::Approx(1.427028875465178).epsilon(1e-12));
    REQUIRE(a.cohortTest.value);
    // scipy: ttest_1samp(kept, 0, alternative="less") -> t = -1.03683..., p = 0.15336...
    CHECK(a.cohortTest.value->t == doctest::Approx(-1.03683317919261).epsilon(1e-10));
    CHECK(a.cohortTest.value->dof == 36.0);
    CHECK(a.cohortTest.value->p == doctest::Approx(0.15336406820214754).epsilon(1e-8));
    REQUIRE(a.gainAnova.value);
    CHECK(a.gainAnova.value->f == doctest::Approx(0.7113937092758132).epsilon(1e-10));
    CHECK(a.gainAnova.value->p == doctest::Approx(0.5521579024119576).epsilon(1e-8));
    CHECK(a.gainAnova.value->dofBetween == 3.0);
    CHECK(a.gainAnova.value->dofWithin == 33.0);

    const auto j = nlohmann::json::parse(studyReportJson(a, t.skipped));
    CHECK(j.contains("groups"));
}

TEST_CASE("identical participants give zero gains and a null ANOVA") {
    std::string text = kHeader;
    for (int i = 0; i < 12; ++i) text += row("P" + std::to_string(i), 1 + i % 4, 3, 3, 20 + i);
    const StudyAnalysis a = analyzeStudy(parseStudyCsv(text).records);
    for (double g : a.allGains) CHECK(g == 0.0);
    REQUIRE(a.gainAnova.value);
    CHECK(a.gainAnova.value->f == 0.0);
    CHECK_FALSE(a.cohortTest.value.has_value());
    CHECK_FALSE(a.cohortTest.error.empty());
    // Failures are reported in the JSON, not thrown.
    CHECK_FALSE(nlohmann::json::parse(studyReportJson(a, {})).is_null());
}

TEST_CASE("study analysis needs enough participants for IQR screening") {
    const std::string text = kHeader + row("A", 1, 3, 2) + row("B", 2, 3, 1);
    CHECK_THROWS(analyzeStudy(parseStudyCsv(text).records));
}

// ---------------------------------------------------------------- metric comparison

TEST_CASE("counts and expert CSV parsing") {
    const auto counts = parseCountsCsv("outcome,TP,TN,FP,FN,extra\nA,10,2,1,0,x\nB,5,5,5,5,y\n");
    REQUIRE(counts.size() == 2);
    CHECK(counts[0].counts == ClassificationCounts{10, 2, 1, 0});
    CHECK_THROWS(parseCountsCsv("outcome,TP,TN,FP\nA,1,2,3\n"));
    CHECK_THROWS(parseCountsCsv("outcome,TP,TN,FP,FN\nA,1,2,3,-4\n"));
    CHECK_THROWS(parseCountsCsv("outcome,TP,TN,FP,FN\nA,1,2,3,4.5\n"));

    const auto e = parseExpertCsv("outcome,expert,expertB\nA,3,3.5\nB,7,6\n");
    REQUIRE(e.has_value());
    CHECK(e->scoreFor("B") == 7.0);
    CHECK_FALSE(e->scoreFor("C").has_value());
    CHECK((*e->second)[0] == 3.5);
    CHECK_FALSE(parseExpertCsv("outcome,rating\nA,3\n").has_value());
    CHECK(parseExpertCsv(expertCsv(*e))->scores == e->scores);
}

TEST_CASE("metric comparison with a synthetic expert oracle") {
    // Counts spanning a range of under- and over-drilling.
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::uint64_t> fp(0, 900), fn(0, 4000);
    std::vector<ScoredOutcome> outcomes;
    for (int i = 0; i < 240; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "S%03d", i + 1);
        outcomes.push_back({id, {20000, 3000, fp(rng), fn(rng)}});
    }
    const ExpertTable experts = syntheticExperts(outcomes, 9);
    const MetricComparison c = compareMetrics(outcomes, experts);
    REQUIRE_FALSE(c.rankingByCorrelation.empty());
    CHECK(c.rankingByCorrelation.front() == "dentist");
    CHECK(std::fabs(findMetric(c, "dentist")->expertCorrelation->r) >= 0.8);
    REQUIRE(c.selectedIds.size() == 20);
    // Coverage starts with the lowest and highest F1.
    auto f1Of = [&](const std::string& id) {
        for (const auto& o : outcomes)
            if (o.id == id) return f1(o.counts);
        return std::numeric_limits<double>::quiet_NaN();
    };
    double lo = 2, hi = -1;
    for (const auto& o : outcomes) {
        lo = std::min(lo, f1(o.counts));
        hi = std::max(hi, f1(o.counts));
    }
    CHECK(f1Of(c.selectedIds[0]) == lo);
    CHECK(f1Of(c.selectedIds[1]) == hi);
    REQUIRE(c.selectedIbmd.has_value());
    CHECK(*c.selectedIbmd >= 0.0);
    REQUIRE(c.agreement.has_value());
    CHECK(c.agreement->kappa > 0.5);
    CHECK(c.agreement->icc > 0.8);

    const auto j = nlohmann::json::parse(comparisonReportJson(c));
    CHECK(j["selection"]["ids"].size() == 20);
    CHECK(j["metrics"][0]["name"] == "dentist");
}

TEST_CASE("metric comparison without experts or with a single outcome") {
    const std::vector<ScoredOutcome> one{{"A", {10, 2, 1, 1}}};
    const MetricComparison c = compareMetrics(one, std::nullopt, {1, "f1", stats::KappaWeighting::Linear});
    for (const auto& m : c.metrics) {
        CHECK_FALSE(m.normality.has_value());
        CHECK_FALSE(m.normalityError.empty());
        CHECK_FALSE(m.expertCorrelation.has_value());
    }
    CHECK(c.rankingByCorrelation.empty());
    CHECK(c.selectedIds == std::vector<std::string>{"A"});
    CHECK_FALSE(c.ibmdError.empty());
    const MetricComparison bad = compareMetrics(one, std::nullopt, {1, "nonsense", stats::KappaWeighting::Linear});
    CHECK_FALSE(bad.selectionError.empty());
}

TEST_CASE("synthetic experts are bounded, deterministic and monotone on average") {
    std::vector<ScoredOutcome> outcomes;
    for (std::uint64_t fp = 0; fp < 100; ++fp) outcomes.push_back({"o" + std::to_string(fp), {1000, 100, fp, 0}});  // D from 0 to about 11
    const auto a = syntheticExperts(outcomes, 1), b = syntheticExperts(outcomes, 1);
    CHECK(a.scores == b.scores);
    for (double s : a.scores) {
        CHECK((s >= 0.0 && s <= 15.0));
        CHECK(s * 2.0 == std::round(s * 2.0));
    }
    std::vector<double> d;
    for (const auto& o : outcomes) d.push_back(dentist(o.counts));
    CHECK(stats::pearson(d, a.scores).r > 0.9);
}
