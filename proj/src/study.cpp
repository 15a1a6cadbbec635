#include "toothsim/study.hpp"

#include "csv.hpp"
#include "json_util.hpp"

#include <cmath>
#include <limits>

namespace toothsim {

using stats::Group;
using stats::LearningRecord;

StudyTable parseStudyCsv(const std::string& text) {
    const detail::CsvTable csv = detail::parseCsv(text);
    static const char* kColumns[] = {"participantId", "group",  "e0",     "e1",     "trial1", "trial2",
                                     "trial3",        "trial4", "trial5", "trial6", "meanEyeToothDistance"};
    std::size_t col[11];
    for (int i = 0; i < 11; ++i) {
        const auto c = csv.column(kColumns[i]);
        if (!c) {
            throw Error(std::string("study table: missing column '") + kColumns[i] + "'");
        }
        col[i] = *c;
    }
    StudyTable table;
    for (const detail::CsvRow& row : csv.rows) {
        auto skip = [&](const std::string& why) { table.skipped.push_back({row.line, why}); };
        if (row.fields.size() != csv.header.size()) {
            skip("expected " + std::to_string(csv.header.size()) + " fields, got " + std::to_string(row.fields.size()));
            continue;
        }
        LearningRecord r;
        r.participantId = row.fields[col[0]];
        if (r.participantId.empty()) {
            skip("empty participantId");
            continue;
        }
        auto number = [&](int which) -> std::optional<double> { return detail::parseNumber(row.fields[col[which]]); };
        const auto group = number(1);
        if (!group || *group != std::floor(*group) || *group < 1 || *group > 4) {
            skip("group must be 1, 2, 3 or 4");
            continue;
        }
        r.group = static_cast<Group>(static_cast<int>(*group));
        bool ok = true;
        std::string bad;
        auto take = [&](int which, double& out) {
            const auto v = number(which);
            if (!v) {
                ok = false;
                bad = kColumns[which];
            } else {
                out = *v;
            }
        };
        take(2, r.e0);
        take(3, r.e1);
        for (int t = 0; t < 6; ++t) take(4 + t, r.simulatorErrors[t]);
        if (!ok) {
            skip("non-numeric " + bad);
            continue;
        }
        const std::string& dist = row.fields[col[10]];
        if (dist.empty()) {
            r.meanEyeToothDistance = std::numeric_limits<double>::quiet_NaN();
        } else if (const auto d = detail::parseNumber(dist)) {
            r.meanEyeToothDistance = *d;
        } else {
            skip("non-numeric meanEyeToothDistance");
            continue;
        }
        try {
            r.validate();
        } catch (const Error& e) {
            skip(e.what());
            continue;
        }
        table.records.push_back(std::move(r));
    }
    return table;
}

StudyTable loadStudyCsv(const std::filesystem::path& path) {
    return parseStudyCsv(detail::readFile(path));
}

namespace {

template <typename Fn>
auto attempt(Fn&& fn) -> Outcome<decltype(fn())> {
    Outcome<decltype(fn())> out;
    try {
        out.value = fn();
    } catch (const Error& e) {
        out.error = e.what();
    }
    return out;
}

Descriptives describe(const std::vector<double>& v) {
    Descriptives d;
    d.n = v.size();
    if (!v.empty()) {
        d.mean = stats::mean(v);
    }
    if (v.size() >= 2) {
        d.sd = stats::sampleSd(v);
    }
    return d;
}

double simulatorGain(const LearningRecord& r) {
    return r.simulatorErrors[5] - r.simulatorErrors[0];
}

nlohmann::json toJson(const Descriptives& d) {
    nlohmann::json j = {{"n", d.n}, {"mean", d.n ? nlohmann::json(d.mean) : nlohmann::json()}};
    j["sd"] = d.sd ? nlohmann::json(*d.sd) : nlohmann::json();
    return j;
}

nlohmann::json toJson(const stats::TTestResult& t) {
    return {{"t", t.t}, {"dof", t.dof}, {"p", t.p}, {"meanDifference", t.meanDifference}};
}

nlohmann::json toJson(const stats::AnovaResult& a) {
    return {{"F", a.f}, {"dofBetween", a.dofBetween}, {"dofWithin", a.dofWithin}, {"p", a.p}};
}

nlohmann::json toJson(const stats::CorrelationResult& c) {
    return {{"r", c.r}, {"p", c.p}, {"n", c.n}};
}

template <typename T>
nlohmann::json toJson(const Outcome<T>& o) {
    if (o.value) {
        return toJson(*o.value);
    }
    return {{"error", o.error}};
}

} // namespace

StudyAnalysis analyzeStudy(const std::vector<LearningRecord>& records, stats::Tails tails) {
    StudyAnalysis a;
    a.tails = tails;
    for (const LearningRecord& r : records) {
        r.validate();
        a.allGains.push_back(stats::learningGain(r));
    }
    a.outliers = stats::iqrOutliers(a.allGains);
    for (std::size_t i : a.outliers.keptIndices) a.kept.push_back(records[i]);
    for (std::size_t i : a.outliers.removedIndices) a.removedParticipants.push_back(records[i].participantId);

    std::vector<double> pre, post, gain, simGain, first;
    for (const LearningRecord& r : a.kept) {
        pre.push_back(r.e0);
        post.push_back(r.e1);
        gain.push_back(stats::learningGain(r));
        simGain.push_back(simulatorGain(r));
        first.push_back(r.simulatorErrors[0]);
    }
    a.pre = describe(pre);
    a.post = describe(post);
    a.gain = describe(gain);
    a.cohortTest = attempt([&] { return stats::pairedTTest(gain, tails); });

    std::vector<std::vector<double>> gainByGroup(4), simByGroup(4);
    std::vector<double> stereo, mono, aligned, misaligned;
    for (std::size_t g = 0; g < 4; ++g) {
        GroupSummary& s = a.groups[g];
        s.group = static_cast<Group>(g + 1);
        std::vector<double> gp, gq;
        for (const LearningRecord& r : a.kept) {
            if (r.group != s.group) continue;
            gp.push_back(r.e0);
            gq.push_back(r.e1);
            gainByGroup[g].push_back(stats::learningGain(r));
            simByGroup[g].push_back(simulatorGain(r));
        }
        s.pre = describe(gp);
        s.post = describe(gq);
        s.gain = describe(gainByGroup[g]);
        s.gainTest = attempt([&] { return stats::pairedTTest(gainByGroup[g], tails); });
        for (double v : gainByGroup[g]) {
            (stats::isStereo(s.group) ? stereo : mono).push_back(v);
            (stats::isAligned(s.group) ? aligned : misaligned).push_back(v);
        }
    }
    a.gainAnova = attempt([&] { return stats::oneWayAnova(gainByGroup); });
    a.simulatorGainAnova = attempt([&] { return stats::oneWayAnova(simByGroup); });
    a.stereoVsMono = attempt([&] { return stats::welchTTest(stereo, mono); });
    a.alignedVsMisaligned = attempt([&] { return stats::welchTTest(aligned, misaligned); });
    a.preVsFirstTrial = attempt([&] { return stats::pearson(pre, first); });
    a.realVsSimulatorGain = attempt([&] { return stats::pearson(gain, simGain); });
    a.distanceVsGain = attempt([&] {
        std::vector<double> d, g;
        for (const LearningRecord& r : a.kept) {
            if (std::isfinite(r.meanEyeToothDistance)) {
                d.push_back(r.meanEyeToothDistance);
                g.push_back(stats::learningGain(r));
            }
        }
        return stats::pearson(d, g);
    });
    return a;
}

std::string studyReportJson(const StudyAnalysis& a, const std::vector<SkippedRow>& skipped, int indent) {
    nlohmann::json out;
    out["participants"] = a.allGains.size();
    auto& sk = out["skippedRows"] = nlohmann::json::array();
    for (const SkippedRow& s : skipped) sk.push_back({{"line", s.line}, {"reason", s.reason}});
    out["learningGains"] = a.allGains;
    out["outliers"] = {{"q1", a.outliers.q1},
                       {"q3", a.outliers.q3},
                       {"lowerFence", a.outliers.lowerFence},
                       {"upperFence", a.outliers.upperFence},
                       {"removedGains", a.outliers.removed},
                       {"removedParticipants", a.removedParticipants}};
    out["kept"] = a.kept.size();
    out["tails"] = stats::tailsName(a.tails);
    out["cohort"] = {{"pre", toJson(a.pre)},
                     {"post", toJson(a.post)},
                     {"gain", toJson(a.gain)},
                     {"gainTest", toJson(a.cohortTest)}};
    auto& groups = out["groups"] = nlohmann::json::array();
    for (const GroupSummary& g : a.groups) {
        groups.push_back({{"group", static_cast<int>(g.group)},
                          {"name", stats::groupName(g.group)},
                          {"pre", toJson(g.pre)},
                          {"post", toJson(g.post)},
                          {"gain", toJson(g.gain)},
                          {"gainTest", toJson(g.gainTest)}});
    }
    out["anova"] = {{"gain", toJson(a.gainAnova)}, {"simulatorGain", toJson(a.simulatorGainAnova)}};
    out["welch"] = {{"stereoVsMono", toJson(a.stereoVsMono)}, {"alignedVsMisaligned", toJson(a.alignedVsMisaligned)}};
    out["correlations"] = {{"preVsFirstTrial", toJson(a.preVsFirstTrial)},
                           {"realVsSimulatorGain", toJson(a.realVsSimulatorGain)},
                           {"eyeToothDistanceVsGain", toJson(a.distanceVsGain)}};
    return out.dump(indent) + "\n";
}

} // namespace toothsim
