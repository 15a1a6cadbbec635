#include "toothsim/comparison.hpp"

#include "csv.hpp"
#include "json_util.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace toothsim {

std::vector<ScoredOutcome> parseCountsCsv(const std::string& text) {
    const detail::CsvTable csv = detail::parseCsv(text);
    const char* names[] = {"outcome", "TP", "TN", "FP", "FN"};
    std::size_t col[5];
    for (int i = 0; i < 5; ++i) {
        const auto c = csv.column(names[i]);
        if (!c) {
            throw Error(std::string("counts table: missing column '") + names[i] + "'");
        }
        col[i] = *c;
    }
    std::vector<ScoredOutcome> out;
    for (const auto& row : csv.rows) {
        if (row.fields.size() != csv.header.size()) {
            throw Error("counts table line " + std::to_string(row.line) + ": wrong number of fields");
        }
        ScoredOutcome o;
        o.id = row.fields[col[0]];
        std::uint64_t* slots[] = {&o.counts.tp, &o.counts.tn, &o.counts.fp, &o.counts.fn};
        for (int i = 0; i < 4; ++i) {
            const auto v = detail::parseNumber(row.fields[col[i + 1]]);
            if (!v || *v < 0 || *v != std::floor(*v)) {
                throw Error("counts table line " + std::to_string(row.line) + ": " + names[i + 1] +
                            " must be a nonnegative integer");
            }
            *slots[i] = static_cast<std::uint64_t>(*v);
        }
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<ScoredOutcome> loadCountsCsv(const std::filesystem::path& path) {
    return parseCountsCsv(detail::readFile(path));
}

std::optional<double> ExpertTable::scoreFor(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == id) return scores[i];
    }
    return std::nullopt;
}

std::optional<ExpertTable> parseExpertCsv(const std::string& text) {
    const detail::CsvTable csv = detail::parseCsv(text);
    const auto idCol = csv.column("outcome");
    const auto aCol = csv.column("expert");
    if (!idCol || !aCol) {
        return std::nullopt;
    }
    const auto bCol = csv.column("expertB");
    ExpertTable t;
    if (bCol) t.second.emplace();
    for (const auto& row : csv.rows) {
        if (row.fields.size() != csv.header.size()) {
            throw Error("expert table line " + std::to_string(row.line) + ": wrong number of fields");
        }
        const auto a = detail::parseNumber(row.fields[*aCol]);
        if (!a) {
            throw Error("expert table line " + std::to_string(row.line) + ": non-numeric expert score");
        }
        t.ids.push_back(row.fields[*idCol]);
        t.scores.push_back(*a);
        if (bCol) {
            const auto b = detail::parseNumber(row.fields[*bCol]);
            if (!b) {
                throw Error("expert table line " + std::to_string(row.line) + ": non-numeric expertB score");
            }
            t.second->push_back(*b);
        }
    }
    return t;
}

namespace {

std::optional<double> dentistValue(const ClassificationCounts& c) {
    if (c.tp + c.fp == 0 || c.tp + c.fn == 0) return std::nullopt;
    return dentist(c);
}

} // namespace

MetricComparison compareMetrics(const std::vector<ScoredOutcome>& outcomes, const std::optional<ExpertTable>& experts,
                                const ComparisonOptions& options) {
    MetricComparison result;
    result.selectionMetric = options.selectionMetric;
    result.expertsProvided = experts.has_value();

    // Column-major table of metric values; index 0 is the dentist score.
    std::vector<std::string> names = {"dentist"};
    for (auto& n : metricBatteryNames()) names.push_back(n);
    std::vector<std::vector<std::optional<double>>> values(names.size());
    for (const ScoredOutcome& o : outcomes) {
        values[0].push_back(dentistValue(o.counts));
        const auto battery = metricBattery(o.counts);
        for (std::size_t m = 0; m < battery.size(); ++m) values[m + 1].push_back(battery[m].value);
    }

    std::vector<std::optional<double>> expertScore(outcomes.size());
    if (experts) {
        for (std::size_t i = 0; i < outcomes.size(); ++i) expertScore[i] = experts->scoreFor(outcomes[i].id);
    }

    for (std::size_t m = 0; m < names.size(); ++m) {
        MetricAssessment a;
        a.name = names[m];
        std::vector<double> defined, paired, pairedExpert;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            if (!values[m][i]) continue;
            defined.push_back(*values[m][i]);
            if (expertScore[i]) {
                paired.push_back(*values[m][i]);
                pairedExpert.push_back(*expertScore[i]);
            }
        }
        a.defined = defined.size();
        try {
            a.normality = stats::shapiroWilk(defined);
        } catch (const Error& e) {
            a.normalityError = e.what();
        }
        if (!experts) {
            a.correlationError = "no expert scores";
        } else {
            try {
                a.expertCorrelation = stats::pearson(paired, pairedExpert);
            } catch (const Error& e) {
                a.correlationError = e.what();
            }
        }
        result.metrics.push_back(std::move(a));
    }

    std::vector<const MetricAssessment*> ranked;
    for (const auto& a : result.metrics) {
        if (a.expertCorrelation) ranked.push_back(&a);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const MetricAssessment* x, const MetricAssessment* y) {
        const double rx = std::fabs(x->expertCorrelation->r), ry = std::fabs(y->expertCorrelation->r);
        return rx != ry ? rx > ry : x->name < y->name;
    });
    for (const auto* a : ranked) result.rankingByCorrelation.push_back(a->name);

    const auto sel = std::find(names.begin(), names.end(), options.selectionMetric);
    if (sel == names.end()) {
        result.selectionError = "unknown selection metric '" + options.selectionMetric + "'";
        return result;
    }
    const std::size_t selIdx = static_cast<std::size_t>(sel - names.begin());
    std::vector<double> selScores;
    std::vector<std::size_t> selOutcome;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (values[selIdx][i]) {
            selScores.push_back(*values[selIdx][i]);
            selOutcome.push_back(i);
        }
    }
    std::vector<std::size_t> chosen;
    try {
        chosen = stats::uniformCoverageSelect(selScores, options.k);
    } catch (const Error& e) {
        result.selectionError = e.what();
    }
    for (std::size_t c : chosen) result.selectedIds.push_back(outcomes[selOutcome[c]].id);

    if (!experts) {
        result.ibmdError = "no expert scores";
        result.agreementError = "no expert scores";
        return result;
    }
    if (!chosen.empty()) {
        stats::PairedRatings pr;
        for (std::size_t c : chosen) {
            const std::size_t i = selOutcome[c];
            if (values[0][i] && expertScore[i]) {
                pr.outcomeIds.push_back(outcomes[i].id);
                pr.raterA.push_back(*values[0][i]);
                pr.raterB.push_back(*expertScore[i]);
            }
        }
        try {
            result.selectedIbmd = stats::ibmd(pr);
        } catch (const Error& e) {
            result.ibmdError = e.what();
        }
    } else if (result.ibmdError.empty()) {
        result.ibmdError = "no outcomes selected";
    }

    if (experts->second) {
        stats::PairedRatings pr{experts->ids, experts->scores, *experts->second};
        try {
            result.agreement = InterRaterAgreement{stats::cohenKappa(pr, options.kappaWeighting), stats::icc(pr),
                                                   stats::ibmd(pr)};
        } catch (const Error& e) {
            result.agreementError = e.what();
        }
    } else {
        result.agreementError = "single rater";
    }
    return result;
}

const MetricAssessment* findMetric(const MetricComparison& c, const std::string& name) {
    for (const auto& m : c.metrics) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

std::string comparisonReportJson(const MetricComparison& c, int indent) {
    nlohmann::json out;
    auto& metrics = out["metrics"] = nlohmann::json::array();
    for (const auto& m : c.metrics) {
        nlohmann::json j = {{"name", m.name}, {"defined", m.defined}};
        if (m.normality) {
            j["normality"] = {{"W", m.normality->w}, {"p", m.normality->p}};
        } else {
            j["normality"] = {{"error", m.normalityError}};
        }
        if (m.expertCorrelation) {
            j["expertCorrelation"] = {{"r", m.expertCorrelation->r},
                                      {"p", m.expertCorrelation->p},
                                      {"n", m.expertCorrelation->n}};
        } else {
            j["expertCorrelation"] = {{"error", m.correlationError}};
        }
        metrics.push_back(std::move(j));
    }
    out["rankingByCorrelation"] = c.rankingByCorrelation;
    out["selection"] = {{"metric", c.selectionMetric}, {"ids", c.selectedIds}};
    if (!c.selectionError.empty()) out["selection"]["error"] = c.selectionError;
    if (c.selectedIbmd) {
        out["dentistVsExpertIbmd"] = *c.selectedIbmd;
    } else {
        out["dentistVsExpertIbmd"] = {{"error", c.ibmdError}};
    }
    if (c.agreement) {
        out["interRater"] = {{"kappa", c.agreement->kappa}, {"icc", c.agreement->icc}, {"ibmd", c.agreement->ibmd}};
    } else {
        out["interRater"] = {{"error", c.agreementError}};
    }
    return out.dump(indent) + "\n";
}

std::vector<ScoredOutcome> syntheticOutcomeBatch(const VoxelGrid& pristine, const VoxelGrid& ideal, std::size_t count,
                                                 std::uint64_t seed, unsigned jobs) {
    const auto cavities = syntheticCavities(count, seed);
    std::vector<ScoredOutcome> out(count);
    detail::parallelFor(count, jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "S%03zu", i + 1);
            out[i] = {id, classify(carveCavity(pristine, cavities[i]), ideal, pristine)};
        }
    });
    return out;
}

ExpertTable syntheticExperts(const std::vector<ScoredOutcome>& outcomes, std::uint64_t seed, double noise) {
    std::mt19937_64 rng(seed);
    auto jitter = [&] { return noise * (2.0 * unitFromBits(rng()) - 1.0); };
    auto rate = [](double v) { return std::round(std::clamp(v, 0.0, 15.0) * 2.0) / 2.0; };
    ExpertTable t;
    t.second.emplace();
    for (const ScoredOutcome& o : outcomes) {
        const auto d = dentistValue(o.counts);
        if (!d) continue;
        const double base = 15.0 * (1.0 - std::exp(-*d / 8.0));
        t.ids.push_back(o.id);
        t.scores.push_back(rate(base + jitter()));
        t.second->push_back(rate(base + jitter()));
    }
    return t;
}

std::string expertCsv(const ExpertTable& table) {
    std::string out = table.second ? "outcome,expert,expertB\n" : "outcome,expert\n";
    char buf[64];
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        out += detail::csvField(table.ids[i]);
        std::snprintf(buf, sizeof buf, ",%.17g", table.scores[i]);
        out += buf;
        if (table.second) {
            std::snprintf(buf, sizeof buf, ",%.17g", (*table.second)[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace toothsim
