#include "toothsim/scoring.hpp"

#include "json_util.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace toothsim {

ClassificationCounts classify(const VoxelGrid& outcome, const VoxelGrid& ideal, const VoxelGrid& pristine) {
    if (!outcome.spec().compatible(pristine.spec()) || !ideal.spec().compatible(pristine.spec())) {
        throw Error("grids do not share dims/origin/cell size");
    }
    ClassificationCounts c;
    const std::size_t n = pristine.size();
    for (std::size_t v = 0; v < n; ++v) {
        const bool kept = outcome.occupied(v);
        const bool shouldKeep = ideal.occupied(v);
        if (!pristine.occupied(v)) {
            if (kept) {
                throw Error("material creation: outcome occupies voxel " + std::to_string(v) +
                            " outside the pristine tooth");
            }
            if (shouldKeep) {
                throw Error("ideal occupies voxel " + std::to_string(v) + " outside the pristine tooth");
            }
            continue;
        }
        if (kept) {
            ++(shouldKeep ? c.tp : c.fp);
        } else {
            ++(shouldKeep ? c.fn : c.tn);
        }
    }
    return c;
}

PrecisionSensitivity precisionSensitivity(const ClassificationCounts& c) {
    if (c.tp + c.fp == 0 || c.tp + c.fn == 0) {
        throw Error("degenerate counts: precision or sensitivity has a zero denominator");
    }
    const double tp = static_cast<double>(c.tp);
    return {tp / static_cast<double>(c.tp + c.fp), tp / static_cast<double>(c.tp + c.fn)};
}

double rescaledPrecision(double precision) {
    return (precision - kPrecisionFloor) / (1.0 - kPrecisionFloor);
}

double rescaledSensitivity(double sensitivity) {
    return (sensitivity - kSensitivityFloor) / (1.0 - kSensitivityFloor);
}

double dentistFromRates(double precision, double sensitivity) {
    const double p = rescaledPrecision(precision);
    const double s = rescaledSensitivity(sensitivity);
    return (1.0 - (kSensitivityWeight * s + p) / (kSensitivityWeight + 1.0)) * kDentistScale;
}

double dentist(const ClassificationCounts& c) {
    const auto ps = precisionSensitivity(c);
    return dentistFromRates(ps.precision, ps.sensitivity);
}

double dentistClosedForm(const ClassificationCounts& c) {
    if (c.tp + c.fp == 0 || c.tp + c.fn == 0) {
        throw Error("degenerate counts: precision or sensitivity has a zero denominator");
    }
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    return 15.0 * (32.0 * fp * tp + 3.0 * fn * tp + 35.0 * fn * fp) / (4.0 * (tp + fn) * (tp + fp));
}

DentistBreakdown dentistBreakdown(const ClassificationCounts& c) {
    const auto ps = precisionSensitivity(c);
    DentistBreakdown b;
    b.precision = ps.precision;
    b.sensitivity = ps.sensitivity;
    b.rescaledPrecision = rescaledPrecision(ps.precision);
    b.rescaledSensitivity = rescaledSensitivity(ps.sensitivity);
    b.score = dentistFromRates(ps.precision, ps.sensitivity);
    b.scoreClosedForm = dentistClosedForm(c);
    b.outOfRange = ps.precision < kPrecisionFloor || ps.sensitivity < kSensitivityFloor;
    return b;
}

double f1(const ClassificationCounts& c) {
    const std::uint64_t den = 2 * c.tp + c.fp + c.fn;
    if (den == 0) {
        throw Error("degenerate counts: F1 has a zero denominator");
    }
    return 2.0 * static_cast<double>(c.tp) / static_cast<double>(den);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<double> ratio(double num, double den) {
    if (den == 0.0) {
        return std::nullopt;
    }
    return num / den;
}

MetricScore make(std::string name, std::optional<double> v, Orientation o, double lo, double hi) {
    MetricScore m;
    m.name = std::move(name);
    m.value = v;
    m.orientation = o;
    m.rangeMin = lo;
    m.rangeMax = hi;
    m.degenerate = !v.has_value() || !std::isfinite(*v);
    if (m.degenerate) {
        m.value.reset();
    } else {
        constexpr double slack = 1e-12;
        m.outOfRange = *v < lo - slack || *v > hi + slack;
    }
    return m;
}

} // namespace

std::vector<MetricScore> metricBattery(const ClassificationCounts& c) {
    const double tp = static_cast<double>(c.tp);
    const double tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    const double n = tp + tn + fp + fn;

    const auto tpr = ratio(tp, tp + fn);
    const auto tnr = ratio(tn, tn + fp);
    const auto ppv = ratio(tp, tp + fp);
    const auto npv = ratio(tn, tn + fn);
    const auto fpr = ratio(fp, fp + tn);
    const auto fnr = ratio(fn, fn + tp);

    auto both = [](std::optional<double> a, std::optional<double> b, auto fn2) -> std::optional<double> {
        if (!a || !b) return std::nullopt;
        return fn2(*a, *b);
    };

    std::optional<double> mcc;
    const double mccDen = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (mccDen > 0.0) {
        mcc = (tp * tn - fp * fn) / std::sqrt(mccDen);
    }
    std::optional<double> kappa;
    if (n > 0.0) {
        const double po = (tp + tn) / n;
        const double pe = ((tp + fp) * (tp + fn) + (tn + fn) * (tn + fp)) / (n * n);
        if (pe < 1.0) {
            kappa = (po - pe) / (1.0 - pe);
        }
    }

    using O = Orientation;
    std::vector<MetricScore> out;
    out.reserve(kBatterySize);
    out.push_back(make("accuracy", ratio(tp + tn, n), O::Similarity, 0, 1));
    out.push_back(make("balanced_accuracy", both(tpr, tnr, [](double a, double b) { return 0.5 * (a + b); }),
                       O::Similarity, 0, 1));
    out.push_back(make("error_rate", ratio(fp + fn, n), O::Error, 0, 1));
    out.push_back(make("precision", ppv, O::Similarity, 0, 1));
    out.push_back(make("sensitivity", tpr, O::Similarity, 0, 1));
    out.push_back(make("specificity", tnr, O::Similarity, 0, 1));
    out.push_back(make("negative_predictive_value", npv, O::Similarity, 0, 1));
    out.push_back(make("false_positive_rate", fpr, O::Error, 0, 1));
    out.push_back(make("false_negative_rate", fnr, O::Error, 0, 1));
    out.push_back(make("false_discovery_rate", ratio(fp, fp + tp), O::Error, 0, 1));
    out.push_back(make("false_omission_rate", ratio(fn, fn + tn), O::Error, 0, 1));
    out.push_back(make("f1", ratio(2 * tp, 2 * tp + fp + fn), O::Similarity, 0, 1));
    out.push_back(make("f2", ratio(5 * tp, 5 * tp + 4 * fn + fp), O::Similarity, 0, 1));
    out.push_back(make("f0_5", ratio(1.25 * tp, 1.25 * tp + 0.25 * fn + fp), O::Similarity, 0, 1));
    out.push_back(make("jaccard", ratio(tp, tp + fp + fn), O::Similarity, 0, 1));
    out.push_back(make("matthews_correlation", mcc, O::Similarity, -1, 1));
    out.push_back(make("informedness", both(tpr, tnr, [](double a, double b) { return a + b - 1.0; }),
                       O::Similarity, -1, 1));
    out.push_back(make("markedness", both(ppv, npv, [](double a, double b) { return a + b - 1.0; }),
                       O::Similarity, -1, 1));
    out.push_back(make("fowlkes_mallows", both(ppv, tpr, [](double a, double b) { return std::sqrt(a * b); }),
                       O::Similarity, 0, 1));
    out.push_back(make("cohen_kappa", kappa, O::Similarity, -1, 1));
    out.push_back(make("geometric_mean", both(tpr, tnr, [](double a, double b) { return std::sqrt(a * b); }),
                       O::Similarity, 0, 1));
    out.push_back(make("positive_likelihood_ratio",
                       both(tpr, fpr, [](double a, double b) { return b == 0.0 ? kInf : a / b; }),
                       O::Similarity, 0, kInf));
    out.push_back(make("negative_likelihood_ratio",
                       both(fnr, tnr, [](double a, double b) { return b == 0.0 ? kInf : a / b; }), O::Error, 0,
                       kInf));
    out.push_back(make("diagnostic_odds_ratio", ratio(tp * tn, fp * fn), O::Similarity, 0, kInf));
    return out;
}

std::vector<std::string> metricBatteryNames() {
    std::vector<std::string> names;
    for (auto& m : metricBattery({1, 1, 1, 1})) {
        names.push_back(m.name);
    }
    return names;
}

namespace {

nlohmann::json optionalNumber(std::optional<double> v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json rangeBound(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
}

} // namespace

std::string scoreReportJson(const std::string& outcomeId, const ClassificationCounts& c, int indent) {
    nlohmann::json j;
    j["outcome"] = outcomeId;
    j["counts"] = {{"TP", c.tp}, {"TN", c.tn}, {"FP", c.fp}, {"FN", c.fn}};
    j["positiveClass"] = "undrilled";
    try {
        const DentistBreakdown d = dentistBreakdown(c);
        j["precision"] = d.precision;
        j["sensitivity"] = d.sensitivity;
        j["rescaledPrecision"] = d.rescaledPrecision;
        j["rescaledSensitivity"] = d.rescaledSensitivity;
        j["dentist"] = d.score;
        j["dentistClosedForm"] = d.scoreClosedForm;
        j["dentistOutOfRange"] = d.outOfRange;
    } catch (const Error& e) {
        j["dentist"] = nullptr;
        j["dentistError"] = e.what();
    }
    try {
        j["f1"] = f1(c);
    } catch (const Error&) {
        j["f1"] = nullptr;
    }
    auto& battery = j["battery"] = nlohmann::json::array();
    for (const auto& m : metricBattery(c)) {
        battery.push_back({{"name", m.name},
                           {"value", optionalNumber(m.value)},
                           {"orientation", m.orientation == Orientation::Similarity ? "similarity" : "error"},
                           {"range", {rangeBound(m.rangeMin), rangeBound(m.rangeMax)}},
                           {"degenerate", m.degenerate},
                           {"outOfRange", m.outOfRange}});
    }
    return j.dump(indent) + "\n";
}

namespace {

void appendCell(std::string& row, std::optional<double> v) {
    row += ',';
    if (v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *v);
        row += buf;
    }
}

} // namespace

std::string batchCsv(const std::vector<ScoredOutcome>& outcomes) {
    std::string out = "outcome,TP,TN,FP,FN,precision,sensitivity,dentist,dentist_closed_form";
    for (const auto& name : metricBatteryNames()) {
        out += ',' + name;
    }
    out += '\n';
    for (const auto& o : outcomes) {
        const auto& c = o.counts;
        out += o.id + ',' + std::to_string(c.tp) + ',' + std::to_string(c.tn) + ',' + std::to_string(c.fp) + ',' +
               std::to_string(c.fn);
        std::optional<double> p, s, d, dc;
        if (c.tp + c.fp > 0 && c.tp + c.fn > 0) {
            const auto b = dentistBreakdown(c);
            p = b.precision;
            s = b.sensitivity;
            d = b.score;
            dc = b.scoreClosedForm;
        }
        appendCell(out, p);
        appendCell(out, s);
        appendCell(out, d);
        appendCell(out, dc);
        for (const auto& m : metricBattery(c)) {
            appendCell(out, m.value);
        }
        out += '\n';
    }
    return out;
}

} // namespace toothsim
