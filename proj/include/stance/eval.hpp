#pragma once

// Stratified k-fold cross-validation and precision/recall/F reporting.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stance/corpus.hpp"
#include "stance/error.hpp"
#include "stance/features.hpp"
#include "stance/format.hpp"
#include "stance/svm.hpp"

namespace stance {

/// Binary confusion counts with Favor as the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;  // Favor predicted Favor
    std::size_t fp = 0;  // Against predicted Favor
    std::size_t fn = 0;  // Favor predicted Against
    std::size_t tn = 0;  // Against predicted Against

    void add(StanceLabel actual, StanceLabel predicted) {
        if (actual == StanceLabel::Favor) (predicted == StanceLabel::Favor ? tp : fn)++;
        else (predicted == StanceLabel::Favor ? fp : tn)++;
    }

    std::size_t total() const { return tp + fp + fn + tn; }

    /// The same counts with Against as the positive class.
    ConfusionMatrix swapped() const { return {tn, fn, fp, tp}; }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline double f_measure(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

/// Metrics of `cls` treated as the positive class; 0 for empty denominators.
inline ClassMetrics class_metrics(const ConfusionMatrix& cm, StanceLabel cls) {
    const ConfusionMatrix m = cls == StanceLabel::Favor ? cm : cm.swapped();
    ClassMetrics out;
    out.precision = m.tp + m.fp ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    out.recall = m.tp + m.fn ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    out.f1 = f_measure(out.precision, out.recall);
    return out;
}

/// Arithmetic mean of each metric; F is averaged directly, not recomputed from mean P and R.
inline ClassMetrics macro_average(const ClassMetrics& a, const ClassMetrics& b) {
    return {(a.precision + b.precision) / 2.0, (a.recall + b.recall) / 2.0, (a.f1 + b.f1) / 2.0};
}

/// One target's block of the report: Favor, Against and Average rows.
struct TargetReport {
    std::string target;
    ClassMetrics favor;
    ClassMetrics against;
    ClassMetrics average;
};

struct RunReport {
    std::vector<TargetReport> targets;
    std::size_t folds = 0;
    std::string config_echo;
};

enum class Pooling { Micro, PerFoldMean };

inline std::string_view to_string(Pooling p) { return p == Pooling::Micro ? "micro" : "per-fold-mean"; }

/// Pools counts across folds (Micro) or averages per-fold metrics (PerFoldMean).
inline TargetReport aggregate(std::span<const ConfusionMatrix> matrices, std::string target_name,
                              Pooling pooling = Pooling::Micro) {
    if (matrices.empty()) throw PreconditionError("aggregate needs at least one confusion matrix");
    TargetReport r;
    r.target = std::move(target_name);
    if (pooling == Pooling::Micro) {
        ConfusionMatrix sum;
        for (const auto& m : matrices) sum += m;
        r.favor = class_metrics(sum, StanceLabel::Favor);
        r.against = class_metrics(sum, StanceLabel::Against);
    } else {
        const double n = static_cast<double>(matrices.size());
        for (const auto& m : matrices) {
            const auto f = class_metrics(m, StanceLabel::Favor), a = class_metrics(m, StanceLabel::Against);
            r.favor.precision += f.precision / n;
            r.favor.recall += f.recall / n;
            r.favor.f1 += f.f1 / n;
            r.against.precision += a.precision / n;
            r.against.recall += a.recall / n;
            r.against.f1 += a.f1 / n;
        }
    }
    r.average = macro_average(r.favor, r.against);
    return r;
}

// ---------------------------------------------------------------------------
// Folds

namespace detail {

/// Uniform integer in [0, bound) by rejection; stable across standard libraries.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do v = rng();
    while (v >= limit);
    return v % bound;
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

}  // namespace detail

struct FoldPlan {
    std::size_t k = 10;
    std::uint64_t seed = 0;
    std::vector<std::size_t> fold_of;  // aligned with the data set order
    std::map<std::string, std::size_t> assignment;

    std::vector<std::size_t> test_indices(std::size_t fold) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] == fold) out.push_back(i);
        return out;
    }
    std::vector<std::size_t> train_indices(std::size_t fold) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] != fold) out.push_back(i);
        return out;
    }
};

/// Stratified by the first annotator's stance. Each class is shuffled with
/// the seed and dealt round-robin; the second class continues where the
/// first stopped, so total fold sizes also differ by at most one.
inline FoldPlan make_folds(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw PreconditionError("k must be at least 2 (k=" + std::to_string(k) + ")");
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[index_of(ds.tweets()[i].label_a)].push_back(i);
    for (auto label : kStanceLabels) {
        const auto n = by_class[index_of(label)].size();
        if (n < k)
            throw PreconditionError("class " + std::string(display_name(label)) + " has " + std::to_string(n) +
                                    " tweets, fewer than k=" + std::to_string(k));
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.fold_of.assign(ds.size(), 0);
    std::mt19937_64 rng(seed);
    std::size_t offset = 0;
    for (auto& members : by_class) {
        detail::shuffle(members, rng);
        for (std::size_t p = 0; p < members.size(); ++p) plan.fold_of[members[p]] = (offset + p) % k;
        offset = (offset + members.size()) % k;
    }
    for (std::size_t i = 0; i < ds.size(); ++i) plan.assignment[ds.tweets()[i].id] = plan.fold_of[i];
    return plan;
}

// ---------------------------------------------------------------------------
// Fold evaluation

inline std::vector<LabeledExample> to_examples(std::span<const PreprocessedTweet> tweets, const Vocabulary& vocab,
                                               const FeatureConfig& cfg) {
    std::vector<LabeledExample> out;
    out.reserve(tweets.size());
    for (const auto& t : tweets) out.push_back({vectorize(t, vocab, cfg), to_sign(t.label)});
    return out;
}

/// Vocabulary (from `train` unless `fixed_vocab` is given), one model, then
/// confusion counts on `test`.
inline ConfusionMatrix evaluate_fold(std::span<const PreprocessedTweet> train_set, std::span<const PreprocessedTweet> test_set,
                                     const FeatureConfig& cfg, const TrainConfig& tcfg,
                                     const Vocabulary* fixed_vocab = nullptr) {
    if (test_set.empty()) throw PreconditionError("empty test fold");
    std::set<std::string_view> train_ids;
    for (const auto& t : train_set) train_ids.insert(t.id);
    for (const auto& t : test_set)
        if (train_ids.count(t.id)) throw PreconditionError("tweet '" + t.id + "' is in both train and test folds");

    const Vocabulary vocab = fixed_vocab ? *fixed_vocab : build_vocabulary(train_set, cfg);
    const auto examples = to_examples(train_set, vocab, cfg);
    const auto model = train(examples, vocab.dimension(), tcfg);
    ConfusionMatrix cm;
    for (const auto& t : test_set) cm.add(t.label, predict(model, vectorize(t, vocab, cfg)));
    return cm;
}

struct CvOptions {
    std::size_t k = 10;
    std::uint64_t seed = 1;
    bool whole_set_vocab = false;
    Pooling pooling = Pooling::Micro;
    bool parallel = true;
};

struct CvResult {
    FoldPlan plan;
    std::vector<ConfusionMatrix> folds;
    TargetReport report;
};

/// Full k-fold run for one target's tweets.
inline CvResult cross_validate(const Dataset& ds, std::string target_name, const FeatureConfig& cfg,
                               const TrainConfig& tcfg, const FeatureResources& res, const CvOptions& opt) {
    cfg.validate();
    tcfg.validate();
    std::vector<PreprocessedTweet> pre;
    pre.reserve(ds.size());
    for (const auto& t : ds.tweets()) pre.push_back(preprocess(t, cfg, res));

    CvResult out;
    out.plan = make_folds(ds, opt.k, opt.seed);
    std::optional<Vocabulary> whole;
    if (opt.whole_set_vocab) whole = build_vocabulary(pre, cfg);

    const auto run_fold = [&](std::size_t f) {
        std::vector<PreprocessedTweet> tr, te;
        for (auto i : out.plan.train_indices(f)) tr.push_back(pre[i]);
        for (auto i : out.plan.test_indices(f)) te.push_back(pre[i]);
        return evaluate_fold(tr, te, cfg, tcfg, whole ? &*whole : nullptr);
    };
    out.folds.resize(opt.k);
    if (opt.parallel) {
        std::vector<std::future<ConfusionMatrix>> jobs;
        for (std::size_t f = 0; f < opt.k; ++f) jobs.push_back(std::async(std::launch::async, run_fold, f));
        for (std::size_t f = 0; f < opt.k; ++f) out.folds[f] = jobs[f].get();
    } else {
        for (std::size_t f = 0; f < opt.k; ++f) out.folds[f] = run_fold(f);
    }
    out.report = aggregate(out.folds, std::move(target_name), opt.pooling);
    return out;
}

// ---------------------------------------------------------------------------
// Rendering

/// Aligned text table with the columns Target, Class, P (%), R (%), F (%).
inline std::string render_table(const RunReport& r, Rounding mode = Rounding::HalfUp) {
    std::size_t w = 8;
    for (const auto& t : r.targets) w = std::max(w, unicode::length(t.target) + 2);
    const auto pad = pad_right;
    const auto lpad = [](std::string s, std::size_t n) {
        if (s.size() < n) s = std::string(n - s.size(), ' ') + s;
        return s;
    };
    std::ostringstream out;
    if (!r.config_echo.empty()) out << "# " << r.config_echo << '\n';
    out << pad("Target", w) << pad("Class", 9) << lpad("P (%)", 7) << lpad("R (%)", 8) << lpad("F (%)", 8) << '\n';
    for (const auto& t : r.targets) {
        const auto row = [&](const std::string& target, std::string_view cls, const ClassMetrics& m) {
            out << pad(target, w) << pad(std::string(cls), 9) << lpad(format_fixed(100.0 * m.precision, 1, mode), 7)
                << lpad(format_fixed(100.0 * m.recall, 1, mode), 8) << lpad(format_fixed(100.0 * m.f1, 1, mode), 8)
                << '\n';
        };
        row(t.target, "Favor", t.favor);
        row("", "Against", t.against);
        row("", "Average", t.average);
    }
    return out.str();
}

inline constexpr std::string_view kReportCsvHeader = "target,class,precision,recall,f1";

/// Machine-readable report; values are percentages with four decimals.
inline std::string render_csv(const RunReport& r) {
    std::ostringstream out;
    out << kReportCsvHeader << '\n';
    for (const auto& t : r.targets) {
        const auto row = [&](std::string_view cls, const ClassMetrics& m) {
            std::string target;
            detail::write_csv_field(target, t.target);
            out << target << ',' << cls << ',' << format_fixed(100.0 * m.precision, 4) << ','
                << format_fixed(100.0 * m.recall, 4) << ',' << format_fixed(100.0 * m.f1, 4) << '\n';
        };
        row("Favor", t.favor);
        row("Against", t.against);
        row("Average", t.average);
    }
    return out.str();
}

inline RunReport parse_report_csv(std::string_view content) {
    const auto records = detail::parse_csv(content);
    if (records.empty()) throw DataError("report: empty file");
    std::string header;
    for (std::size_t i = 0; i < records[0].fields.size(); ++i) header += (i ? "," : "") + records[0].fields[i];
    if (header != kReportCsvHeader) throw DataError("report: unexpected header '" + header + "'");
    RunReport r;
    const auto number = [](const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0') throw DataError("report: bad number '" + s + "'");
        return v / 100.0;
    };
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i].fields;
        if (f.size() != 5) throw DataError("report line " + std::to_string(records[i].line) + ": expected 5 fields");
        if (r.targets.empty() || r.targets.back().target != f[0]) r.targets.push_back({f[0], {}, {}, {}});
        ClassMetrics m{number(f[2]), number(f[3]), number(f[4])};
        auto& t = r.targets.back();
        if (f[1] == "Favor") t.favor = m;
        else if (f[1] == "Against") t.against = m;
        else if (f[1] == "Average") t.average = m;
        else throw DataError("report line " + std::to_string(records[i].line) + ": unknown class '" + f[1] + "'");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Comparison

struct MetricDelta {
    std::string target;
    std::string cls;
    double precision = 0.0;  // percentage points, b - a
    double recall = 0.0;
    double f1 = 0.0;
};

inline std::vector<MetricDelta> compare_reports(const RunReport& a, const RunReport& b) {
    if (a.targets.size() != b.targets.size()) throw PreconditionError("reports cover different numbers of targets");
    std::vector<MetricDelta> out;
    for (std::size_t i = 0; i < a.targets.size(); ++i) {
        const auto& ta = a.targets[i];
        const auto& tb = b.targets[i];
        if (ta.target != tb.target)
            throw PreconditionError("report target mismatch: '" + ta.target + "' vs '" + tb.target + "'");
        const auto delta = [&](std::string cls, const ClassMetrics& x, const ClassMetrics& y) {
            out.push_back({ta.target, std::move(cls), 100.0 * (y.precision - x.precision), 100.0 * (y.recall - x.recall),
                           100.0 * (y.f1 - x.f1)});
        };
        delta("Favor", ta.favor, tb.favor);
        delta("Against", ta.against, tb.against);
        delta("Average", ta.average, tb.average);
    }
    return out;
}

inline std::string render_deltas(const std::vector<MetricDelta>& deltas, Rounding mode = Rounding::HalfUp) {
    const auto signed_fixed = [&](double v) {
        auto s = format_fixed(v, 1, mode);
        return (s[0] == '-' || s == "0.0") ? s : "+" + s;
    };
    std::ostringstream out;
    out << "target,class,d_precision,d_recall,d_f1\n";
    for (const auto& d : deltas)
        out << d.target << ',' << d.cls << ',' << signed_fixed(d.precision) << ',' << signed_fixed(d.recall) << ','
            << signed_fixed(d.f1) << '\n';
    return out.str();
}

}  // namespace stance
