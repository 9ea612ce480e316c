#pragma once

// Command-line front end. `run` is the whole program minus process setup so
// that tests can drive it in-process.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stance/stance.hpp"

namespace stance::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << content;
    if (!out) throw DataError("error writing '" + path + "'");
}

/// Options shared by the commands that build features.
struct FeatureArgs {
    std::string features = "unigram";
    std::string ne_source = "gold";
    std::string stopwords;
    std::string emoticons;
    std::string gazetteer;
    std::string gold;
    std::size_t min_term_freq = 1;
    bool no_case_fold = false;
    bool no_relax_capitalization = false;
    bool no_fold_diacritics = false;
    bool no_unmarked_suffix = false;

    void add_to(CLI::App& app, bool with_gold = true) {
        app.add_option("--features", features, "Comma list over unigram,bigram,hashtag,link,emo-pos,emo-neg,ne")
            ->capture_default_str();
        app.add_option("--ne-source", ne_source, "Named entity source: gold or auto")
            ->check(CLI::IsMember({"gold", "auto"}))
            ->capture_default_str();
        app.add_option("--stopwords", stopwords, "Stopword file (one entry per line)");
        app.add_option("--emoticons", emoticons, "Emoticon lexicon file (POS/NEG<TAB>token)");
        app.add_option("--gazetteer", gazetteer, "Gazetteer file (PER|LOC|ORG<TAB>name)");
        if (with_gold) app.add_option("--gold", gold, "Gold entity annotations (id<TAB>start<TAB>end<TAB>TYPE)");
        app.add_option("--min-term-freq", min_term_freq, "Minimum term frequency for vocabulary entries")
            ->capture_default_str();
        app.add_flag("--no-case-fold", no_case_fold, "Use surface forms instead of case-folded unigrams");
        add_recognizer_flags(app);
    }

    void add_recognizer_flags(CLI::App& app) {
        app.add_flag("--no-relax-capitalization", no_relax_capitalization, "Require capitalized names");
        app.add_flag("--no-fold-diacritics", no_fold_diacritics, "Do not match names written without diacritics");
        app.add_flag("--no-unmarked-suffix", no_unmarked_suffix, "Do not match names with directly attached suffixes");
    }

    RecognizerOptions recognizer() const {
        RecognizerOptions o;
        o.relax_capitalization = !no_relax_capitalization;
        o.fold_diacritics = !no_fold_diacritics;
        o.match_unmarked_suffixes = !no_unmarked_suffix;
        return o;
    }

    FeatureConfig config() const {
        FeatureConfig cfg = FeatureConfig::parse_families(features);
        cfg.ne_source = parse_ne_source(ne_source);
        cfg.min_term_freq = min_term_freq;
        cfg.case_fold = !no_case_fold;
        cfg.validate();
        return cfg;
    }

    FeatureResources resources(const FeatureConfig& cfg, const Dataset* ds) const {
        FeatureResources res;
        if (!stopwords.empty()) res.stopwords = StopwordList::load(stopwords);
        if (!emoticons.empty()) res.emoticons = EmoticonLexicon::load(emoticons);
        if (!gazetteer.empty()) res.gazetteer = Gazetteer::load(gazetteer);
        res.recognizer = recognizer();
        if (cfg.use_named_entities) {
            if (cfg.ne_source == NeSource::Gold) {
                if (gold.empty()) throw PreconditionError("--features ne with --ne-source gold needs --gold");
                if (ds) res.gold_entities = load_annotations(gold, *ds);
            } else if (!res.gazetteer) {
                throw PreconditionError("--features ne with --ne-source auto needs --gazetteer");
            }
        }
        return res;
    }
};

struct TrainArgs {
    double c = 1.0;
    double tol = 1e-3;
    std::size_t max_passes = 10000;

    void add_to(CLI::App& app) {
        app.add_option("--c", c, "Box constraint C")->capture_default_str();
        app.add_option("--tol", tol, "KKT tolerance")->capture_default_str();
        app.add_option("--max-passes", max_passes, "Maximum SMO sweeps")->capture_default_str();
    }

    TrainConfig config() const {
        TrainConfig t;
        t.c = c;
        t.kkt_tol = tol;
        t.max_passes = max_passes;
        t.validate();
        return t;
    }
};

struct DatasetArgs {
    std::string path;
    std::string manifest;
    bool consensus = false;

    void add_to(CLI::App& app, bool with_consensus) {
        app.add_option("--dataset", path, "Data set CSV (id,text,target,stance_a,stance_b)")->required();
        app.add_option("--manifest", manifest, "Sidecar manifest with declared counts (key=value)");
        if (with_consensus)
            app.add_flag("--consensus", consensus, "Keep only tweets both annotators labelled identically");
    }

    Dataset load() const {
        Dataset ds = load_dataset(path);
        if (!manifest.empty()) {
            const auto m = Manifest::load(manifest);
            validate_counts(ds, m);
            ds = apply_target_names(ds, m);
        }
        if (consensus) ds = consensus_subset(ds);
        return ds;
    }
};

inline std::vector<TargetId> parse_target_choice(const std::string& s) {
    if (s == "1") return {TargetId::Target1};
    if (s == "2") return {TargetId::Target2};
    return {TargetId::Target1, TargetId::Target2};
}

/// Turns `key=value` lines into `--key value` tokens (`--key` for true flags).
inline std::size_t target_column_width(const Dataset& ds) {
    std::size_t w = 10;
    for (auto t : kTargets) w = std::max(w, unicode::length(ds.target(t).display_name) + 2);
    return w;
}

inline std::vector<std::string> config_tokens(const std::string& path, const CLI::App& sub) {
    std::vector<std::string> tokens;
    const auto m = Manifest::load(path);
    for (const auto& [key, value] : m.entries()) {
        const CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (!opt || key == "config") throw CLI::ExtrasError("unknown config key '" + key + "' in " + path, CLI::ExitCodes::ExtrasError);
        if (opt->get_expected_max() == 0) {
            if (value == "1" || value == "true" || value == "yes" || value == "on") tokens.push_back("--" + key);
            else if (!(value == "0" || value == "false" || value == "no" || value == "off"))
                throw CLI::ConversionError("config key '" + key + "' expects a boolean", CLI::ExitCodes::ConversionError);
        } else {
            tokens.push_back("--" + key);
            tokens.push_back(value);
        }
    }
    return tokens;
}

}  // namespace detail

inline int run(const std::vector<std::string>& argv_in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stance detection toolkit: agreement statistics, SVM cross-validation, NER evaluation"};
    app.name("stance");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::string config_path;
    const auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value file of option defaults (flag names as keys)");
    };

    // kappa
    auto* kappa = app.add_subcommand("kappa", "Inter-annotator agreement and Cohen's kappa");
    detail::DatasetArgs kappa_ds;
    std::string chance = "fixed";
    kappa_ds.add_to(*kappa, false);
    kappa->add_option("--chance", chance, "Chance agreement: fixed (0.5) or marginal")
        ->check(CLI::IsMember({"fixed", "marginal"}))
        ->capture_default_str();
    add_config(kappa);

    // cv
    auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation of the SVM classifiers");
    detail::DatasetArgs cv_ds;
    detail::FeatureArgs cv_feat;
    detail::TrainArgs cv_train;
    std::string cv_target = "both", rounding = "half-up", out_table, out_csv;
    std::size_t k = 10;
    std::uint64_t seed = 1;
    bool whole_set_vocab = false, per_fold_mean = false, serial = false;
    cv_ds.add_to(*cv, true);
    cv_feat.add_to(*cv);
    cv_train.add_to(*cv);
    cv->add_option("--target", cv_target, "1, 2 or both")->check(CLI::IsMember({"1", "2", "both"}))->capture_default_str();
    cv->add_option("--k", k, "Number of folds")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))->capture_default_str();
    cv->add_option("--seed", seed, "Fold assignment seed")->capture_default_str();
    cv->add_flag("--whole-set-vocab", whole_set_vocab, "Build the vocabulary from the whole data set");
    cv->add_flag("--per-fold-mean", per_fold_mean, "Average per-fold metrics instead of pooling counts");
    cv->add_flag("--serial", serial, "Run folds sequentially");
    cv->add_option("--rounding", rounding, "half-up or half-even")->check(CLI::IsMember({"half-up", "half-even"}))->capture_default_str();
    cv->add_option("--out-table", out_table, "Also write the text table here");
    cv->add_option("--out-csv", out_csv, "Write the machine-readable report here");
    add_config(cv);

    // ner-eval
    auto* ner = app.add_subcommand("ner-eval", "Exact-match NER evaluation against gold annotations");
    detail::DatasetArgs ner_ds;
    std::string ner_gaz, ner_gold, ner_pred, ner_out;
    detail::FeatureArgs ner_rec;
    ner_ds.add_to(*ner, false);
    ner->add_option("--gazetteer", ner_gaz, "Gazetteer file");
    ner->add_option("--gold", ner_gold, "Gold annotations")->required();
    ner->add_option("--predicted", ner_pred, "Score this annotation file instead of running the recognizer");
    ner->add_option("--out-predictions", ner_out, "Write recognizer output as an annotation file");
    ner_rec.add_recognizer_flags(*ner);
    add_config(ner);

    // ne-stats
    auto* stats = app.add_subcommand("ne-stats", "Named entity counts by target, stance and type");
    detail::DatasetArgs stats_ds;
    std::string stats_gold;
    stats_ds.add_to(*stats, false);
    stats->add_option("--gold", stats_gold, "Gold annotations")->required();
    add_config(stats);

    // train
    auto* tr = app.add_subcommand("train", "Train one classifier and save model + vocabulary");
    detail::DatasetArgs tr_ds;
    detail::FeatureArgs tr_feat;
    detail::TrainArgs tr_train;
    std::string tr_target, model_path, vocab_path, trace_path;
    tr_ds.add_to(*tr, true);
    tr_feat.add_to(*tr);
    tr_train.add_to(*tr);
    tr->add_option("--target", tr_target, "1 or 2")->check(CLI::IsMember({"1", "2"}))->required();
    tr->add_option("--model", model_path, "Output model file")->required();
    tr->add_option("--vocab", vocab_path, "Output vocabulary file")->required();
    tr->add_option("--trace", trace_path, "Write the per-sweep convergence trace here");
    add_config(tr);

    // predict
    auto* pr = app.add_subcommand("predict", "Label tweets (one per line) as FAVOR or AGAINST");
    std::string pr_model, pr_vocab, pr_input = "-";
    detail::FeatureArgs pr_feat;
    pr->add_option("--model", pr_model, "Model file")->required();
    pr->add_option("--vocab", pr_vocab, "Vocabulary file")->required();
    pr->add_option("--input", pr_input, "Input file, - for stdin")->capture_default_str();
    pr->add_option("--stopwords", pr_feat.stopwords, "Stopword file used at training time");
    pr->add_option("--emoticons", pr_feat.emoticons, "Emoticon lexicon used at training time");
    pr->add_option("--gazetteer", pr_feat.gazetteer, "Gazetteer for named entity features");
    pr_feat.add_recognizer_flags(*pr);
    add_config(pr);

    // compare
    auto* cmp = app.add_subcommand("compare", "Per-cell differences (b - a) between two CSV reports");
    std::string cmp_a, cmp_b, cmp_rounding = "half-up";
    cmp->add_option("a", cmp_a, "Baseline report CSV")->required();
    cmp->add_option("b", cmp_b, "Compared report CSV")->required();
    cmp->add_option("--rounding", cmp_rounding, "half-up or half-even")->check(CLI::IsMember({"half-up", "half-even"}))->capture_default_str();
    add_config(cmp);

    // Expand --config before parsing so explicit flags, which come later, win.
    std::vector<std::string> args(argv_in.begin(), argv_in.end());
    try {
        for (std::size_t i = 1; i < args.size(); ++i) {
            std::string path;
            if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
            else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
            else continue;
            CLI::App* sub = nullptr;
            std::size_t sub_pos = 0;
            for (std::size_t j = 1; j < args.size() && !sub; ++j) {
                for (auto* s : app.get_subcommands({})) {
                    if (s->get_name() == args[j]) {
                        sub = s;
                        sub_pos = j;
                        break;
                    }
                }
            }
            if (!sub) throw CLI::RequiredError("a subcommand before --config");
            const auto extra = detail::config_tokens(path, *sub);
            args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, extra.begin(), extra.end());
            break;
        }
    } catch (const CLI::Error& e) {
        err << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*kappa) {
            const Dataset ds = kappa_ds.load();
            const auto model = chance == "fixed" ? ChanceModel::Fixed : ChanceModel::Marginal;
            const auto r = agreement_report(ds, std::nullopt, model);
            out << "tweets    " << r.n_total << '\n';
            out << "matching  " << r.n_match << '\n';
            out << "p_o       "
                << format_ratio_percent(static_cast<std::int64_t>(r.n_match), static_cast<std::int64_t>(r.n_total), 2)
                << "%\n";
            out << "p_e       " << format_fixed(100.0 * r.p_e, 2) << "%\n";
            out << "kappa     " << format_fixed(100.0 * r.kappa, 1) << "%\n";
            for (auto t : kTargets) {
                bool any = false;
                for (const auto& tw : ds.tweets()) any = any || tw.target == t;
                if (!any) continue;
                const auto c = match_counts(ds, t);
                out << ds.target(t).display_name << " matching "
                    << format_ratio_percent(static_cast<std::int64_t>(c.n_match), static_cast<std::int64_t>(c.n_total), 2)
                    << "% (" << c.n_match << '/' << c.n_total << ")\n";
            }
        } else if (*cv) {
            const Dataset ds = cv_ds.load();
            const FeatureConfig fcfg = cv_feat.config();
            const TrainConfig tcfg = cv_train.config();
            const FeatureResources res = cv_feat.resources(fcfg, &ds);
            const Rounding mode = parse_rounding(rounding);
            CvOptions opt;
            opt.k = k;
            opt.seed = seed;
            opt.whole_set_vocab = whole_set_vocab;
            opt.pooling = per_fold_mean ? Pooling::PerFoldMean : Pooling::Micro;
            opt.parallel = !serial;

            RunReport report;
            report.folds = k;
            std::ostringstream echo;
            echo << "features=" << fcfg.families();
            if (fcfg.use_named_entities) echo << " ne-source=" << to_string(fcfg.ne_source);
            echo << " c=" << format_exact(tcfg.c) << " tol=" << format_exact(tcfg.kkt_tol) << " k=" << k
                 << " seed=" << seed << " vocab=" << (whole_set_vocab ? "whole-set" : "train-fold")
                 << " pooling=" << to_string(opt.pooling) << " case-fold=" << (fcfg.case_fold ? "on" : "off")
                 << " min-term-freq=" << fcfg.min_term_freq << " rounding=" << to_string(mode);
            report.config_echo = echo.str();
            for (auto t : detail::parse_target_choice(cv_target)) {
                const Dataset sub = ds.for_target(t);
                auto result = cross_validate(sub, ds.target(t).display_name, fcfg, tcfg, res, opt);
                report.targets.push_back(std::move(result.report));
            }
            const auto table = render_table(report, mode);
            out << table;
            if (!out_table.empty()) detail::write_file(out_table, table);
            if (!out_csv.empty()) detail::write_file(out_csv, render_csv(report));
        } else if (*ner) {
            const Dataset ds = ner_ds.load();
            const auto gold = load_annotations(ner_gold, ds);
            Annotations predicted;
            if (!ner_pred.empty()) {
                predicted = load_annotations(ner_pred, ds);
            } else {
                if (ner_gaz.empty()) throw PreconditionError("ner-eval needs --gazetteer or --predicted");
                predicted = recognize_dataset(ds, Gazetteer::load(ner_gaz), ner_rec.recognizer());
                if (!ner_out.empty()) detail::write_file(ner_out, serialize_annotations(predicted, ds));
            }
            const auto ev = evaluate_ner(ds, gold, predicted);
            const auto w = detail::target_column_width(ds);
            out << pad_right("Target", w) << "Class     P (%)   R (%)   F (%)   TP   FP   FN\n";
            const auto row = [&](const std::string& target, std::string_view cls, const NerScore& s) {
                out << pad_right(target, w) << pad_right(std::string(cls), 8) << ' ' << std::setw(6) << format_fixed(100.0 * s.precision(), 2) << "  " << std::setw(6)
                    << format_fixed(100.0 * s.recall(), 2) << "  " << std::setw(6) << format_fixed(100.0 * s.f1(), 2)
                    << "  " << std::setw(3) << s.tp << "  " << std::setw(3) << s.fp << "  " << std::setw(3) << s.fn << '\n';
            };
            for (auto t : kTargets)
                for (auto s : kStanceLabels)
                    row(s == StanceLabel::Favor ? ds.target(t).display_name : "", display_name(s),
                        ev.cells[index_of(t)][index_of(s)]);
            row("Overall", "", ev.overall);
        } else if (*stats) {
            const Dataset ds = stats_ds.load();
            const auto st = ne_statistics(ds, load_annotations(stats_gold, ds));
            if (!stats_ds.manifest.empty()) validate_ne_counts(st, Manifest::load(stats_ds.manifest));
            const auto w = detail::target_column_width(ds);
            out << pad_right("Target", w) << "Class     Tweets  Person  Location  Organization  Total\n";
            for (auto t : kTargets) {
                for (auto s : kStanceLabels) {
                    const auto& c = st.counts[index_of(t)][index_of(s)];
                    out << pad_right(s == StanceLabel::Favor ? ds.target(t).display_name : "", w)
                        << pad_right(std::string(display_name(s)), 8) << std::setw(8) << st.tweets[index_of(t)][index_of(s)] << std::setw(8) << c[0]
                        << std::setw(10) << c[1] << std::setw(14) << c[2] << std::setw(7) << st.cell_total(t, s) << '\n';
                }
            }
            out << pad_right("Total", w + 8) << std::setw(8) << st.tweet_total() << std::setw(8)
                << st.type_total(EntityType::Person) << std::setw(10) << st.type_total(EntityType::Location)
                << std::setw(14) << st.type_total(EntityType::Organization) << std::setw(7) << st.total() << '\n';
        } else if (*tr) {
            const Dataset ds = tr_ds.load().for_target(detail::parse_target_choice(tr_target).front());
            const FeatureConfig fcfg = tr_feat.config();
            const TrainConfig tcfg = tr_train.config();
            const FeatureResources res = tr_feat.resources(fcfg, &ds);
            std::vector<PreprocessedTweet> pre;
            for (const auto& t : ds.tweets()) pre.push_back(preprocess(t, fcfg, res));
            const auto vocab = build_vocabulary(pre, fcfg);
            const auto examples = to_examples(pre, vocab, fcfg);
            std::ofstream trace;
            TrainObserver obs;
            if (!trace_path.empty()) {
                trace.open(trace_path);
                if (!trace) throw DataError("cannot write '" + trace_path + "'");
                obs = trace_to(trace);
            }
            const auto model = train(examples, vocab.dimension(), tcfg, &obs);
            detail::write_file(model_path, serialize_model(model));
            detail::write_file(vocab_path, dump_vocabulary(vocab, fcfg));
            out << "trained on " << examples.size() << " tweets, dimension " << vocab.dimension() << ", "
                << model.sweeps << " sweeps" << (model.converged ? "" : " (not converged)") << '\n';
            if (!model.converged) err << "warning: SMO stopped at --max-passes before convergence\n";
        } else if (*pr) {
            const auto model = parse_model(stance::detail::read_file(pr_model));
            const auto vf = parse_vocabulary(stance::detail::read_file(pr_vocab));
            if (vf.vocabulary.dimension() != model.dimension)
                throw DataError("vocabulary dimension " + std::to_string(vf.vocabulary.dimension()) +
                                " does not match model dimension " + std::to_string(model.dimension));
            FeatureConfig fcfg = vf.config;
            if (fcfg.use_named_entities) {
                if (pr_feat.gazetteer.empty())
                    throw PreconditionError("model uses named entity features; predict needs --gazetteer");
                fcfg.ne_source = NeSource::Auto;
            }
            const FeatureResources res = pr_feat.resources(fcfg, nullptr);
            std::ifstream file;
            std::istream* in = &std::cin;
            if (pr_input != "-") {
                file.open(pr_input, std::ios::binary);
                if (!file) throw DataError("cannot open '" + pr_input + "'");
                in = &file;
            }
            std::size_t n = 0;
            for (std::string line; std::getline(*in, line);) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                Tweet t;
                t.id = "line" + std::to_string(++n);
                t.text = line;
                const auto pt = preprocess_unchecked(t, fcfg, res);
                out << to_token(predict(model, vectorize(pt, vf.vocabulary, fcfg))) << '\n';
            }
        } else if (*cmp) {
            const auto a = parse_report_csv(stance::detail::read_file(cmp_a));
            const auto b = parse_report_csv(stance::detail::read_file(cmp_b));
            out << render_deltas(compare_reports(a, b), parse_rounding(cmp_rounding));
        }
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace stance::cli
