#pragma once

// Stance-annotated tweet data sets and dual-annotator agreement statistics.

#include <array>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "stance/error.hpp"
#include "stance/format.hpp"
#include "stance/unicode.hpp"

namespace stance {

enum class StanceLabel { Favor, Against };

inline constexpr std::array<StanceLabel, 2> kStanceLabels = {StanceLabel::Favor, StanceLabel::Against};

inline std::string_view to_token(StanceLabel l) { return l == StanceLabel::Favor ? "FAVOR" : "AGAINST"; }
inline std::string_view display_name(StanceLabel l) { return l == StanceLabel::Favor ? "Favor" : "Against"; }

inline std::optional<StanceLabel> parse_stance(std::string_view s) {
    if (s == "FAVOR") return StanceLabel::Favor;
    if (s == "AGAINST") return StanceLabel::Against;
    return std::nullopt;
}

enum class TargetId { Target1, Target2 };

inline constexpr std::array<TargetId, 2> kTargets = {TargetId::Target1, TargetId::Target2};

inline std::size_t index_of(TargetId t) { return t == TargetId::Target1 ? 0 : 1; }
inline std::size_t index_of(StanceLabel l) { return l == StanceLabel::Favor ? 0 : 1; }

inline std::string_view to_token(TargetId t) { return t == TargetId::Target1 ? "TARGET1" : "TARGET2"; }

inline std::optional<TargetId> parse_target(std::string_view s) {
    if (s == "TARGET1") return TargetId::Target1;
    if (s == "TARGET2") return TargetId::Target2;
    return std::nullopt;
}

struct Target {
    TargetId id;
    std::string display_name;
};

inline Target default_target(TargetId id) {
    return {id, id == TargetId::Target1 ? "Target-1" : "Target-2"};
}

struct Tweet {
    std::string id;
    std::string text;  // may be empty when the source withholds tweet text
    TargetId target = TargetId::Target1;
    StanceLabel label_a = StanceLabel::Favor;
    std::optional<StanceLabel> label_b;

    bool agreed() const { return label_b && *label_b == label_a; }
    friend bool operator==(const Tweet&, const Tweet&) = default;
};

/// An ordered, immutable collection of tweets with unique ids.
class Dataset {
public:
    Dataset() = default;

    Dataset(std::string version_tag, std::vector<Tweet> tweets)
        : version_tag_(std::move(version_tag)), tweets_(std::move(tweets)) {
        std::unordered_set<std::string_view> seen;
        for (const auto& t : tweets_) {
            if (!seen.insert(t.id).second) throw DataError("duplicate tweet id '" + t.id + "'");
        }
    }

    const std::string& version_tag() const { return version_tag_; }
    const std::vector<Tweet>& tweets() const { return tweets_; }
    std::size_t size() const { return tweets_.size(); }
    bool empty() const { return tweets_.empty(); }

    const Target& target(TargetId id) const { return targets_[index_of(id)]; }

    Dataset with_target_names(std::string name1, std::string name2) const {
        Dataset copy = *this;
        copy.targets_[0].display_name = std::move(name1);
        copy.targets_[1].display_name = std::move(name2);
        return copy;
    }

    /// Tweets whose target is `id`, order preserved.
    Dataset for_target(TargetId id) const {
        std::vector<Tweet> kept;
        for (const auto& t : tweets_)
            if (t.target == id) kept.push_back(t);
        Dataset out(version_tag_, std::move(kept));
        out.targets_ = targets_;
        return out;
    }

    /// Count of tweets per (target, label_a).
    std::size_t count(TargetId target, StanceLabel label) const {
        std::size_t n = 0;
        for (const auto& t : tweets_) n += (t.target == target && t.label_a == label);
        return n;
    }

    bool dual_annotated() const {
        for (const auto& t : tweets_)
            if (!t.label_b) return false;
        return true;
    }

private:
    friend Dataset consensus_subset(const Dataset&);

    std::string version_tag_;
    std::vector<Tweet> tweets_;
    std::array<Target, 2> targets_ = {default_target(TargetId::Target1), default_target(TargetId::Target2)};
};

// ---------------------------------------------------------------------------
// CSV I/O

enum class DatasetFormat { Csv };

inline constexpr std::string_view kDatasetHeader = "id,text,target,stance_a,stance_b";

namespace detail {

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based line where the record starts
};

/// RFC 4180 style reader: double-quote quoting with "" escapes, quoted fields
/// may span lines. Accepts LF and CRLF terminators.
inline std::vector<CsvRecord> parse_csv(std::string_view in) {
    std::vector<CsvRecord> records;
    std::size_t i = 0, line = 1;
    while (i < in.size()) {
        CsvRecord rec;
        rec.line = line;
        std::string field;
        bool done = false;
        while (!done) {
            if (i < in.size() && in[i] == '"') {
                ++i;
                for (;;) {
                    if (i >= in.size()) throw DataError("line " + std::to_string(rec.line) + ": unterminated quoted field");
                    if (in[i] == '"') {
                        if (i + 1 < in.size() && in[i + 1] == '"') {
                            field.push_back('"');
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    if (in[i] == '\n') ++line;
                    field.push_back(in[i++]);
                }
                if (i < in.size() && in[i] != ',' && in[i] != '\n' && in[i] != '\r')
                    throw DataError("line " + std::to_string(line) + ": unexpected character after closing quote");
            } else {
                while (i < in.size() && in[i] != ',' && in[i] != '\n' && in[i] != '\r') {
                    if (in[i] == '"')
                        throw DataError("line " + std::to_string(line) + ": stray quote in unquoted field");
                    field.push_back(in[i++]);
                }
            }
            rec.fields.push_back(std::move(field));
            field.clear();
            if (i >= in.size()) {
                done = true;
            } else if (in[i] == ',') {
                ++i;
            } else {
                if (in[i] == '\r') ++i;
                if (i < in.size() && in[i] == '\n') ++i;
                ++line;
                done = true;
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

inline bool needs_quotes(std::string_view f) {
    return f.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_csv_field(std::string& out, std::string_view f) {
    if (!needs_quotes(f)) {
        out += f;
        return;
    }
    out += '"';
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses data set content. Row numbers in errors count data rows from 1.
inline Dataset parse_dataset(std::string_view content, std::string version_tag = {}) {
    if (!unicode::is_valid_utf8(content)) throw DataError("data set is not valid UTF-8");
    auto records = detail::parse_csv(content);
    if (records.empty()) throw DataError("empty data set file (missing header)");
    std::string header;
    for (std::size_t k = 0; k < records[0].fields.size(); ++k) {
        if (k) header += ',';
        header += records[0].fields[k];
    }
    if (header != kDatasetHeader) throw DataError("unexpected header '" + header + "', expected '" + std::string(kDatasetHeader) + "'");

    std::vector<Tweet> tweets;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const std::string where = "row " + std::to_string(r) + " (line " + std::to_string(rec.line) + ")";
        if (rec.fields.size() != 5)
            throw DataError(where + ": expected 5 fields, found " + std::to_string(rec.fields.size()));
        Tweet t;
        t.id = rec.fields[0];
        if (t.id.empty()) throw DataError(where + ": empty id");
        t.text = rec.fields[1];
        const auto target = parse_target(rec.fields[2]);
        if (!target) throw DataError(where + ": unknown target '" + rec.fields[2] + "'");
        t.target = *target;
        const auto a = parse_stance(rec.fields[3]);
        if (!a) throw DataError(where + ": unknown stance label '" + rec.fields[3] + "'");
        t.label_a = *a;
        if (!rec.fields[4].empty()) {
            const auto b = parse_stance(rec.fields[4]);
            if (!b) throw DataError(where + ": unknown stance label '" + rec.fields[4] + "'");
            t.label_b = *b;
        }
        if (!seen.insert(t.id).second) throw DataError(where + ": duplicate id '" + t.id + "'");
        tweets.push_back(std::move(t));
    }
    if (tweets.empty()) throw DataError("no records");
    return Dataset(std::move(version_tag), std::move(tweets));
}

inline Dataset load_dataset(const std::string& path, DatasetFormat format = DatasetFormat::Csv) {
    (void)format;  // CSV is the only format
    try {
        return parse_dataset(detail::read_file(path), path);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

/// Canonical CSV: fields quoted only when they contain a comma, quote or line
/// break; LF line endings; trailing newline.
inline std::string serialize_dataset(const Dataset& ds) {
    std::string out(kDatasetHeader);
    out += '\n';
    for (const auto& t : ds.tweets()) {
        detail::write_csv_field(out, t.id);
        out += ',';
        detail::write_csv_field(out, t.text);
        out += ',';
        out += to_token(t.target);
        out += ',';
        out += to_token(t.label_a);
        out += ',';
        if (t.label_b) out += to_token(*t.label_b);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Manifest: plain key=value lines, '#' comments.
//   total=700
//   TARGET1.FAVOR=175
//   name.TARGET1=Galatasaray
//   ne.TARGET1.FAVOR.ORG=207

class Manifest {
public:
    static Manifest parse(std::string_view content) {
        Manifest m;
        std::size_t line_no = 0;
        std::istringstream in{std::string(content)};
        for (std::string line; std::getline(in, line);) {
            ++line_no;
            const auto s = detail::trim(line);
            if (s.empty() || s.front() == '#') continue;
            const auto eq = s.find('=');
            if (eq == std::string_view::npos)
                throw DataError("manifest line " + std::to_string(line_no) + ": expected key=value");
            m.entries_[std::string(detail::trim(s.substr(0, eq)))] = std::string(detail::trim(s.substr(eq + 1)));
        }
        return m;
    }

    static Manifest load(const std::string& path) { return parse(detail::read_file(path)); }

    const std::map<std::string, std::string>& entries() const { return entries_; }

    std::optional<std::string> get(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> get_count(const std::string& key) const {
        auto v = get(key);
        if (!v) return std::nullopt;
        try {
            std::size_t pos = 0;
            const long long n = std::stoll(*v, &pos);
            if (pos != v->size() || n < 0) throw std::invalid_argument(*v);
            return static_cast<std::size_t>(n);
        } catch (const std::exception&) {
            throw DataError("manifest key '" + key + "': '" + *v + "' is not a count");
        }
    }

    void set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }

private:
    std::map<std::string, std::string> entries_;
};

/// Checks the declared total and per-(target, label) counts. Undeclared keys are not checked.
inline void validate_counts(const Dataset& ds, const Manifest& m) {
    if (auto total = m.get_count("total"); total && *total != ds.size())
        throw DataError("manifest declares total=" + std::to_string(*total) + " but data set has " + std::to_string(ds.size()));
    for (auto target : kTargets) {
        for (auto label : kStanceLabels) {
            const std::string key = std::string(to_token(target)) + "." + std::string(to_token(label));
            const auto declared = m.get_count(key);
            const auto actual = ds.count(target, label);
            if (declared && *declared != actual)
                throw DataError("manifest declares " + key + "=" + std::to_string(*declared) + " but data set has " + std::to_string(actual));
        }
    }
}

/// Applies `name.TARGET1` / `name.TARGET2` display names when declared.
inline Dataset apply_target_names(const Dataset& ds, const Manifest& m) {
    return ds.with_target_names(m.get("name.TARGET1").value_or(ds.target(TargetId::Target1).display_name),
                                m.get("name.TARGET2").value_or(ds.target(TargetId::Target2).display_name));
}

// ---------------------------------------------------------------------------
// Agreement

struct MatchCounts {
    std::size_t n_match = 0;
    std::size_t n_total = 0;
    double fraction() const { return static_cast<double>(n_match) / static_cast<double>(n_total); }
};

inline MatchCounts match_counts(const Dataset& ds, std::optional<TargetId> scope = std::nullopt) {
    MatchCounts c;
    for (const auto& t : ds.tweets()) {
        if (scope && t.target != *scope) continue;
        if (!t.label_b) throw PreconditionError("tweet '" + t.id + "' has no second annotation");
        ++c.n_total;
        c.n_match += t.agreed();
    }
    if (c.n_total == 0) throw PreconditionError("no tweets in agreement scope");
    return c;
}

/// Fraction of tweets on which both annotators chose the same stance.
inline double matching_percentage(const Dataset& ds, std::optional<TargetId> scope = std::nullopt) {
    return match_counts(ds, scope).fraction();
}

inline double cohens_kappa(double p_o, double p_e) {
    if (!(p_o >= 0.0 && p_o <= 1.0)) throw PreconditionError("p_o must lie in [0, 1]");
    if (!(p_e >= 0.0 && p_e <= 1.0)) throw PreconditionError("p_e must lie in [0, 1]");
    if (p_e >= 1.0) throw PreconditionError("kappa is undefined when p_e = 1");
    return (p_o - p_e) / (1.0 - p_e);
}

/// How chance agreement is modelled.
///  - Fixed: two equiprobable classes, p_e = 0.5.
///  - Marginal: p_e = sum over labels of the product of both annotators' marginal rates.
enum class ChanceModel { Fixed, Marginal };

struct AgreementReport {
    std::size_t n_total = 0;
    std::size_t n_match = 0;
    double p_o = 0.0;
    double p_e = 0.0;
    double kappa = 0.0;
};

inline AgreementReport agreement_report(const Dataset& ds, std::optional<TargetId> scope = std::nullopt,
                                        ChanceModel chance = ChanceModel::Fixed) {
    const auto c = match_counts(ds, scope);
    AgreementReport r;
    r.n_total = c.n_total;
    r.n_match = c.n_match;
    r.p_o = c.fraction();
    if (chance == ChanceModel::Fixed) {
        r.p_e = 0.5;
    } else {
        std::array<double, 2> ma{}, mb{};
        for (const auto& t : ds.tweets()) {
            if (scope && t.target != *scope) continue;
            ma[index_of(t.label_a)] += 1.0;
            mb[index_of(*t.label_b)] += 1.0;
        }
        const double n = static_cast<double>(c.n_total);
        r.p_e = (ma[0] * mb[0] + ma[1] * mb[1]) / (n * n);
    }
    r.kappa = cohens_kappa(r.p_o, r.p_e);
    return r;
}

/// Tweets both annotators labelled identically, order preserved.
inline Dataset consensus_subset(const Dataset& ds) {
    std::vector<Tweet> kept;
    for (const auto& t : ds.tweets()) {
        if (!t.label_b) throw PreconditionError("tweet '" + t.id + "' has no second annotation");
        if (t.agreed()) kept.push_back(t);
    }
    Dataset out(ds.version_tag(), std::move(kept));
    out.targets_ = ds.targets_;
    return out;
}

}  // namespace stance
