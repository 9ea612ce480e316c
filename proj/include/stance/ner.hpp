#pragma once

// Gazetteer-driven named entity recognition for tweets, where capitalization
// is unreliable and Turkish diacritics are often dropped, plus exact-match
// scoring against a gold answer key.

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stance/corpus.hpp"
#include "stance/error.hpp"
#include "stance/text.hpp"
#include "stance/unicode.hpp"

namespace stance {

enum class EntityType { Person, Location, Organization };

inline constexpr std::array<EntityType, 3> kEntityTypes = {EntityType::Person, EntityType::Location,
                                                           EntityType::Organization};

inline std::size_t index_of(EntityType t) { return static_cast<std::size_t>(t); }

inline std::string_view to_token(EntityType t) {
    switch (t) {
        case EntityType::Person: return "PER";
        case EntityType::Location: return "LOC";
        case EntityType::Organization: return "ORG";
    }
    return "?";
}

inline std::string_view display_name(EntityType t) {
    switch (t) {
        case EntityType::Person: return "Person";
        case EntityType::Location: return "Location";
        case EntityType::Organization: return "Organization";
    }
    return "?";
}

inline std::optional<EntityType> parse_entity_type(std::string_view s) {
    if (s == "PER") return EntityType::Person;
    if (s == "LOC") return EntityType::Location;
    if (s == "ORG") return EntityType::Organization;
    return std::nullopt;
}

/// A typed entity occurrence; offsets are code points into the tweet text.
struct EntitySpan {
    std::size_t start = 0;
    std::size_t end = 0;
    EntityType etype = EntityType::Organization;
    std::string surface;

    friend bool operator==(const EntitySpan& a, const EntitySpan& b) {
        return a.start == b.start && a.end == b.end && a.etype == b.etype;
    }
};

namespace detail {

inline char32_t strip_diacritic(char32_t c) {
    switch (c) {
        case 0xE7: return U'c';   // ç
        case 0x11F: return U'g';  // ğ
        case 0x131: return U'i';  // ı
        case 0xF6: return U'o';   // ö
        case 0x15F: return U's';  // ş
        case 0xFC: return U'u';   // ü
        default: return c;
    }
}

/// Case-folded code points of cps[begin, end) with, for every output position,
/// the index one past the input code point that produced it.
struct FoldedRun {
    std::u32string folded;
    std::vector<std::size_t> source_end;
};

inline FoldedRun fold_run(const std::vector<unicode::CodePoint>& cps, std::size_t begin, std::size_t end) {
    FoldedRun r;
    for (std::size_t i = begin; i < end; ++i) {
        const char32_t c = cps[i].value;
        if (c == U'I' && i + 1 < end && cps[i + 1].value == 0x307) {
            r.folded.push_back(U'i');
            r.source_end.push_back(i + 2);
            ++i;
            continue;
        }
        r.folded.push_back(unicode::to_lower_turkish(c));
        r.source_end.push_back(i + 1);
    }
    return r;
}

inline std::u32string strip_diacritics(std::u32string s) {
    for (auto& c : s) c = strip_diacritic(c);
    return s;
}

}  // namespace detail

/// Case folds, then maps ç ğ ı ö ş ü to c g i o s u.
inline std::string diacritics_fold(std::string_view text) {
    return unicode::encode(detail::strip_diacritics(unicode::to_u32(fold_case(text))));
}

struct GazetteerEntry {
    std::string name;
    EntityType etype;
};

/// Compiled name list. Keys are token sequences in case-folded and in
/// diacritics-folded form.
class Gazetteer {
public:
    Gazetteer() = default;

    explicit Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            Key key;
            for (const auto& tok : tokenize(entries_[i].name, no_emoticons())) {
                key.push_back(unicode::to_u32(tok.folded));
            }
            if (key.empty()) throw DataError("gazetteer entry " + std::to_string(i + 1) + " has an empty name");
            max_tokens_ = std::max(max_tokens_, key.size());
            Key dia = key;
            for (auto& t : dia) t = detail::strip_diacritics(t);
            folded_[key].push_back(i);
            diacritic_[dia].push_back(i);
        }
    }

    /// Lines `TYPE<TAB>name`, TYPE in {PER, LOC, ORG}; blank lines and `#` comments skipped.
    static Gazetteer parse(std::string_view content) {
        std::vector<GazetteerEntry> entries;
        std::istringstream in{std::string(content)};
        std::size_t line_no = 0;
        for (std::string line; std::getline(in, line);) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (detail::trim(line).empty() || line.front() == '#') continue;
            const auto tab = line.find('\t');
            const auto type = tab == std::string::npos ? std::nullopt : parse_entity_type(line.substr(0, tab));
            if (!type) throw DataError("gazetteer line " + std::to_string(line_no) + ": expected PER|LOC|ORG<TAB>name");
            entries.push_back({std::string(detail::trim(std::string_view(line).substr(tab + 1))), *type});
        }
        return Gazetteer(std::move(entries));
    }

    static Gazetteer load(const std::string& path) { return parse(detail::read_file(path)); }

    using Key = std::vector<std::u32string>;

    const std::vector<GazetteerEntry>& entries() const { return entries_; }
    std::size_t max_tokens() const { return max_tokens_; }
    bool empty() const { return entries_.empty(); }

    /// Entries whose key matches exactly (diacritics folded or not), in file order.
    const std::vector<std::size_t>* find(const Key& key, bool diacritics_folded) const {
        const auto& index = diacritics_folded ? diacritic_ : folded_;
        auto it = index.find(key);
        return it == index.end() ? nullptr : &it->second;
    }

    /// Lookup of an arbitrary name variant (exact, case-folded or diacritics-folded).
    std::optional<EntityType> lookup(std::string_view name) const {
        Key key;
        for (const auto& tok : tokenize(name, no_emoticons())) key.push_back(unicode::to_u32(tok.folded));
        if (const auto* hit = find(key, false)) return entries_[hit->front()].etype;
        for (auto& t : key) t = detail::strip_diacritics(t);
        if (const auto* hit = find(key, true)) return entries_[hit->front()].etype;
        return std::nullopt;
    }

    static const EmoticonLexicon& no_emoticons() {
        static const EmoticonLexicon empty;
        return empty;
    }

private:
    std::vector<GazetteerEntry> entries_;
    std::map<Key, std::vector<std::size_t>> folded_;
    std::map<Key, std::vector<std::size_t>> diacritic_;
    std::size_t max_tokens_ = 0;
};

struct RecognizerOptions {
    /// Accept names that are not written with initial capitals.
    bool relax_capitalization = true;
    /// Accept names written without Turkish diacritics.
    bool fold_diacritics = true;
    /// Match a name that is a full prefix of a longer word ("Galatasarayı"),
    /// excluding the attached suffix from the span.
    bool match_unmarked_suffixes = true;
};

namespace detail {

struct NerCandidate {
    std::size_t start;
    std::size_t end;
    EntityType etype;
    int tier;
};

// Tiers: 0 strict, 1 needs relaxed capitalization, 2 needs diacritics folding, 3 needs both.
inline int tier_of(bool needs_caps, bool needs_dia) { return (needs_caps ? 1 : 0) + (needs_dia ? 2 : 0); }

}  // namespace detail

/// Longest-match gazetteer recognition over the tweet's token sequence.
///
/// A name is matched against consecutive tokens; only the last token may carry
/// a suffix, either after an apostrophe or (optionally) attached directly, and
/// the suffix is excluded from the span. Overlaps are resolved tier by tier
/// (strict matches first, then matches that need relaxed capitalization, then
/// diacritics folding, then both); within a tier longer spans win, then
/// earlier starts. Enabling diacritics folding therefore never removes a span,
/// and neither does relaxing capitalization while folding is off.
inline std::vector<EntitySpan> recognize(std::string_view text, const Gazetteer& gaz,
                                         const RecognizerOptions& opt = {}) {
    std::vector<EntitySpan> out;
    if (gaz.empty()) return out;
    const auto cps = unicode::decode(text);
    std::vector<Token> toks;
    for (auto& t : tokenize(text, Gazetteer::no_emoticons()))
        if (t.kind == TokenKind::Word || t.kind == TokenKind::Punct) toks.push_back(std::move(t));

    struct Piece {
        detail::FoldedRun folded;  // stem only (before any apostrophe)
        std::u32string dia;
        std::size_t stem_end;      // code point index where the stem ends
        bool has_marked_suffix;
        bool capitalized;
    };
    std::vector<Piece> pieces;
    pieces.reserve(toks.size());
    for (const auto& t : toks) {
        Piece p;
        p.stem_end = t.span.end;
        for (std::size_t i = t.span.start; i < t.span.end; ++i) {
            if (unicode::is_apostrophe(cps[i].value)) {
                p.stem_end = i;
                break;
            }
        }
        p.has_marked_suffix = p.stem_end != t.span.end;
        p.folded = detail::fold_run(cps, t.span.start, p.stem_end);
        p.dia = detail::strip_diacritics(p.folded.folded);
        const char32_t first = cps[t.span.start].value;
        p.capitalized = !unicode::is_letter(first) || unicode::is_upper(first);
        pieces.push_back(std::move(p));
    }

    const auto adjacent = [&](std::size_t a, std::size_t b) {
        for (std::size_t i = toks[a].span.end; i < toks[b].span.start; ++i)
            if (!unicode::is_space(cps[i].value)) return false;
        return true;
    };

    std::vector<detail::NerCandidate> candidates;
    const auto consider = [&](std::size_t first, std::size_t end_cp, bool caps_ok, bool needs_dia,
                              const std::vector<std::size_t>& hits) {
        const int tier = detail::tier_of(!caps_ok, needs_dia);
        if (!caps_ok && !opt.relax_capitalization) return;
        if (needs_dia && !opt.fold_diacritics) return;
        candidates.push_back({toks[first].span.start, end_cp, gaz.entries()[hits.front()].etype, tier});
    };

    for (std::size_t i = 0; i < toks.size(); ++i) {
        bool caps_ok = true;
        Gazetteer::Key folded_key, dia_key;
        for (std::size_t len = 1; len <= gaz.max_tokens() && i + len <= toks.size(); ++len) {
            const std::size_t j = i + len - 1;
            const Piece& p = pieces[j];
            if (len > 1 && !adjacent(j - 1, j)) break;
            if (p.folded.folded.empty()) break;
            caps_ok = caps_ok && p.capitalized;

            // Full last token (stem).
            folded_key.push_back(p.folded.folded);
            dia_key.push_back(p.dia);
            if (const auto* hit = gaz.find(folded_key, false)) consider(i, p.stem_end, caps_ok, false, *hit);
            else if (const auto* dhit = gaz.find(dia_key, true)) consider(i, p.stem_end, caps_ok, true, *dhit);

            // Proper prefixes of the last token's stem: unmarked suffixes.
            if (opt.match_unmarked_suffixes && !p.has_marked_suffix) {
                Gazetteer::Key fk(folded_key.begin(), folded_key.end() - 1);
                Gazetteer::Key dk(dia_key.begin(), dia_key.end() - 1);
                fk.emplace_back();
                dk.emplace_back();
                for (std::size_t k = 1; k < p.folded.folded.size(); ++k) {
                    fk.back() = p.folded.folded.substr(0, k);
                    dk.back() = p.dia.substr(0, k);
                    const std::size_t end_cp = p.folded.source_end[k - 1];
                    if (const auto* hit = gaz.find(fk, false)) consider(i, end_cp, caps_ok, false, *hit);
                    else if (const auto* dhit = gaz.find(dk, true)) consider(i, end_cp, caps_ok, true, *dhit);
                }
            }
            // A marked suffix closes the name.
            if (p.has_marked_suffix) break;
        }
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.tier != b.tier) return a.tier < b.tier;
        if (a.end - a.start != b.end - b.start) return a.end - a.start > b.end - b.start;
        return a.start < b.start;
    });
    for (const auto& c : candidates) {
        const bool clash = std::any_of(out.begin(), out.end(),
                                       [&](const EntitySpan& s) { return c.start < s.end && s.start < c.end; });
        if (clash) continue;
        EntitySpan span;
        span.start = c.start;
        span.end = c.end;
        span.etype = c.etype;
        span.surface = std::string(text.substr(cps[c.start].byte_begin, cps[c.end - 1].byte_end - cps[c.start].byte_begin));
        out.push_back(std::move(span));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    return out;
}

// ---------------------------------------------------------------------------
// Scoring

struct NerScore {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
    double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
    double f1() const {
        const double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }

    NerScore& operator+=(const NerScore& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const NerScore&, const NerScore&) = default;
};

/// Throws DataError when any two spans overlap. Returns the spans sorted by start.
inline std::vector<EntitySpan> check_non_overlapping(std::vector<EntitySpan> spans, std::string_view what = "spans") {
    std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
        return a.start != b.start ? a.start < b.start : a.end < b.end;
    });
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (spans[i].start >= spans[i].end) throw DataError(std::string(what) + ": empty or inverted span");
        if (i > 0 && spans[i].start < spans[i - 1].end)
            throw DataError(std::string(what) + ": overlapping spans [" + std::to_string(spans[i - 1].start) + "," +
                            std::to_string(spans[i - 1].end) + ") and [" + std::to_string(spans[i].start) + "," +
                            std::to_string(spans[i].end) + ")");
    }
    return spans;
}

/// Exact-match scoring for one tweet: a prediction counts only if start, end
/// and type all equal a gold span.
inline NerScore score_exact(const std::vector<EntitySpan>& gold, const std::vector<EntitySpan>& predicted) {
    const auto g = check_non_overlapping(gold, "gold");
    const auto p = check_non_overlapping(predicted, "predicted");
    NerScore s;
    for (const auto& span : p) s.tp += std::find(g.begin(), g.end(), span) != g.end();
    s.fp = p.size() - s.tp;
    s.fn = g.size() - s.tp;
    return s;
}

/// Tweet id -> spans.
using Annotations = std::map<std::string, std::vector<EntitySpan>>;

/// Lines `tweet_id<TAB>start<TAB>end<TAB>TYPE`. Ids must exist in `ds`; when
/// the tweet text is available, bounds are checked and surfaces filled in.
inline Annotations parse_annotations(std::string_view content, const Dataset& ds) {
    std::map<std::string_view, const Tweet*> by_id;
    for (const auto& t : ds.tweets()) by_id[t.id] = &t;

    Annotations ann;
    std::istringstream in{std::string(content)};
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const std::string where = "annotation line " + std::to_string(line_no);
        std::vector<std::string> f;
        std::size_t pos = 0;
        for (;;) {
            const auto tab = line.find('\t', pos);
            f.push_back(line.substr(pos, tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (f.size() != 4) throw DataError(where + ": expected 4 tab-separated fields");
        const auto it = by_id.find(f[0]);
        if (it == by_id.end()) throw DataError(where + ": unknown tweet id '" + f[0] + "'");
        EntitySpan span;
        try {
            std::size_t a = 0, b = 0;
            const long long s = std::stoll(f[1], &a), e = std::stoll(f[2], &b);
            if (a != f[1].size() || b != f[2].size() || s < 0 || e < 0) throw std::invalid_argument("offset");
            span.start = static_cast<std::size_t>(s);
            span.end = static_cast<std::size_t>(e);
        } catch (const std::exception&) {
            throw DataError(where + ": offsets must be non-negative integers");
        }
        if (span.start >= span.end) throw DataError(where + ": start must be less than end");
        const auto type = parse_entity_type(f[3]);
        if (!type) throw DataError(where + ": unknown entity type '" + f[3] + "'");
        span.etype = *type;
        const Tweet& tw = *it->second;
        if (!tw.text.empty()) {
            const auto cps = unicode::decode(tw.text);
            if (span.end > cps.size())
                throw DataError(where + ": span [" + f[1] + "," + f[2] + ") exceeds tweet length " + std::to_string(cps.size()));
            span.surface = tw.text.substr(cps[span.start].byte_begin, cps[span.end - 1].byte_end - cps[span.start].byte_begin);
        }
        ann[f[0]].push_back(std::move(span));
    }
    for (auto& [id, spans] : ann) spans = check_non_overlapping(std::move(spans), "annotations for tweet '" + id + "'");
    return ann;
}

inline Annotations load_annotations(const std::string& path, const Dataset& ds) {
    try {
        return parse_annotations(detail::read_file(path), ds);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline std::string serialize_annotations(const Annotations& ann, const Dataset& ds) {
    std::string out;
    for (const auto& t : ds.tweets()) {
        auto it = ann.find(t.id);
        if (it == ann.end()) continue;
        for (const auto& s : it->second) {
            out += t.id + "\t" + std::to_string(s.start) + "\t" + std::to_string(s.end) + "\t";
            out += to_token(s.etype);
            out += '\n';
        }
    }
    return out;
}

/// Runs the recognizer over every tweet with text.
inline Annotations recognize_dataset(const Dataset& ds, const Gazetteer& gaz, const RecognizerOptions& opt = {}) {
    Annotations ann;
    for (const auto& t : ds.tweets()) {
        auto spans = recognize(t.text, gaz, opt);
        if (!spans.empty()) ann[t.id] = std::move(spans);
    }
    return ann;
}

/// Scores per (target, stance) cell plus the micro-pooled overall score.
struct NerEvaluation {
    std::array<std::array<NerScore, 2>, 2> cells{};  // [target][stance]
    NerScore overall;
};

inline NerEvaluation evaluate_ner(const Dataset& ds, const Annotations& gold, const Annotations& predicted) {
    static const std::vector<EntitySpan> none;
    NerEvaluation ev;
    for (const auto& t : ds.tweets()) {
        const auto g = gold.find(t.id);
        const auto p = predicted.find(t.id);
        const auto s = score_exact(g == gold.end() ? none : g->second, p == predicted.end() ? none : p->second);
        ev.cells[index_of(t.target)][index_of(t.label_a)] += s;
        ev.overall += s;
    }
    return ev;
}

// ---------------------------------------------------------------------------
// Statistics

struct NeStatistics {
    std::array<std::array<std::array<std::size_t, 3>, 2>, 2> counts{};  // [target][stance][etype]
    std::array<std::array<std::size_t, 2>, 2> tweets{};                 // [target][stance]

    std::size_t cell_total(TargetId t, StanceLabel s) const {
        const auto& c = counts[index_of(t)][index_of(s)];
        return c[0] + c[1] + c[2];
    }
    std::size_t type_total(EntityType e) const {
        std::size_t n = 0;
        for (const auto& t : counts)
            for (const auto& s : t) n += s[index_of(e)];
        return n;
    }
    std::size_t total() const {
        std::size_t n = 0;
        for (auto e : kEntityTypes) n += type_total(e);
        return n;
    }
    std::size_t tweet_total() const {
        return tweets[0][0] + tweets[0][1] + tweets[1][0] + tweets[1][1];
    }
};

/// Entity counts by (target, stance, type); stance is the first annotator's label.
inline NeStatistics ne_statistics(const Dataset& ds, const Annotations& gold) {
    NeStatistics st;
    for (const auto& t : ds.tweets()) {
        const auto ti = index_of(t.target), si = index_of(t.label_a);
        ++st.tweets[ti][si];
        auto it = gold.find(t.id);
        if (it == gold.end()) continue;
        for (const auto& span : it->second) ++st.counts[ti][si][index_of(span.etype)];
    }
    return st;
}

/// Manifest keys `ne.TARGET1.FAVOR.ORG=207` etc. plus `ne.total`, `ne.PER`, `ne.LOC`, `ne.ORG`.
inline void validate_ne_counts(const NeStatistics& st, const Manifest& m) {
    const auto check = [&](const std::string& key, std::size_t actual) {
        const auto declared = m.get_count(key);
        if (declared && *declared != actual)
            throw DataError("manifest declares " + key + "=" + std::to_string(*declared) + " but annotation has " + std::to_string(actual));
    };
    for (auto t : kTargets)
        for (auto s : kStanceLabels)
            for (auto e : kEntityTypes)
                check("ne." + std::string(to_token(t)) + "." + std::string(to_token(s)) + "." + std::string(to_token(e)),
                      st.counts[index_of(t)][index_of(s)][index_of(e)]);
    for (auto e : kEntityTypes) check("ne." + std::string(to_token(e)), st.type_total(e));
    check("ne.total", st.total());
}

}  // namespace stance
