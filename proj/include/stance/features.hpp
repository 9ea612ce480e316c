#pragma once

// Feature extraction: binary bag-of-n-grams, tweet-level flags and named
// entity surfaces, indexed by a vocabulary built from training tweets only.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stance/corpus.hpp"
#include "stance/error.hpp"
#include "stance/ner.hpp"
#include "stance/sparse.hpp"
#include "stance/text.hpp"

namespace stance {

enum class NeSource { Gold, Auto };

inline std::string_view to_string(NeSource s) { return s == NeSource::Gold ? "gold" : "auto"; }

inline NeSource parse_ne_source(std::string_view s) {
    if (s == "gold") return NeSource::Gold;
    if (s == "auto") return NeSource::Auto;
    throw PreconditionError("unknown named-entity source '" + std::string(s) + "' (expected gold or auto)");
}

struct FeatureConfig {
    bool use_unigrams = true;
    bool use_bigrams = false;
    bool use_hashtag_flag = false;
    bool use_link_flag = false;
    bool use_pos_emoticon_flag = false;
    bool use_neg_emoticon_flag = false;
    bool use_named_entities = false;
    NeSource ne_source = NeSource::Gold;
    std::size_t min_term_freq = 1;
    bool case_fold = true;

    bool any_enabled() const {
        return use_unigrams || use_bigrams || use_hashtag_flag || use_link_flag || use_pos_emoticon_flag ||
               use_neg_emoticon_flag || use_named_entities;
    }

    void validate() const {
        if (!any_enabled()) throw PreconditionError("at least one feature family must be enabled");
        if (min_term_freq == 0) throw PreconditionError("min_term_freq must be at least 1");
    }

    /// Comma list over {unigram,bigram,hashtag,link,emo-pos,emo-neg,ne}.
    static FeatureConfig parse_families(std::string_view list) {
        FeatureConfig cfg;
        cfg.use_unigrams = false;
        std::size_t pos = 0;
        while (pos <= list.size()) {
            auto comma = list.find(',', pos);
            if (comma == std::string_view::npos) comma = list.size();
            const auto name = detail::trim(list.substr(pos, comma - pos));
            if (name == "unigram") cfg.use_unigrams = true;
            else if (name == "bigram") cfg.use_bigrams = true;
            else if (name == "hashtag") cfg.use_hashtag_flag = true;
            else if (name == "link") cfg.use_link_flag = true;
            else if (name == "emo-pos") cfg.use_pos_emoticon_flag = true;
            else if (name == "emo-neg") cfg.use_neg_emoticon_flag = true;
            else if (name == "ne") cfg.use_named_entities = true;
            else throw PreconditionError("unknown feature family '" + std::string(name) + "'");
            pos = comma + 1;
        }
        cfg.validate();
        return cfg;
    }

    std::string families() const {
        std::string out;
        const auto add = [&](bool on, std::string_view name) {
            if (!on) return;
            if (!out.empty()) out += ',';
            out += name;
        };
        add(use_unigrams, "unigram");
        add(use_bigrams, "bigram");
        add(use_hashtag_flag, "hashtag");
        add(use_link_flag, "link");
        add(use_pos_emoticon_flag, "emo-pos");
        add(use_neg_emoticon_flag, "emo-neg");
        add(use_named_entities, "ne");
        return out;
    }
};

/// Everything preprocessing needs besides the tweet itself.
struct FeatureResources {
    StopwordList stopwords;
    EmoticonLexicon emoticons = EmoticonLexicon::defaults();
    std::optional<Gazetteer> gazetteer;       // required for NeSource::Auto
    RecognizerOptions recognizer;
    std::optional<Annotations> gold_entities;  // required for NeSource::Gold
};

/// A tweet reduced to the inputs of feature extraction.
struct PreprocessedTweet {
    std::string id;
    StanceLabel label = StanceLabel::Favor;
    std::vector<std::string> words;  // Word tokens after stopword removal, folded unless case folding is off
    TweetFlags flags;
    std::vector<std::string> entities;  // folded entity surfaces, unique
};

/// Folded surface of each span, duplicates collapsed, first-occurrence order.
inline std::vector<std::string> ne_terms(const Tweet& tweet, const std::vector<EntitySpan>& spans) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    const auto cps = unicode::decode(tweet.text);
    for (const auto& s : spans) {
        if (s.start >= s.end || s.end > cps.size())
            throw PreconditionError("entity span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                                    ") out of bounds for tweet '" + tweet.id + "'");
        auto term = fold_case(std::string_view(tweet.text).substr(
            cps[s.start].byte_begin, cps[s.end - 1].byte_end - cps[s.start].byte_begin));
        if (seen.insert(term).second) out.push_back(std::move(term));
    }
    return out;
}

/// Same as preprocess() but accepts empty text (yields no words or flags).
inline PreprocessedTweet preprocess_unchecked(const Tweet& tweet, const FeatureConfig& cfg, const FeatureResources& res) {
    PreprocessedTweet pt;
    pt.id = tweet.id;
    pt.label = tweet.label_a;
    const auto tokens = remove_stopwords(tokenize(tweet.text, res.emoticons), res.stopwords);
    for (const auto& t : tokens)
        if (t.kind == TokenKind::Word) pt.words.push_back(cfg.case_fold ? t.folded : t.surface);
    pt.flags = detect_flags(tokens, res.emoticons);
    if (cfg.use_named_entities) {
        if (cfg.ne_source == NeSource::Gold) {
            if (!res.gold_entities) throw PreconditionError("gold named entities requested but no annotation file given");
            auto it = res.gold_entities->find(tweet.id);
            if (it != res.gold_entities->end()) pt.entities = ne_terms(tweet, it->second);
        } else {
            if (!res.gazetteer) throw PreconditionError("automatic named entities requested but no gazetteer given");
            pt.entities = ne_terms(tweet, recognize(tweet.text, *res.gazetteer, res.recognizer));
        }
    }
    return pt;
}

/// Preprocesses a tweet for classification. Tweets without text are rejected.
inline PreprocessedTweet preprocess(const Tweet& tweet, const FeatureConfig& cfg, const FeatureResources& res) {
    if (detail::trim(tweet.text).empty())
        throw DataError("tweet '" + tweet.id + "' has no text; classification needs tweet text");
    return preprocess_unchecked(tweet, cfg, res);
}

enum class Family { Unigram, Bigram, NamedEntity, Flag };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::Unigram: return "unigram";
        case Family::Bigram: return "bigram";
        case Family::NamedEntity: return "ne";
        case Family::Flag: return "flag";
    }
    return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
    if (s == "unigram") return Family::Unigram;
    if (s == "bigram") return Family::Bigram;
    if (s == "ne") return Family::NamedEntity;
    if (s == "flag") return Family::Flag;
    return std::nullopt;
}

enum class Flag { Hashtag, Link, PosEmoticon, NegEmoticon };

inline constexpr std::array<Flag, 4> kFlags = {Flag::Hashtag, Flag::Link, Flag::PosEmoticon, Flag::NegEmoticon};

inline std::string_view to_string(Flag f) {
    switch (f) {
        case Flag::Hashtag: return "hashtag";
        case Flag::Link: return "link";
        case Flag::PosEmoticon: return "emo-pos";
        case Flag::NegEmoticon: return "emo-neg";
    }
    return "?";
}

inline bool flag_enabled(const FeatureConfig& cfg, Flag f) {
    switch (f) {
        case Flag::Hashtag: return cfg.use_hashtag_flag;
        case Flag::Link: return cfg.use_link_flag;
        case Flag::PosEmoticon: return cfg.use_pos_emoticon_flag;
        case Flag::NegEmoticon: return cfg.use_neg_emoticon_flag;
    }
    return false;
}

inline bool flag_value(const TweetFlags& t, Flag f) {
    switch (f) {
        case Flag::Hashtag: return t.has_hashtag;
        case Flag::Link: return t.has_link;
        case Flag::PosEmoticon: return t.has_pos_emoticon;
        case Flag::NegEmoticon: return t.has_neg_emoticon;
    }
    return false;
}

inline std::vector<std::string> bigrams(const std::vector<std::string>& words) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i < words.size(); ++i) out.push_back(words[i - 1] + "_" + words[i]);
    return out;
}

/// Dense 0-based index over textual terms (unigram, bigram, named entity, in
/// that order, each block sorted lexicographically), followed by one reserved
/// index per enabled flag.
class Vocabulary {
public:
    Vocabulary() = default;

    Vocabulary(std::array<std::vector<std::string>, 3> terms, std::vector<Flag> flags)
        : terms_(std::move(terms)), flags_(std::move(flags)) {
        std::size_t next = 0;
        for (std::size_t f = 0; f < 3; ++f) {
            offsets_[f] = next;
            for (const auto& t : terms_[f]) {
                if (!index_[f].emplace(t, next).second) throw DataError("duplicate vocabulary term '" + t + "'");
                ++next;
            }
        }
        text_size_ = next;
    }

    /// Number of textual terms.
    std::size_t size() const { return text_size_; }
    /// Textual terms plus reserved flag indices.
    std::size_t dimension() const { return text_size_ + flags_.size(); }

    std::optional<std::size_t> index(Family fam, std::string_view term) const {
        if (fam == Family::Flag) {
            for (std::size_t k = 0; k < flags_.size(); ++k)
                if (to_string(flags_[k]) == term) return text_size_ + k;
            return std::nullopt;
        }
        const auto& m = index_[static_cast<std::size_t>(fam)];
        auto it = m.find(std::string(term));
        if (it == m.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> flag_index(Flag f) const {
        for (std::size_t k = 0; k < flags_.size(); ++k)
            if (flags_[k] == f) return text_size_ + k;
        return std::nullopt;
    }

    /// (family, term) behind an index.
    std::pair<Family, std::string> describe(std::size_t index) const {
        if (index >= dimension()) throw PreconditionError("vocabulary index out of range");
        if (index >= text_size_) return {Family::Flag, std::string(to_string(flags_[index - text_size_]))};
        for (std::size_t f = 3; f-- > 0;)
            if (index >= offsets_[f] && !terms_[f].empty() && index - offsets_[f] < terms_[f].size())
                return {static_cast<Family>(f), terms_[f][index - offsets_[f]]};
        throw PreconditionError("vocabulary index out of range");
    }

    const std::vector<std::string>& terms(Family fam) const { return terms_.at(static_cast<std::size_t>(fam)); }
    const std::vector<Flag>& flags() const { return flags_; }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.terms_ == b.terms_ && a.flags_ == b.flags_;
    }

private:
    std::array<std::vector<std::string>, 3> terms_;
    std::array<std::map<std::string, std::size_t>, 3> index_;
    std::array<std::size_t, 3> offsets_{};
    std::vector<Flag> flags_;
    std::size_t text_size_ = 0;
};

inline Vocabulary build_vocabulary(std::span<const PreprocessedTweet> train, const FeatureConfig& cfg) {
    cfg.validate();
    if (train.empty()) throw PreconditionError("cannot build a vocabulary from an empty training set");
    std::array<std::map<std::string, std::size_t>, 3> freq;
    for (const auto& t : train) {
        if (cfg.use_unigrams)
            for (const auto& w : t.words) ++freq[0][w];
        if (cfg.use_bigrams)
            for (auto& b : bigrams(t.words)) ++freq[1][std::move(b)];
        if (cfg.use_named_entities)
            for (const auto& e : t.entities) ++freq[2][e];
    }
    std::array<std::vector<std::string>, 3> terms;
    for (std::size_t f = 0; f < 3; ++f)
        for (const auto& [term, n] : freq[f])
            if (n >= cfg.min_term_freq) terms[f].push_back(term);
    std::vector<Flag> flags;
    for (auto f : kFlags)
        if (flag_enabled(cfg, f)) flags.push_back(f);
    return Vocabulary(std::move(terms), std::move(flags));
}

/// Binary presence vector; out-of-vocabulary terms are ignored.
inline SparseVector vectorize(const PreprocessedTweet& t, const Vocabulary& vocab, const FeatureConfig& cfg) {
    std::set<std::size_t> on;
    const auto add = [&](Family fam, std::string_view term) {
        if (auto i = vocab.index(fam, term)) on.insert(*i);
    };
    if (cfg.use_unigrams)
        for (const auto& w : t.words) add(Family::Unigram, w);
    if (cfg.use_bigrams)
        for (const auto& b : bigrams(t.words)) add(Family::Bigram, b);
    if (cfg.use_named_entities)
        for (const auto& e : t.entities) add(Family::NamedEntity, e);
    for (auto f : kFlags)
        if (flag_enabled(cfg, f) && flag_value(t.flags, f))
            if (auto i = vocab.flag_index(f)) on.insert(*i);
    std::vector<SparseVector::Entry> entries;
    entries.reserve(on.size());
    for (auto i : on) entries.emplace_back(i, 1.0);
    return SparseVector(std::move(entries));
}

// ---------------------------------------------------------------------------
// Vocabulary file: `#stance-vocab 1` header, `#key=value` config lines, then
// `family<TAB>term<TAB>index` lines.

inline constexpr std::string_view kVocabMagic = "#stance-vocab";
inline constexpr int kVocabVersion = 1;

inline std::string dump_vocabulary(const Vocabulary& v, const FeatureConfig& cfg) {
    std::ostringstream out;
    out << kVocabMagic << ' ' << kVocabVersion << '\n';
    out << "#features=" << cfg.families() << '\n';
    out << "#ne-source=" << to_string(cfg.ne_source) << '\n';
    out << "#case-fold=" << (cfg.case_fold ? 1 : 0) << '\n';
    out << "#min-term-freq=" << cfg.min_term_freq << '\n';
    for (std::size_t i = 0; i < v.dimension(); ++i) {
        const auto [fam, term] = v.describe(i);
        out << to_string(fam) << '\t' << term << '\t' << i << '\n';
    }
    return out.str();
}

struct VocabularyFile {
    Vocabulary vocabulary;
    FeatureConfig config;
};

inline VocabularyFile parse_vocabulary(std::string_view content) {
    std::istringstream in{std::string(content)};
    std::string line;
    const std::string expected = std::string(kVocabMagic) + " " + std::to_string(kVocabVersion);
    if (!std::getline(in, line) || line != expected)
        throw DataError("vocabulary file: bad header '" + line + "', expected '" + expected + "'");
    std::map<std::string, std::string> meta;
    std::array<std::vector<std::string>, 3> terms;
    std::vector<Flag> flags;
    std::size_t next = 0, line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) meta[line.substr(1, eq - 1)] = line.substr(eq + 1);
            continue;
        }
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) throw DataError("vocabulary line " + std::to_string(line_no) + ": expected family<TAB>term<TAB>index");
        const auto fam = parse_family(line.substr(0, t1));
        const auto term = line.substr(t1 + 1, t2 - t1 - 1);
        if (!fam) throw DataError("vocabulary line " + std::to_string(line_no) + ": unknown family");
        if (line.substr(t2 + 1) != std::to_string(next))
            throw DataError("vocabulary line " + std::to_string(line_no) + ": indices must be dense and ascending");
        ++next;
        if (*fam == Family::Flag) {
            bool found = false;
            for (auto f : kFlags)
                if (to_string(f) == term) flags.push_back(f), found = true;
            if (!found) throw DataError("vocabulary line " + std::to_string(line_no) + ": unknown flag '" + term + "'");
        } else {
            if (!flags.empty()) throw DataError("vocabulary line " + std::to_string(line_no) + ": term after flag block");
            auto& block = terms[static_cast<std::size_t>(*fam)];
            for (std::size_t later = static_cast<std::size_t>(*fam) + 1; later < 3; ++later)
                if (!terms[later].empty()) throw DataError("vocabulary line " + std::to_string(line_no) + ": families out of order");
            block.push_back(term);
        }
    }
    VocabularyFile vf;
    vf.config = FeatureConfig::parse_families(meta.count("features") ? meta["features"] : "");
    if (meta.count("ne-source")) vf.config.ne_source = parse_ne_source(meta["ne-source"]);
    if (meta.count("case-fold")) vf.config.case_fold = meta["case-fold"] != "0";
    if (meta.count("min-term-freq")) vf.config.min_term_freq = std::stoul(meta["min-term-freq"]);
    vf.vocabulary = Vocabulary(std::move(terms), std::move(flags));
    return vf;
}

}  // namespace stance
