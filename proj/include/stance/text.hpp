#pragma once

// Tweet tokenization with Turkish-aware case folding.

#include <algorithm>
#include <cstddef>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stance/corpus.hpp"
#include "stance/error.hpp"
#include "stance/unicode.hpp"

namespace stance {

/// Turkish lowercasing: I -> ı, İ -> i (also the decomposed I + U+0307), the
/// rest via the plain lowercase mapping.
inline std::string fold_case(std::string_view surface) {
    const auto cps = unicode::decode(surface);
    std::string out;
    out.reserve(surface.size());
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t c = cps[i].value;
        if (c == U'I' && i + 1 < cps.size() && cps[i + 1].value == 0x307) {
            out += 'i';
            ++i;
            continue;
        }
        unicode::append(out, unicode::to_lower_turkish(c));
    }
    return out;
}

enum class TokenKind { Word, Hashtag, Mention, Url, Emoticon, Punct };

inline std::string_view to_string(TokenKind k) {
    switch (k) {
        case TokenKind::Word: return "Word";
        case TokenKind::Hashtag: return "Hashtag";
        case TokenKind::Mention: return "Mention";
        case TokenKind::Url: return "Url";
        case TokenKind::Emoticon: return "Emoticon";
        case TokenKind::Punct: return "Punct";
    }
    return "?";
}

/// Half-open range of code point offsets.
struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct Token {
    std::string surface;
    std::string folded;
    TokenKind kind = TokenKind::Punct;
    CharSpan span;
    std::size_t byte_begin = 0;
    std::size_t byte_end = 0;
};

class EmoticonLexicon {
public:
    EmoticonLexicon() = default;

    EmoticonLexicon(std::set<std::string> positive, std::set<std::string> negative)
        : positive_(std::move(positive)), negative_(std::move(negative)) {
        for (const auto& e : positive_) {
            if (e.empty()) throw DataError("empty emoticon entry");
            if (negative_.count(e)) throw DataError("emoticon '" + e + "' listed as both POS and NEG");
        }
        for (const auto& e : negative_)
            if (e.empty()) throw DataError("empty emoticon entry");
        for (const auto& e : positive_) patterns_.push_back(unicode::to_u32(e));
        for (const auto& e : negative_) patterns_.push_back(unicode::to_u32(e));
        std::sort(patterns_.begin(), patterns_.end(),
                  [](const auto& a, const auto& b) { return a.size() != b.size() ? a.size() > b.size() : a < b; });
    }

    /// Lines `POS<TAB>token` or `NEG<TAB>token`; blank lines and `#` comments skipped.
    static EmoticonLexicon parse(std::string_view content) {
        std::set<std::string> pos, neg;
        std::istringstream in{std::string(content)};
        std::size_t line_no = 0;
        for (std::string line; std::getline(in, line);) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw DataError("emoticon lexicon line " + std::to_string(line_no) + ": expected POS<TAB>token or NEG<TAB>token");
            const auto polarity = line.substr(0, tab);
            auto token = line.substr(tab + 1);
            if (polarity == "POS") pos.insert(std::move(token));
            else if (polarity == "NEG") neg.insert(std::move(token));
            else throw DataError("emoticon lexicon line " + std::to_string(line_no) + ": unknown polarity '" + polarity + "'");
        }
        return EmoticonLexicon(std::move(pos), std::move(neg));
    }

    static EmoticonLexicon load(const std::string& path) { return parse(detail::read_file(path)); }

    /// Built-in seed lexicon.
    static EmoticonLexicon defaults() {
        return EmoticonLexicon({":)", ":D", "<3", ":-)", ":-D", ";)", ";-)", "=)", ":P", "^^", "xD", "XD"},
                               {":(", ":\\", ":-(", ":/", ":'(", ">:(", ":S", "-_-"});
    }

    const std::set<std::string>& positive() const { return positive_; }
    const std::set<std::string>& negative() const { return negative_; }
    bool is_positive(std::string_view s) const { return positive_.count(std::string(s)) > 0; }
    bool is_negative(std::string_view s) const { return negative_.count(std::string(s)) > 0; }

    /// All entries as code point sequences, longest first.
    const std::vector<std::u32string>& patterns() const { return patterns_; }

private:
    std::set<std::string> positive_;
    std::set<std::string> negative_;
    std::vector<std::u32string> patterns_;
};

namespace detail {

inline bool starts_with_ci(const std::vector<unicode::CodePoint>& cps, std::size_t pos, std::u32string_view prefix) {
    if (pos + prefix.size() > cps.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
        char32_t c = cps[pos + k].value;
        if (c >= U'A' && c <= U'Z') c += 32;
        if (c != prefix[k]) return false;
    }
    return true;
}

inline std::size_t match_url(const std::vector<unicode::CodePoint>& cps, std::size_t pos) {
    for (std::u32string_view prefix : {std::u32string_view(U"https://"), std::u32string_view(U"http://"),
                                       std::u32string_view(U"www.")}) {
        if (!starts_with_ci(cps, pos, prefix)) continue;
        std::size_t end = pos + prefix.size();
        if (end >= cps.size() || unicode::is_space(cps[end].value)) return 0;
        while (end < cps.size() && !unicode::is_space(cps[end].value)) ++end;
        return end - pos;
    }
    return 0;
}

inline std::size_t match_emoticon(const std::vector<unicode::CodePoint>& cps, std::size_t pos,
                                  const EmoticonLexicon& lex) {
    for (const auto& p : lex.patterns()) {
        if (pos + p.size() > cps.size()) continue;
        bool eq = true;
        for (std::size_t k = 0; eq && k < p.size(); ++k) eq = cps[pos + k].value == p[k];
        if (!eq) continue;
        // An emoticon must not run into a following word character (":Dx" is not ":D").
        const std::size_t end = pos + p.size();
        if (end < cps.size() && unicode::is_word_char(cps[end].value)) continue;
        return p.size();
    }
    return 0;
}

inline std::size_t word_run(const std::vector<unicode::CodePoint>& cps, std::size_t pos) {
    std::size_t end = pos;
    while (end < cps.size() && unicode::is_word_char(cps[end].value)) ++end;
    return end - pos;
}

/// A word: word characters, optionally joined by apostrophes followed by more
/// word characters (Turkish suffixes on proper names: Galatasaray'ı).
inline std::size_t match_word(const std::vector<unicode::CodePoint>& cps, std::size_t pos) {
    std::size_t end = pos + word_run(cps, pos);
    if (end == pos) return 0;
    while (end + 1 < cps.size() && unicode::is_apostrophe(cps[end].value) && unicode::is_word_char(cps[end + 1].value))
        end += 1 + word_run(cps, end + 1);
    return end - pos;
}

}  // namespace detail

/// Rule-based tokenizer. Recognition precedence at each position:
/// URL > emoticon > hashtag > mention > word > single punctuation symbol.
/// Whitespace separates tokens and is never part of one.
inline std::vector<Token> tokenize(std::string_view text, const EmoticonLexicon& lex) {
    const auto cps = unicode::decode(text);
    std::vector<Token> tokens;
    std::size_t pos = 0;
    while (pos < cps.size()) {
        if (unicode::is_space(cps[pos].value)) {
            ++pos;
            continue;
        }
        std::size_t len = 0;
        TokenKind kind = TokenKind::Punct;
        if ((len = detail::match_url(cps, pos)) > 0) {
            kind = TokenKind::Url;
        } else if ((len = detail::match_emoticon(cps, pos, lex)) > 0) {
            kind = TokenKind::Emoticon;
        } else if (cps[pos].value == U'#' && (len = detail::word_run(cps, pos + 1)) > 0) {
            kind = TokenKind::Hashtag;
            len += 1;
        } else if (cps[pos].value == U'@' && (len = detail::word_run(cps, pos + 1)) > 0) {
            kind = TokenKind::Mention;
            len += 1;
        } else if ((len = detail::match_word(cps, pos)) > 0) {
            kind = TokenKind::Word;
        } else {
            len = 1;
            kind = TokenKind::Punct;
        }
        Token t;
        t.kind = kind;
        t.span = {pos, pos + len};
        t.byte_begin = cps[pos].byte_begin;
        t.byte_end = cps[pos + len - 1].byte_end;
        t.surface = std::string(text.substr(t.byte_begin, t.byte_end - t.byte_begin));
        t.folded = fold_case(t.surface);
        tokens.push_back(std::move(t));
        pos += len;
    }
    return tokens;
}

inline std::vector<Token> tokenize(std::string_view text) {
    static const EmoticonLexicon lex = EmoticonLexicon::defaults();
    return tokenize(text, lex);
}

class StopwordList {
public:
    StopwordList() = default;

    template <class Range>
    explicit StopwordList(const Range& words) {
        for (const auto& w : words) entries_.insert(fold_case(w));
    }

    StopwordList(std::initializer_list<std::string_view> words) {
        for (auto w : words) entries_.insert(fold_case(w));
    }

    /// One entry per line; `#` starts a comment line. Entries are case-folded on load.
    static StopwordList parse(std::string_view content) {
        std::vector<std::string> words;
        std::istringstream in{std::string(content)};
        for (std::string line; std::getline(in, line);) {
            const auto s = detail::trim(line);
            if (s.empty() || s.front() == '#') continue;
            words.emplace_back(s);
        }
        return StopwordList(words);
    }

    static StopwordList load(const std::string& path) { return parse(detail::read_file(path)); }

    bool contains(std::string_view folded) const { return entries_.count(std::string(folded)) > 0; }
    const std::set<std::string>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

private:
    std::set<std::string> entries_;
};

/// Drops Word tokens whose folded form is a stopword. Other kinds always survive.
inline std::vector<Token> remove_stopwords(const std::vector<Token>& tokens, const StopwordList& stops) {
    std::vector<Token> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
        if (t.kind != TokenKind::Word || !stops.contains(t.folded)) out.push_back(t);
    return out;
}

struct TweetFlags {
    bool has_hashtag = false;
    bool has_link = false;
    bool has_pos_emoticon = false;
    bool has_neg_emoticon = false;
    friend bool operator==(const TweetFlags&, const TweetFlags&) = default;
};

inline TweetFlags detect_flags(const std::vector<Token>& tokens, const EmoticonLexicon& lex) {
    TweetFlags f;
    for (const auto& t : tokens) {
        switch (t.kind) {
            case TokenKind::Hashtag: f.has_hashtag = true; break;
            case TokenKind::Url: f.has_link = true; break;
            case TokenKind::Emoticon:
                f.has_pos_emoticon = f.has_pos_emoticon || lex.is_positive(t.surface);
                f.has_neg_emoticon = f.has_neg_emoticon || lex.is_negative(t.surface);
                break;
            default: break;
        }
    }
    return f;
}

}  // namespace stance
