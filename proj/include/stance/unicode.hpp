#pragma once

// Minimal UTF-8 and code point utilities. Covers the scripts that show up in
// Turkish social-media text (Latin incl. extended blocks, Greek, Cyrillic);
// everything else is treated as a symbol.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stance::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

/// One decoded code point together with the byte range it came from.
struct CodePoint {
    char32_t value;
    std::size_t byte_begin;
    std::size_t byte_end;
};

/// Lenient decoder: every invalid byte becomes U+FFFD covering exactly that
/// byte, so byte ranges always tile the input.
inline std::vector<CodePoint> decode(std::string_view s) {
    std::vector<CodePoint> out;
    out.reserve(s.size());
    std::size_t i = 0;
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    while (i < s.size()) {
        const unsigned char c = byte(i);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        }
        bool ok = len != 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            if ((byte(i + k) & 0xC0) != 0x80) ok = false;
            else cp = (cp << 6) | (byte(i + k) & 0x3F);
        }
        if (ok) {
            // Reject overlong forms, surrogates and out-of-range values.
            static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
            if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) ok = false;
        }
        if (!ok) {
            out.push_back({kReplacement, i, i + 1});
            ++i;
            continue;
        }
        out.push_back({cp, i, i + len});
        i += len;
    }
    return out;
}

inline bool is_valid_utf8(std::string_view s) {
    for (const auto& cp : decode(s)) {
        if (cp.value == kReplacement && cp.byte_end - cp.byte_begin == 1 &&
            static_cast<unsigned char>(s[cp.byte_begin]) >= 0x80)
            return false;
    }
    return true;
}

inline void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append(out, cp);
    return out;
}

inline std::u32string to_u32(std::string_view s) {
    std::u32string out;
    for (const auto& cp : decode(s)) out.push_back(cp.value);
    return out;
}

/// Number of code points.
inline std::size_t length(std::string_view s) { return decode(s).size(); }

inline bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
           c == 0x85 || c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
           c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

inline bool is_combining_mark(char32_t c) { return c >= 0x300 && c <= 0x36F; }

inline bool is_letter(char32_t c) {
    if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
    if (c >= 0xC0 && c <= 0x24F) return c != 0xD7 && c != 0xF7;
    if (c >= 0x370 && c <= 0x3FF) return c != 0x37E && c != 0x387;
    if (c >= 0x400 && c <= 0x52F) return !(c >= 0x482 && c <= 0x489);
    return c >= 0x1E00 && c <= 0x1EFF;
}

inline bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

/// Characters that may appear inside a word, hashtag or mention body.
inline bool is_word_char(char32_t c) {
    return is_letter(c) || is_digit(c) || c == U'_' || is_combining_mark(c);
}

inline bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

/// Locale-neutral lowercase mapping of a single code point. Turkish dotted
/// and dotless I are handled by the callers that know about them.
inline char32_t to_lower_simple(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 32;
    if (c < 0xC0) return c;
    if (c <= 0xDE) return c == 0xD7 ? c : c + 32;
    if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
    if (c == 0x178) return 0xFF;
    if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 32;
    if (c >= 0x410 && c <= 0x42F) return c + 32;
    if (c >= 0x400 && c <= 0x40F) return c + 80;
    if (c >= 0x460 && c <= 0x481) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x48A && c <= 0x4BF) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x4D0 && c <= 0x52F) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x1E00 && c <= 0x1E95) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x1EA0 && c <= 0x1EFF) return (c % 2 == 0) ? c + 1 : c;
    return c;
}

/// Turkish lowercase of one code point: I -> ı, İ -> i.
inline char32_t to_lower_turkish(char32_t c) {
    if (c == U'I') return 0x131;
    if (c == 0x130) return U'i';
    return to_lower_simple(c);
}

inline bool is_upper(char32_t c) {
    return c == U'I' || c == 0x130 || to_lower_simple(c) != c;
}

}  // namespace stance::unicode
