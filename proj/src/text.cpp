#include "oaaudit/text.hpp"

#include <algorithm>
#include <cstdint>

namespace oa::text {

namespace {

constexpr char ascii_lower(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : static_cast<char>(c);
}

// Base letters for U+00C0..U+00FF; '.' marks pass-through or a multi-char
// expansion handled separately.
constexpr const char* kLatin1 =
    "aaaaaa.ceeeeiiii"
    "dnooooo.ouuuuy.."
    "aaaaaa.ceeeeiiii"
    "dnooooo.ouuuuy.y";

// Base letters for U+0100..U+017F.
constexpr const char* kLatinExtA =
    "aaaaaaccccccccdd"
    "ddeeeeeeeeeegggg"
    "gggghhhhiiiiiiii"
    "ii..jjkkklllllll"
    "lllnnnnnnnnnoooo"
    "oo..rrrrrrssssss"
    "ssttttttuuuuuuuu"
    "uuuuwwyyyzzzzzzs";

// Returns the ASCII replacement for a folded code point, or nullptr to pass
// the original bytes through.
const char* fold_map(char32_t cp) {
    switch (cp) {
        case 0x00AA: return "a"; // ordinal indicators, common in addresses
        case 0x00BA: return "o";
        case 0x00C6: case 0x00E6: return "ae";
        case 0x00DE: case 0x00FE: return "th";
        case 0x00DF: return "ss";
        case 0x0132: case 0x0133: return "ij";
        case 0x0152: case 0x0153: return "oe";
        default: break;
    }
    // One NUL-terminated entry per letter.
    static const char singles[] =
        "a\0b\0c\0d\0e\0f\0g\0h\0i\0j\0k\0l\0m\0n\0o\0p\0q\0r\0s\0t\0u\0v\0w\0x\0y\0z";
    if (cp >= 0x00C0 && cp <= 0x00FF) {
        char base = kLatin1[cp - 0x00C0];
        if (base == '.') return nullptr;
        return singles + 2 * (base - 'a');
    }
    if (cp >= 0x0100 && cp <= 0x017F) {
        char base = kLatinExtA[cp - 0x0100];
        if (base == '.') return nullptr;
        return singles + 2 * (base - 'a');
    }
    return nullptr;
}

constexpr bool is_cont(unsigned char b) { return (b & 0xC0) == 0x80; }

} // namespace

std::string fold(std::string_view utf8) {
    std::string out;
    out.reserve(utf8.size());
    const std::size_t n = utf8.size();
    std::size_t i = 0;
    while (i < n) {
        unsigned char b = static_cast<unsigned char>(utf8[i]);
        if (b < 0x80) {
            out.push_back(ascii_lower(b));
            ++i;
            continue;
        }
        char32_t cp = 0;
        std::size_t len = 0;
        if ((b & 0xE0) == 0xC0 && i + 1 < n && is_cont(utf8[i + 1])) {
            cp = (char32_t(b & 0x1F) << 6) | (utf8[i + 1] & 0x3F);
            len = 2;
        } else if ((b & 0xF0) == 0xE0 && i + 2 < n && is_cont(utf8[i + 1]) &&
                   is_cont(utf8[i + 2])) {
            cp = (char32_t(b & 0x0F) << 12) | (char32_t(utf8[i + 1] & 0x3F) << 6) |
                 (utf8[i + 2] & 0x3F);
            len = 3;
        } else if ((b & 0xF8) == 0xF0 && i + 3 < n && is_cont(utf8[i + 1]) &&
                   is_cont(utf8[i + 2]) && is_cont(utf8[i + 3])) {
            cp = (char32_t(b & 0x07) << 18) | (char32_t(utf8[i + 1] & 0x3F) << 12) |
                 (char32_t(utf8[i + 2] & 0x3F) << 6) | (utf8[i + 3] & 0x3F);
            len = 4;
        } else {
            // Invalid sequence: keep the byte, it will act as a separator.
            out.push_back(static_cast<char>(b));
            ++i;
            continue;
        }
        if (const char* rep = fold_map(cp)) {
            out += rep;
        } else {
            out.append(utf8.substr(i, len));
        }
        i += len;
    }
    return out;
}

bool is_token_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::vector<std::string> tokenize(std::string_view utf8) {
    std::string folded = fold(utf8);
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < folded.size()) {
        if (!is_token_char(folded[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < folded.size() && is_token_char(folded[i])) ++i;
        tokens.emplace_back(folded.substr(start, i - start));
    }
    return tokens;
}

std::string normalize_title(std::string_view title) {
    std::string folded = fold(title);
    std::string out;
    out.reserve(folded.size());
    bool pending_space = false;
    for (char c : folded) {
        if (c == '.') continue;
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    if (a.size() > b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(a.size() + 1), cur(a.size() + 1);
    for (std::size_t j = 0; j <= a.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= b.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= a.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[j - 1] == b[i - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[a.size()];
}

double similarity(std::string_view a, std::string_view b) {
    std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 0.0;
    return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

} // namespace oa::text
