#include "lokg/text.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <unordered_set>

namespace lokg {

std::u32string utf8_decode(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c >> 5) == 0x6) {
            len = 2;
        } else if ((c >> 4) == 0xE) {
            len = 3;
        } else if ((c >> 3) == 0x1E) {
            len = 4;
        }
        if (len > 1) {
            if (i + len > s.size()) {
                out.push_back(0xFFFD);
                ++i;
                continue;
            }
            cp = c & (0xFF >> (len + 1));
            bool ok = true;
            for (std::size_t k = 1; k < len; ++k) {
                const auto cc = static_cast<unsigned char>(s[i + k]);
                if ((cc >> 6) != 0x2) {
                    ok = false;
                    break;
                }
                cp = (cp << 6) | (cc & 0x3F);
            }
            if (!ok) {
                out.push_back(0xFFFD);
                ++i;
                continue;
            }
        } else if (c >= 0x80) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

void utf8_append(std::string& out, char32_t cp) {
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

std::string utf8_encode(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) utf8_append(out, cp);
    return out;
}

bool is_letter(char32_t cp) noexcept {
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
    if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
    return (cp >= 0x370 && cp <= 0x3FF && cp != 0x37E && cp != 0x387) || (cp >= 0x400 && cp <= 0x4FF);
}

bool is_digit(char32_t cp) noexcept { return cp >= '0' && cp <= '9'; }

bool is_space(char32_t cp) noexcept {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' || cp == 0xA0;
}

bool is_sentence_punct(char32_t cp) noexcept {
    switch (cp) {
        case '.': case ',': case ';': case ':': case '?': case '!': case '-':
            return true;
        default:
            return false;
    }
}

char32_t to_lower(char32_t cp) noexcept {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
    return cp;
}

std::string to_lower(std::string_view s) {
    auto cps = utf8_decode(s);
    for (auto& cp : cps) cp = to_lower(cp);
    return utf8_encode(cps);
}

std::size_t utf8_length(std::string_view s) { return utf8_decode(s).size(); }

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        char c = s[i];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
        if (c != prefix[i]) return false;
    }
    return true;
}

bool is_noise_token(std::string_view tok) {
    if (starts_with_ci(tok, "http://") || starts_with_ci(tok, "https://") || starts_with_ci(tok, "www.")) {
        return true;
    }
    const auto at = tok.find('@');
    return at != std::string_view::npos && at > 0 && tok.find('.', at) != std::string_view::npos;
}

// Drops tags, URLs and e-mail addresses; returns whitespace-separated text.
std::string strip_noise(std::string_view text) {
    std::string no_tags;
    no_tags.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '<' && i + 1 < text.size()) {
            const char n = text[i + 1];
            const bool tag_start = (n >= 'a' && n <= 'z') || (n >= 'A' && n <= 'Z') || n == '/' || n == '!';
            const auto close = text.find('>', i + 1);
            if (tag_start && close != std::string_view::npos) {
                no_tags.push_back(' ');
                i = close;
                continue;
            }
        }
        no_tags.push_back(text[i]);
    }

    std::string out;
    out.reserve(no_tags.size());
    std::size_t i = 0;
    while (i < no_tags.size()) {
        const auto ws = no_tags.find_first_of(" \t\r\n", i);
        const auto end = ws == std::string::npos ? no_tags.size() : ws;
        std::string_view tok(no_tags.data() + i, end - i);
        if (!is_noise_token(tok)) out.append(tok);
        if (ws == std::string::npos) break;
        out.push_back(no_tags[ws]);
        i = ws + 1;
    }
    return out;
}

bool is_apostrophe(char32_t cp) noexcept { return cp == '\'' || cp == 0x2019 || cp == '`' || cp == 0xB4; }

bool is_word_char(char32_t cp) noexcept { return is_letter(cp) || is_digit(cp); }

}  // namespace

std::string clean_text(std::string_view text) {
    const auto cps = utf8_decode(strip_noise(text));

    std::u32string mapped;
    mapped.reserve(cps.size());
    for (char32_t cp : cps) {
        if (is_apostrophe(cp)) continue;
        if (is_word_char(cp) || is_sentence_punct(cp)) {
            if (is_sentence_punct(cp) && !mapped.empty() && mapped.back() == cp) continue;
            mapped.push_back(cp);
        } else {
            mapped.push_back(U' ');
        }
    }

    // Collapse whitespace, drop spaces that precede closing punctuation.
    std::u32string out;
    out.reserve(mapped.size());
    bool pending_space = false;
    for (char32_t cp : mapped) {
        if (cp == U' ') {
            pending_space = true;
            continue;
        }
        const bool closing = is_sentence_punct(cp) && cp != U'-';
        if (pending_space && !out.empty() && !closing) out.push_back(U' ');
        pending_space = false;
        if (closing && !out.empty() && out.back() == cp) continue;
        out.push_back(cp);
    }
    return utf8_encode(out);
}

std::vector<Segment> segment_words(std::string_view cleaned) {
    const auto cps = utf8_decode(cleaned);
    std::vector<Segment> segments;
    Segment current;
    std::u32string word;

    auto flush_word = [&] {
        while (!word.empty() && word.back() == U'-') word.pop_back();
        if (!word.empty()) current.push_back(utf8_encode(word));
        word.clear();
    };
    auto flush_segment = [&] {
        flush_word();
        if (!current.empty()) segments.push_back(std::move(current));
        current.clear();
    };

    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t cp = cps[i];
        if (is_word_char(cp)) {
            word.push_back(to_lower(cp));
        } else if (cp == U'-' && !word.empty() && i + 1 < cps.size() && is_word_char(cps[i + 1])) {
            word.push_back(U'-');
        } else if (is_sentence_punct(cp)) {
            flush_segment();
        } else {
            flush_word();
        }
    }
    flush_segment();
    return segments;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
    std::vector<std::string> out;
    for (auto& seg : segment_words(cleaned)) {
        for (auto& w : seg) out.push_back(std::move(w));
    }
    return out;
}

namespace {

const std::unordered_set<std::string_view>& english_stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been",
        "before", "but", "by", "can", "could", "did", "do", "does", "each", "for", "from", "had",
        "has", "have", "he", "her", "here", "his", "how", "i", "if", "in", "into", "is", "it", "its",
        "more", "most", "my", "no", "not", "of", "on", "one", "only", "or", "other", "our", "out",
        "over", "she", "should", "so", "some", "such", "than", "that", "the", "their", "them",
        "then", "there", "these", "they", "this", "those", "through", "to", "under", "up", "very",
        "was", "we", "were", "what", "when", "where", "which", "while", "who", "why", "will",
        "with", "would", "you", "your",
    };
    return words;
}

const std::unordered_set<std::string_view>& german_stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "aber", "alle", "als", "am", "an", "auch", "auf", "aus", "bei", "bis", "da", "das", "dass",
        "dem", "den", "der", "des", "die", "dies", "diese", "diesem", "diesen", "dieser", "dieses",
        "doch", "durch", "ein", "eine", "einem", "einen", "einer", "eines", "er", "es", "für",
        "hat", "haben", "ich", "ihr", "ihre", "im", "in", "ist", "jede", "jeder", "kann", "können",
        "man", "mehr", "mit", "muss", "nach", "nicht", "noch", "nur", "oder", "ohne", "sehr",
        "sich", "sie", "sind", "so", "soll", "über", "um", "und", "uns", "unter", "vom", "von",
        "vor", "war", "was", "wenn", "werden", "wie", "wir", "wird", "zu", "zum", "zur", "zwischen",
    };
    return words;
}

}  // namespace

bool is_english_stopword(std::string_view w) { return english_stopwords().count(w) > 0; }
bool is_german_stopword(std::string_view w) { return german_stopwords().count(w) > 0; }
bool is_stopword(std::string_view w) { return is_english_stopword(w) || is_german_stopword(w); }

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::string> csv_split(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf.data(), buf.size(), "%.*g", precision, v);
        if (std::strtod(buf.data(), nullptr) == v) break;
    }
    return std::string(buf.data());
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) noexcept {
    std::uint64_t h = basis;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf.data(), 16);
}

}  // namespace lokg
