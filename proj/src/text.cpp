#include "phocus/text.hpp"

#include "phocus/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <unordered_set>

namespace phocus {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

// 150 common English function words.
const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "also", "am", "an",
        "and", "any", "are", "as", "at", "be", "because", "been", "before", "being",
        "below", "between", "both", "but", "by", "can", "cannot", "could", "did", "do",
        "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had",
        "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself",
        "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself",
        "just", "may", "me", "might", "more", "most", "must", "my", "myself", "no",
        "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other",
        "our", "ours", "ourselves", "out", "over", "own", "same", "shall", "she", "should",
        "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves",
        "then", "there", "these", "they", "this", "those", "through", "to", "too", "under",
        "until", "up", "upon", "us", "very", "was", "we", "were", "what", "when",
        "where", "which", "while", "who", "whom", "why", "will", "with", "within", "without",
        "would", "you", "your", "yours", "yourself", "yourselves", "et", "al", "eg", "ie",
        "via", "per", "vs", "etc", "thus", "hence", "however", "therefore", "moreover", "furthermore",
    };
    return words;
}

} // namespace

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (unsigned char c : text) {
        if (is_space(c)) {
            flush();
        } else if (is_alnum(c) || c >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(c)));
        }
        // ASCII punctuation inside a piece is stripped, not a separator:
        // "don't" -> "dont", "[1,2]" -> "12".
    }
    flush();
    return tokens;
}

int count_tokens(std::string_view text) {
    return static_cast<int>(tokenize(text).size());
}

bool is_stopword(const std::string& token) {
    return stopwords().count(token) > 0;
}

std::string stem(std::string token) {
    auto ends_with = [&](std::string_view suf) {
        return token.size() >= suf.size() &&
               token.compare(token.size() - suf.size(), suf.size(), suf) == 0;
    };
    if (ends_with("ing") && token.size() > 5) {
        token.resize(token.size() - 3);
    } else if (ends_with("ed") && token.size() > 4) {
        token.resize(token.size() - 2);
    } else if (ends_with("es") && token.size() > 4) {
        token.resize(token.size() - 2);
    } else if (ends_with("s") && !ends_with("ss") && token.size() > 3) {
        token.resize(token.size() - 1);
    }
    return token;
}

std::set<std::string> content_stems(std::string_view text) {
    std::set<std::string> out;
    for (auto& tok : tokenize(text)) {
        if (is_stopword(tok)) continue;
        out.insert(stem(std::move(tok)));
    }
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string normalize_author(std::string_view name) {
    // A comma means "Surname, Given ..." order.
    std::string surname_part;
    std::string given_part;
    const auto comma = name.find(',');
    if (comma != std::string_view::npos) {
        surname_part = std::string(name.substr(0, comma));
        given_part = std::string(name.substr(comma + 1));
    } else {
        given_part = std::string(name);
    }

    auto words = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (unsigned char c : s) {
            if (is_alnum(c) || c >= 0x80 || c == '-') {
                cur.push_back(static_cast<char>(std::tolower(c)));
            } else if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    };

    std::vector<std::string> given = words(given_part);
    std::string surname;
    if (!surname_part.empty()) {
        auto sw = words(surname_part);
        if (!sw.empty()) surname = sw.back();
    } else if (!given.empty()) {
        surname = given.back();
        given.pop_back();
    }
    if (surname.empty()) return {};

    std::string out;
    for (const auto& g : given) {
        out.push_back(g.front());
        out += ". ";
    }
    out += surname;
    return out;
}

std::string normalize_title(std::string_view title) {
    std::string lowered;
    lowered.reserve(title.size());
    for (unsigned char c : title) lowered.push_back(static_cast<char>(std::tolower(c)));
    return collapse_whitespace(lowered);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    return fnv1a64(bytes, 0xcbf29ce484222325ULL);
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    double v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw parse_error(std::string(what) + ": bad number '" + std::string(text) + "'");
    }
    return v;
}

long parse_int(std::string_view text, std::string_view what) {
    long v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw parse_error(std::string(what) + ": bad integer '" + std::string(text) + "'");
    }
    return v;
}

} // namespace phocus
