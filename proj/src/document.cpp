#include "phocus/document.hpp"

#include "phocus/errors.hpp"
#include "phocus/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_set>

namespace phocus {

namespace {

std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

bool contains(const std::string& haystack, std::string_view needle) {
    return haystack.find(needle) != std::string::npos;
}

// Tokens before a period that block a sentence split. Single letters
// ("J.", the g in "e.g.") are handled separately.
const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> abbr = {
        "al",  "fig", "figs", "eq",  "eqs",  "sec", "secs", "tab", "vs",  "cf",
        "etc", "dr",  "prof", "mr",  "mrs",  "ms",  "st",   "no",  "vol", "pp",
        "ref", "refs", "ca",  "approx",
    };
    return abbr;
}

// The alphabetic token ending at position `end` (exclusive), lowercased.
std::string token_before(std::string_view text, std::size_t end) {
    std::size_t begin = end;
    while (begin > 0 && std::isalpha(static_cast<unsigned char>(text[begin - 1]))) --begin;
    return lower(text.substr(begin, end - begin));
}

bool is_sentence_break(std::string_view text, std::size_t i) {
    const char c = text[i];
    if (c == '?' || c == '!') return true;
    // Period: require a following space (or end), and not an abbreviation.
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')' || text[j] == ']'))
        ++j;
    if (j < text.size() && text[j] != ' ') return false;
    const std::string tok = token_before(text, i);
    if (tok.size() == 1) return false; // initial or "e.g." style
    if (abbreviations().count(tok) > 0) return false;
    return true;
}

struct MarkerHit {
    std::size_t pos = 0;  // offset in the sentence, for ordering
    int order = 0;        // position within one marker
    int cit_id = 0;       // resolved reference, 0 if unresolved
    std::string display;  // original marker text for diagnostics
};

bool parse_uint(std::string_view s, std::size_t& i, int& value) {
    std::size_t start = i;
    long v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        v = v * 10 + (s[i] - '0');
        if (v > 1000000) return false;
        ++i;
    }
    if (i == start) return false;
    value = static_cast<int>(v);
    return true;
}

void skip_spaces(std::string_view s, std::size_t& i) {
    while (i < s.size() && s[i] == ' ') ++i;
}

// Consumes "-", an en dash, or an em dash.
bool parse_dash(std::string_view s, std::size_t& i) {
    if (i < s.size() && s[i] == '-') {
        ++i;
        return true;
    }
    if (i + 2 < s.size() + 1 && s.substr(i, 3) == "–") {
        i += 3;
        return true;
    }
    if (i + 2 < s.size() + 1 && s.substr(i, 3) == "—") {
        i += 3;
        return true;
    }
    return false;
}

// "1, 3-5" -> {1,3,4,5}. Returns nothing when the bracket content is not a
// pure citation list (e.g. "[see 3]").
std::optional<std::vector<int>> parse_numeric_marker(std::string_view content) {
    std::vector<int> ids;
    std::size_t i = 0;
    skip_spaces(content, i);
    while (true) {
        int a = 0;
        if (!parse_uint(content, i, a)) return std::nullopt;
        skip_spaces(content, i);
        if (parse_dash(content, i)) {
            skip_spaces(content, i);
            int b = 0;
            if (!parse_uint(content, i, b)) return std::nullopt;
            if (b < a || b - a > 500) return std::nullopt;
            for (int k = a; k <= b; ++k) ids.push_back(k);
            skip_spaces(content, i);
        } else {
            ids.push_back(a);
        }
        if (i == content.size()) break;
        if (content[i] != ',' && content[i] != ';') return std::nullopt;
        ++i;
        skip_spaces(content, i);
    }
    return ids;
}

std::string surname_of_normalized(const std::string& normalized) {
    const auto pos = normalized.rfind(' ');
    return pos == std::string::npos ? normalized : normalized.substr(pos + 1);
}

// Trailing "2019" / "2019a" of an author-year fragment.
std::optional<int> trailing_year(std::string_view part, std::size_t& year_begin) {
    std::size_t end = part.size();
    while (end > 0 && part[end - 1] == ' ') --end;
    if (end > 0 && std::isalpha(static_cast<unsigned char>(part[end - 1]))) --end;
    std::size_t begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(part[begin - 1]))) --begin;
    if (end - begin != 4) return std::nullopt;
    int year = 0;
    for (std::size_t k = begin; k < end; ++k) year = year * 10 + (part[k] - '0');
    if (year < 1500 || year > 2100) return std::nullopt;
    year_begin = begin;
    return year;
}

std::string first_word(std::string_view part) {
    std::size_t i = 0;
    skip_spaces(part, i);
    std::size_t start = i;
    while (i < part.size() &&
           (std::isalpha(static_cast<unsigned char>(part[i])) || part[i] == '-' ||
            static_cast<unsigned char>(part[i]) >= 0x80))
        ++i;
    return lower(part.substr(start, i - start));
}

// Last capitalized word strictly before `pos`, skipping "et al." in between.
std::string name_before(std::string_view text, std::size_t pos) {
    std::size_t end = pos;
    while (end > 0 && (text[end - 1] == ' ' || text[end - 1] == '.')) --end;
    std::size_t begin = end;
    while (begin > 0 && (std::isalpha(static_cast<unsigned char>(text[begin - 1])) ||
                         text[begin - 1] == '-'))
        --begin;
    if (begin == end) return {};
    std::string word(text.substr(begin, end - begin));
    const std::string low = lower(word);
    if (low == "al" || low == "et") return name_before(text, begin);
    if (!std::isupper(static_cast<unsigned char>(word.front()))) return {};
    return lower(word);
}

} // namespace

const ReferenceEntry* Paper::find_reference(int cit_id) const {
    for (const auto& r : references)
        if (r.cit_id == cit_id) return &r;
    return nullptr;
}

ReferenceEntry* Paper::find_reference(int cit_id) {
    for (auto& r : references)
        if (r.cit_id == cit_id) return &r;
    return nullptr;
}

std::set<std::string> Paper::author_set() const {
    return std::set<std::string>(authors.begin(), authors.end());
}

int classify_section(std::string_view heading) {
    const std::string h = lower(heading);
    for (std::string_view kw : {"related work", "introduction", "background", "preliminaries"})
        if (contains(h, kw)) return kSectionIntro;
    for (std::string_view kw :
         {"conclusion", "discussion", "future work", "acknowledgements", "appendix"})
        if (contains(h, kw)) return kSectionConclusion;
    return kSectionBody;
}

std::vector<std::string> segment_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    int bracket_depth = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '(' || c == '[') {
            ++bracket_depth;
            continue;
        }
        if (c == ')' || c == ']') {
            if (bracket_depth > 0) --bracket_depth;
            continue;
        }
        if ((c == '.' || c == '?' || c == '!') && bracket_depth == 0 &&
            is_sentence_break(text, i)) {
            // Absorb closing quotes/brackets right after the terminator.
            std::size_t end = i + 1;
            while (end < text.size() &&
                   (text[end] == '"' || text[end] == '\'' || text[end] == ')' || text[end] == ']'))
                ++end;
            sentences.emplace_back(text.substr(start, end - start));
            i = end; // the boundary space, skipped by the loop increment
            start = end + 1;
        }
    }
    if (start < text.size()) sentences.emplace_back(text.substr(start));
    return sentences;
}

double author_overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    return 2.0 * static_cast<double>(inter) / static_cast<double>(a.size() + b.size());
}

std::vector<CitationMention> match_citations(const Paper& paper,
                                             std::vector<std::string>& diagnostics,
                                             const MatchOptions& options) {
    // cit_id lookup plus (first-author surname, year) lookup.
    std::unordered_set<int> known_ids;
    std::vector<std::pair<std::string, int>> author_year; // aligned with references
    for (const auto& r : paper.references) {
        known_ids.insert(r.cit_id);
        author_year.emplace_back(r.authors.empty() ? "" : surname_of_normalized(r.authors.front()),
                                 r.year);
    }

    auto resolve_author_year = [&](const std::string& surname, int year) -> int {
        int found = 0;
        int count = 0;
        for (std::size_t k = 0; k < paper.references.size(); ++k) {
            if (author_year[k].first == surname && author_year[k].second == year) {
                found = paper.references[k].cit_id;
                ++count;
            }
        }
        return count == 1 ? found : 0;
    };

    std::vector<CitationMention> mentions;
    auto fail_or_log = [&](const std::string& message) {
        if (options.strict) throw parse_error(message);
        diagnostics.push_back(message);
    };

    for (const auto& sentence : paper.sentences) {
        const std::string& text = sentence.text;
        std::vector<MarkerHit> hits;

        // Numeric markers.
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] != '[') continue;
            const auto close = text.find(']', i + 1);
            if (close == std::string::npos) break;
            const auto ids = parse_numeric_marker(
                std::string_view(text).substr(i + 1, close - i - 1));
            if (ids) {
                int order = 0;
                for (int id : *ids) {
                    MarkerHit hit;
                    hit.pos = i;
                    hit.order = order++;
                    hit.cit_id = known_ids.count(id) ? id : 0;
                    hit.display = "[" + std::to_string(id) + "]";
                    hits.push_back(std::move(hit));
                }
                i = close;
            }
        }

        // Author-year markers.
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] != '(') continue;
            const auto close = text.find(')', i + 1);
            if (close == std::string::npos) break;
            const std::string_view content = std::string_view(text).substr(i + 1, close - i - 1);
            if (content.find_first_of("()") != std::string_view::npos) continue;

            int order = 0;
            std::size_t part_start = 0;
            bool any = false;
            while (part_start <= content.size()) {
                auto semi = content.find(';', part_start);
                if (semi == std::string_view::npos) semi = content.size();
                const std::string_view part = content.substr(part_start, semi - part_start);
                std::size_t year_begin = 0;
                if (const auto year = trailing_year(part, year_begin)) {
                    std::string surname = first_word(part.substr(0, year_begin));
                    bool narrative = false;
                    if (surname.empty()) {
                        // "Smith et al. (2019)" – the name sits before the paren.
                        surname = name_before(text, i);
                        narrative = true;
                    }
                    if (!surname.empty()) {
                        any = true;
                        MarkerHit hit;
                        hit.pos = i;
                        hit.order = order++;
                        hit.cit_id = resolve_author_year(surname, *year);
                        hit.display = "(" + surname + (narrative ? " " : ", ") +
                                      std::to_string(*year) + ")";
                        hits.push_back(std::move(hit));
                    }
                }
                part_start = semi + 1;
                if (semi == content.size()) break;
            }
            if (any) i = close;
        }

        std::stable_sort(hits.begin(), hits.end(), [](const MarkerHit& a, const MarkerHit& b) {
            return a.pos != b.pos ? a.pos < b.pos : a.order < b.order;
        });

        for (const auto& hit : hits) {
            if (hit.cit_id == 0) {
                fail_or_log("unresolved citation marker " + hit.display + " in sentence " +
                            std::to_string(sentence.sent_id));
                continue;
            }
            CitationMention m;
            m.cit_id = hit.cit_id;
            m.sent_id = sentence.sent_id;
            m.sec_id = sentence.sec_id;
            m.cit_text = text;
            m.cit_word = count_tokens(text);
            mentions.push_back(std::move(m));
        }
    }
    return mentions;
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& obj, const std::string& key,
                                    const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw parse_error(where + ": missing field '" + key + "'");
    return obj.at(key);
}

std::string require_string(const nlohmann::json& obj, const std::string& key,
                           const std::string& where) {
    const auto& v = require_field(obj, key, where);
    if (!v.is_string()) throw parse_error(where + "." + key + ": not a string");
    return v.get<std::string>();
}

int require_int(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    const auto& v = require_field(obj, key, where);
    if (!v.is_number_integer()) throw parse_error(where + "." + key + ": not an integer");
    return v.get<int>();
}

std::vector<std::string> require_string_array(const nlohmann::json& obj, const std::string& key,
                                              const std::string& where) {
    const auto& v = require_field(obj, key, where);
    if (!v.is_array()) throw parse_error(where + "." + key + ": not an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw parse_error(where + "." + key + ": non-string element");
        out.push_back(e.get<std::string>());
    }
    return out;
}

} // namespace

Paper parse_paper(const nlohmann::json& doc, const ParseOptions& options) {
    if (!doc.is_object()) throw parse_error("document: not an object");
    Paper paper;
    paper.paper_id = require_string(doc, "paper_id", "document");
    if (paper.paper_id.empty()) throw parse_error("document.paper_id: empty");
    paper.title = require_string(doc, "title", "document");
    paper.year = require_int(doc, "year", "document");
    for (const auto& name : require_string_array(doc, "authors", "document")) {
        const std::string normalized = normalize_author(name);
        if (normalized.empty())
            throw parse_error("document.authors: unusable name '" + name + "'");
        paper.authors.push_back(normalized);
    }

    // Sections and two-level segmentation.
    const auto& sections = require_field(doc, "sections", "document");
    if (!sections.is_array()) throw parse_error("document.sections: not an array");
    int paragraph_id = 0;
    for (std::size_t si = 0; si < sections.size(); ++si) {
        const std::string where = "sections[" + std::to_string(si) + "]";
        const auto& sec = sections[si];
        Section section;
        section.heading = require_string(sec, "heading", where);
        section.sec_id = classify_section(section.heading);
        const auto& paragraphs = require_field(sec, "paragraphs", where);
        if (!paragraphs.is_array()) throw parse_error(where + ".paragraphs: not an array");
        for (std::size_t pi = 0; pi < paragraphs.size(); ++pi) {
            const auto& para = paragraphs[pi];
            std::vector<std::string> texts;
            if (para.is_string()) {
                texts = segment_sentences(collapse_whitespace(para.get<std::string>()));
            } else if (para.is_array()) {
                // Pre-segmented form: one string per sentence.
                for (const auto& s : para) {
                    if (!s.is_string())
                        throw parse_error(where + ".paragraphs[" + std::to_string(pi) +
                                          "]: non-string sentence");
                    auto t = collapse_whitespace(s.get<std::string>());
                    if (!t.empty()) texts.push_back(std::move(t));
                }
            } else {
                throw parse_error(where + ".paragraphs[" + std::to_string(pi) +
                                  "]: not text or sentence array");
            }
            if (texts.empty()) continue;
            std::vector<int> ids;
            for (auto& t : texts) {
                Sentence s;
                s.sent_id = static_cast<int>(paper.sentences.size());
                s.text = std::move(t);
                s.paragraph_id = paragraph_id;
                s.sec_id = section.sec_id;
                ids.push_back(s.sent_id);
                paper.sentences.push_back(std::move(s));
            }
            section.paragraphs.push_back(std::move(ids));
            ++paragraph_id;
        }
        paper.sections.push_back(std::move(section));
    }

    // References.
    const auto& refs = require_field(doc, "references", "document");
    if (!refs.is_array()) throw parse_error("document.references: not an array");
    if (refs.empty()) throw parse_error("document.references: empty reference list");
    std::unordered_set<int> seen_ids;
    for (std::size_t ri = 0; ri < refs.size(); ++ri) {
        const std::string where = "references[" + std::to_string(ri) + "]";
        ReferenceEntry entry;
        entry.cit_id = require_int(refs[ri], "cit_id", where);
        if (entry.cit_id <= 0) throw parse_error(where + ".cit_id: must be positive");
        if (!seen_ids.insert(entry.cit_id).second)
            throw parse_error(where + ".cit_id: duplicate id " + std::to_string(entry.cit_id));
        entry.title = require_string(refs[ri], "title", where);
        entry.year = require_int(refs[ri], "year", where);
        for (const auto& name : require_string_array(refs[ri], "authors", where)) {
            const std::string normalized = normalize_author(name);
            if (!normalized.empty()) entry.authors.push_back(normalized);
        }
        paper.references.push_back(std::move(entry));
    }

    // Optional per-paper author contribution shares.
    if (doc.contains("author_shares")) {
        const auto& shares = doc.at("author_shares");
        if (!shares.is_array()) throw parse_error("document.author_shares: not an array");
        if (shares.size() != paper.authors.size())
            throw parse_error("document.author_shares: length differs from authors");
        double sum = 0.0;
        for (const auto& s : shares) {
            if (!s.is_number()) throw parse_error("document.author_shares: non-numeric element");
            const double v = s.get<double>();
            if (v < 0.0 || v > 1.0)
                throw parse_error("document.author_shares: share outside [0,1]");
            paper.author_shares.push_back(v);
            sum += v;
        }
        if (!paper.authors.empty() && std::abs(sum - 1.0) > 1e-9)
            throw parse_error("document.author_shares: shares do not sum to 1");
    }

    // Matching, then the simple factors.
    MatchOptions match_options;
    match_options.strict = options.strict;
    paper.mentions = match_citations(paper, paper.diagnostics, match_options);
    const auto citing_authors = paper.author_set();
    for (auto& r : paper.references) {
        r.n_cit = 0;
        r.au_overlap = author_overlap(
            citing_authors, std::set<std::string>(r.authors.begin(), r.authors.end()));
    }
    for (const auto& m : paper.mentions) paper.find_reference(m.cit_id)->n_cit += 1;
    return paper;
}

Paper parse_paper_file(const std::filesystem::path& path, const ParseOptions& options) {
    std::ifstream in(path);
    if (!in) throw not_found_error("cannot open document file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path.filename().string() + ": invalid document: " + e.what());
    }
    return parse_paper(doc, options);
}

nlohmann::json paper_to_json(const Paper& paper) {
    nlohmann::json doc;
    doc["paper_id"] = paper.paper_id;
    doc["title"] = paper.title;
    doc["authors"] = paper.authors;
    doc["year"] = paper.year;
    if (!paper.author_shares.empty()) doc["author_shares"] = paper.author_shares;

    auto sections = nlohmann::json::array();
    for (const auto& s : paper.sections) {
        sections.push_back({{"sec_id", s.sec_id},
                            {"heading", s.heading},
                            {"paragraphs", s.paragraphs}});
    }
    doc["sections"] = sections;

    auto sentences = nlohmann::json::array();
    for (const auto& s : paper.sentences) {
        sentences.push_back({{"sent_id", s.sent_id},
                             {"text", s.text},
                             {"paragraph_id", s.paragraph_id},
                             {"sec_id", s.sec_id}});
    }
    doc["sentences"] = sentences;

    auto refs = nlohmann::json::array();
    for (const auto& r : paper.references) {
        refs.push_back({{"cit_id", r.cit_id},
                        {"title", r.title},
                        {"authors", r.authors},
                        {"year", r.year},
                        {"n_cit", r.n_cit},
                        {"au_overlap", r.au_overlap}});
    }
    doc["references"] = refs;

    auto mentions = nlohmann::json::array();
    for (const auto& m : paper.mentions) {
        mentions.push_back({{"cit_id", m.cit_id}, {"sent_id", m.sent_id}, {"sec_id", m.sec_id}});
    }
    doc["mentions"] = mentions;
    doc["diagnostics"] = paper.diagnostics;
    return doc;
}

Paper paper_from_json(const nlohmann::json& doc) {
    Paper paper;
    paper.paper_id = doc.at("paper_id").get<std::string>();
    paper.title = doc.at("title").get<std::string>();
    paper.authors = doc.at("authors").get<std::vector<std::string>>();
    paper.year = doc.at("year").get<int>();
    if (doc.contains("author_shares"))
        paper.author_shares = doc.at("author_shares").get<std::vector<double>>();
    for (const auto& s : doc.at("sections")) {
        Section section;
        section.sec_id = s.at("sec_id").get<int>();
        section.heading = s.at("heading").get<std::string>();
        section.paragraphs = s.at("paragraphs").get<std::vector<std::vector<int>>>();
        paper.sections.push_back(std::move(section));
    }
    for (const auto& s : doc.at("sentences")) {
        Sentence sentence;
        sentence.sent_id = s.at("sent_id").get<int>();
        sentence.text = s.at("text").get<std::string>();
        sentence.paragraph_id = s.at("paragraph_id").get<int>();
        sentence.sec_id = s.at("sec_id").get<int>();
        paper.sentences.push_back(std::move(sentence));
    }
    for (const auto& r : doc.at("references")) {
        ReferenceEntry entry;
        entry.cit_id = r.at("cit_id").get<int>();
        entry.title = r.at("title").get<std::string>();
        entry.authors = r.at("authors").get<std::vector<std::string>>();
        entry.year = r.at("year").get<int>();
        entry.n_cit = r.at("n_cit").get<int>();
        entry.au_overlap = r.at("au_overlap").get<double>();
        paper.references.push_back(std::move(entry));
    }
    for (const auto& m : doc.at("mentions")) {
        CitationMention mention;
        mention.cit_id = m.at("cit_id").get<int>();
        mention.sent_id = m.at("sent_id").get<int>();
        mention.sec_id = m.at("sec_id").get<int>();
        if (mention.sent_id >= 0 && mention.sent_id < static_cast<int>(paper.sentences.size())) {
            mention.cit_text = paper.sentences[mention.sent_id].text;
            mention.cit_word = count_tokens(mention.cit_text);
        }
        paper.mentions.push_back(std::move(mention));
    }
    paper.diagnostics = doc.at("diagnostics").get<std::vector<std::string>>();
    return paper;
}

} // namespace phocus
