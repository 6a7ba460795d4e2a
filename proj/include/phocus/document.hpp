#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vendor_json.hpp"

namespace phocus {

// Section category codes: 0 introduction/related work, 1 main body,
// 2 conclusion and other closing parts.
inline constexpr int kSectionIntro = 0;
inline constexpr int kSectionBody = 1;
inline constexpr int kSectionConclusion = 2;

struct Sentence {
    int sent_id = 0;      // position in document order, also the index
    std::string text;     // whitespace-normalized, non-empty
    int paragraph_id = 0; // document-global paragraph counter
    int sec_id = kSectionBody;
};

struct Section {
    int sec_id = kSectionBody;
    std::string heading;
    std::vector<std::vector<int>> paragraphs; // sentence ids per paragraph
};

struct ReferenceEntry {
    int cit_id = 0; // reference-list number, positive
    std::string title;
    std::vector<std::string> authors; // normalized
    int year = 0;
    int n_cit = 0;            // mention count, filled by matching
    double au_overlap = 0.0;  // vs. the citing paper's authors
};

struct CitationMention {
    int cit_id = 0;
    int sent_id = 0;
    int sec_id = kSectionBody;
    std::string cit_text;
    std::string context_a; // related sentences before, possibly empty
    std::string context_b; // related sentences after, possibly empty
    int sen_label = 0;     // -1 negative, 0 neutral, 1 positive
    int cit_word = 0;      // tokens of context_a + cit_text + context_b
};

struct Paper {
    std::string paper_id;
    std::string title;
    std::vector<std::string> authors;  // normalized, de-duplicated order kept
    std::vector<double> author_shares; // empty -> equal split
    int year = 0;
    std::vector<Section> sections;
    std::vector<Sentence> sentences; // sent_id == index
    std::vector<ReferenceEntry> references;
    std::vector<CitationMention> mentions;
    std::vector<std::string> diagnostics; // unresolved markers etc.

    const ReferenceEntry* find_reference(int cit_id) const;
    ReferenceEntry* find_reference(int cit_id);
    std::set<std::string> author_set() const;
};

// Maps a heading to its section category by keyword matching. Unmatched
// headings land in the main-body class.
int classify_section(std::string_view heading);

// Splits normalized text into sentences. Abbreviations ("et al.", "Fig.",
// single initials) and anything inside brackets never split. Joining the
// result with single spaces reproduces the input.
std::vector<std::string> segment_sentences(std::string_view normalized_text);

// 2*|A∩B| / (|A|+|B|); 0 when both sets are empty.
double author_overlap(const std::set<std::string>& a, const std::set<std::string>& b);

struct MatchOptions {
    bool strict = false; // unresolvable markers become fatal
};

// Scans sentences for numeric markers ([k], [k,m], [k-m]) and author-year
// markers ("(Smith et al., 2019)", "Smith (2019)"). A marker naming m
// resolvable references yields m mentions sharing one sentence.
// Unresolvable parts go to `diagnostics` (or throw in strict mode).
std::vector<CitationMention> match_citations(const Paper& paper,
                                             std::vector<std::string>& diagnostics,
                                             const MatchOptions& options = {});

struct ParseOptions {
    bool strict = false;
};

// Parses an ingestion document into a fully populated Paper: sections
// classified, sentences segmented, citations matched, n_cit and
// au_overlap filled in. Throws parse_error naming the first offending
// element on malformed input.
Paper parse_paper(const nlohmann::json& doc, const ParseOptions& options = {});
Paper parse_paper_file(const std::filesystem::path& path, const ParseOptions& options = {});

// Canonical persisted form (sorted keys, stable float formatting).
nlohmann::json paper_to_json(const Paper& paper);
Paper paper_from_json(const nlohmann::json& doc);

} // namespace phocus
