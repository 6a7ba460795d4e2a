#include "phocus/sentiment.hpp"

#include "phocus/errors.hpp"
#include "phocus/text.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace phocus {

namespace {

constexpr double kTieTolerance = 1e-9;

int label_to_index(int label) { return label + 1; }
int index_to_label(int index) { return index - 1; }

} // namespace

std::array<double, 3> SentimentModel::log_posterior(std::string_view text) const {
    std::array<double, 3> lp = log_priors;
    for (const auto& token : tokenize(text)) {
        const auto it = token_log_likelihood.find(token);
        if (it == token_log_likelihood.end()) continue;
        for (int c = 0; c < 3; ++c) lp[c] += it->second[c];
    }
    return lp;
}

int SentimentModel::classify(std::string_view text) const {
    const auto lp = log_posterior(text);
    const double best = std::max({lp[0], lp[1], lp[2]});
    // Any tie at the top resolves to neutral.
    int winners = 0;
    int label = 0;
    for (int c = 0; c < 3; ++c) {
        if (lp[c] >= best - kTieTolerance) {
            ++winners;
            label = index_to_label(c);
        }
    }
    return winners == 1 ? label : 0;
}

SentimentModel train_sentiment(const std::vector<std::pair<std::string, int>>& corpus,
                               double alpha) {
    if (corpus.empty()) throw parse_error("sentiment training corpus is empty");
    if (alpha <= 0.0) throw parse_error("sentiment smoothing must be positive");

    std::array<long, 3> doc_counts{};
    std::array<long, 3> token_totals{};
    std::map<std::string, std::array<long, 3>> token_counts;
    for (const auto& [text, label] : corpus) {
        if (label < -1 || label > 1)
            throw parse_error("sentiment label out of range: " + std::to_string(label));
        const int c = label_to_index(label);
        doc_counts[c] += 1;
        for (const auto& token : tokenize(text)) {
            token_counts[token][c] += 1;
            token_totals[c] += 1;
        }
    }

    SentimentModel model;
    model.alpha = alpha;
    const double total_docs = static_cast<double>(corpus.size());
    // Add-one smoothed priors, so a class absent from the corpus still
    // carries a small prior rather than -inf.
    for (int c = 0; c < 3; ++c)
        model.log_priors[c] = std::log((doc_counts[c] + 1.0) / (total_docs + 3.0));

    const double vocab = static_cast<double>(token_counts.size());
    for (const auto& [token, counts] : token_counts) {
        std::array<double, 3> ll{};
        for (int c = 0; c < 3; ++c)
            ll[c] = std::log((counts[c] + alpha) / (token_totals[c] + alpha * vocab));
        model.token_log_likelihood.emplace(token, ll);
    }
    return model;
}

int sentiment(const SentimentModel& model, std::string_view cit_text, std::string_view context_a,
              std::string_view context_b) {
    std::string combined;
    combined.reserve(cit_text.size() + context_a.size() + context_b.size() + 2);
    for (std::string_view part : {context_a, cit_text, context_b}) {
        if (part.empty()) continue;
        if (!combined.empty()) combined.push_back(' ');
        combined += part;
    }
    return model.classify(combined);
}

void save_sentiment_model(const SentimentModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write sentiment model: " + path.string());
    out << "phocus-sentiment v1\n";
    out << "alpha " << format_double(model.alpha) << "\n";
    out << "priors";
    for (double lp : model.log_priors) out << ' ' << format_double(lp);
    out << "\nvocab " << model.token_log_likelihood.size() << "\n";
    for (const auto& [token, ll] : model.token_log_likelihood) {
        out << "token " << token;
        for (double v : ll) out << ' ' << format_double(v);
        out << "\n";
    }
}

SentimentModel load_sentiment_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open sentiment model: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "phocus-sentiment v1")
        throw parse_error("sentiment model: bad header in " + path.string());

    SentimentModel model;
    std::string word;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        row >> word;
        if (word == "alpha") {
            row >> word;
            model.alpha = parse_double(word, "sentiment model alpha");
        } else if (word == "priors") {
            for (int c = 0; c < 3; ++c) {
                row >> word;
                model.log_priors[c] = parse_double(word, "sentiment model priors");
            }
        } else if (word == "vocab") {
            continue;
        } else if (word == "token") {
            std::string token;
            row >> token;
            std::array<double, 3> ll{};
            for (int c = 0; c < 3; ++c) {
                row >> word;
                ll[c] = parse_double(word, "sentiment model token row");
            }
            model.token_log_likelihood.emplace(std::move(token), ll);
        } else {
            throw parse_error("sentiment model: unknown row '" + word + "'");
        }
    }
    return model;
}

std::vector<std::pair<std::string, int>> load_sentiment_corpus(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw not_found_error("cannot open sentiment corpus: " + path.string());
    std::vector<std::pair<std::string, int>> corpus;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos)
            throw parse_error("sentiment corpus line " + std::to_string(line_no) +
                              ": expected 'text<TAB>label'");
        const long label = parse_int(std::string_view(line).substr(tab + 1),
                                     "sentiment corpus line " + std::to_string(line_no));
        if (label < -1 || label > 1)
            throw parse_error("sentiment corpus line " + std::to_string(line_no) +
                              ": label must be -1, 0, or 1");
        corpus.emplace_back(line.substr(0, tab), static_cast<int>(label));
    }
    if (corpus.empty())
        throw parse_error("sentiment corpus is empty: " + path.string());
    return corpus;
}

} // namespace phocus
