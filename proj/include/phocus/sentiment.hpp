#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace phocus {

// Multinomial Naive Bayes over the shared tokenizer, three polarity
// classes. Index i of every per-class array corresponds to label i-1.
struct SentimentModel {
    double alpha = 1.0;                 // Laplace smoothing for token likelihoods
    std::array<double, 3> log_priors{}; // add-one smoothed class priors
    std::map<std::string, std::array<double, 3>> token_log_likelihood;

    // Tokens outside the training vocabulary are skipped, the usual
    // fixed-vocabulary convention.
    std::array<double, 3> log_posterior(std::string_view text) const;
    // Argmax label; any tie at the top resolves to neutral.
    int classify(std::string_view text) const;
};

// Trains from (text, label) records, label in {-1,0,1}. Counts are order
// independent, so the model is too. Throws on an empty corpus or an
// out-of-range label.
SentimentModel train_sentiment(const std::vector<std::pair<std::string, int>>& corpus,
                               double alpha = 1.0);

// sen_label for one mention: posterior over context_a + cit_text + context_b.
int sentiment(const SentimentModel& model, std::string_view cit_text, std::string_view context_a,
              std::string_view context_b);

// Plain-text model file: priors plus a token -> per-label log-likelihood table.
void save_sentiment_model(const SentimentModel& model, const std::filesystem::path& path);
SentimentModel load_sentiment_model(const std::filesystem::path& path);

// Training file: one record per line, "text<TAB>label".
std::vector<std::pair<std::string, int>> load_sentiment_corpus(const std::filesystem::path& path);

} // namespace phocus
