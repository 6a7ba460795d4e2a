#include <doctest.h>

#include <cmath>
#include <map>

#include "phocus/errors.hpp"
#include "phocus/sentiment.hpp"
#include "phocus/text.hpp"

#include <filesystem>
#include <fstream>

using namespace phocus;

namespace {

// Brute-force posterior from raw counts, independent of the model code.
std::array<double, 3> nb_oracle(const std::vector<std::pair<std::string, int>>& corpus,
                                const std::string& text, double alpha) {
    std::array<double, 3> docs{};
    std::array<double, 3> totals{};
    std::map<std::string, std::array<double, 3>> counts;
    for (const auto& [t, label] : corpus) {
        docs[label + 1] += 1;
        for (const auto& tok : tokenize(t)) {
            counts[tok][label + 1] += 1;
            totals[label + 1] += 1;
        }
    }
    const double vocab = static_cast<double>(counts.size());
    const double n = static_cast<double>(corpus.size());
    std::array<double, 3> lp{};
    for (int c = 0; c < 3; ++c) lp[c] = std::log((docs[c] + 1.0) / (n + 3.0));
    for (const auto& tok : tokenize(text)) {
        if (!counts.count(tok)) continue; // outside the training vocabulary
        for (int c = 0; c < 3; ++c)
            lp[c] += std::log((counts[tok][c] + alpha) / (totals[c] + alpha * vocab));
    }
    return lp;
}

int oracle_label(const std::array<double, 3>& lp) {
    const double best = std::max({lp[0], lp[1], lp[2]});
    int winners = 0;
    int label = 0;
    for (int c = 0; c < 3; ++c) {
        if (lp[c] >= best - 1e-9) {
            ++winners;
            label = c - 1;
        }
    }
    return winners == 1 ? label : 0;
}

} // namespace

TEST_CASE("uniform corpus gives uniform priors") {
    const std::vector<std::pair<std::string, int>> corpus = {
        {"alpha", -1}, {"beta", 0}, {"gamma", 1}};
    const auto model = train_sentiment(corpus);
    for (int c = 0; c < 3; ++c)
        CHECK(std::exp(model.log_priors[c]) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) sum += std::exp(model.log_priors[c]);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single-label corpus dominates every prediction") {
    const std::vector<std::pair<std::string, int>> corpus = {
        {"anything goes", 1}, {"more text", 1}, {"there is only praise", 1}};
    const auto model = train_sentiment(corpus);
    CHECK(model.classify("completely unrelated words") == 1);
    CHECK(model.classify("anything") == 1);
}

TEST_CASE("hand-computed posterior on the two-document corpus") {
    const std::vector<std::pair<std::string, int>> corpus = {{"good", 1}, {"bad", -1}};
    const auto model = train_sentiment(corpus);
    const auto lp = model.log_posterior("good good");
    const auto expected = nb_oracle(corpus, "good good", 1.0);
    for (int c = 0; c < 3; ++c) CHECK(lp[c] == doctest::Approx(expected[c]).epsilon(1e-12));
    CHECK(model.classify("good good") == 1);
    // Priors 0.4/0.2/0.4; likelihood of "good": (1+1)/(1+2) under +1,
    // (0+1)/(1+2) under -1, (0+1)/(0+2) under 0.
    CHECK(lp[2] == doctest::Approx(std::log(0.4) + 2 * std::log(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("tie-breaking favors neutral") {
    const std::vector<std::pair<std::string, int>> corpus = {{"good", 1}, {"bad", -1}};
    const auto model = train_sentiment(corpus);
    // Equal positive and negative evidence under a symmetric model.
    CHECK(model.classify("good bad") == 0);
    // Empty text: uniform doc counts were not given, priors favor the
    // trained classes equally; neutral still wins only on a true tie.
    const std::vector<std::pair<std::string, int>> uniform = {
        {"up", 1}, {"down", -1}, {"flat", 0}};
    const auto uniform_model = train_sentiment(uniform);
    CHECK(uniform_model.classify("") == 0);
}

TEST_CASE("posterior is invariant to token order") {
    const std::vector<std::pair<std::string, int>> corpus = {
        {"solid great work", 1}, {"weak poor effort", -1}, {"plain neutral text", 0}};
    const auto model = train_sentiment(corpus);
    const auto a = model.log_posterior("solid poor plain work");
    const auto b = model.log_posterior("work plain poor solid");
    for (int c = 0; c < 3; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));
}

TEST_CASE("duplicating the corpus leaves predictions unchanged") {
    std::vector<std::pair<std::string, int>> corpus = {
        {"solid great work", 1}, {"weak poor effort", -1}, {"plain neutral text", 0},
        {"great results overall", 1}, {"poor flawed design", -1}};
    const auto model = train_sentiment(corpus);
    auto doubled = corpus;
    doubled.insert(doubled.end(), corpus.begin(), corpus.end());
    const auto model2 = train_sentiment(doubled);
    for (const char* text : {"great plain work", "poor text", "weak weak great", ""})
        CHECK(model.classify(text) == model2.classify(text));
}

TEST_CASE("exactly one label comes back for arbitrary inputs") {
    const std::vector<std::pair<std::string, int>> corpus = {
        {"good fine", 1}, {"bad awful", -1}, {"table chair", 0}};
    const auto model = train_sentiment(corpus);
    for (const char* text : {"", "good", "bad", "xyzzy unseen", "good bad table"}) {
        const int label = model.classify(text);
        CHECK(label >= -1);
        CHECK(label <= 1);
        CHECK(oracle_label(nb_oracle(corpus, text, 1.0)) == label);
    }
}

TEST_CASE("large alpha washes out the likelihoods") {
    // Three corpora with different dominant classes; with huge smoothing the
    // prediction must follow the prior argmax.
    const std::vector<std::vector<std::pair<std::string, int>>> corpora = {
        {{"up", 1}, {"up more", 1}, {"down", -1}},
        {{"down", -1}, {"down again", -1}, {"up", 1}},
        {{"flat", 0}, {"flat line", 0}, {"up", 1}},
    };
    const std::vector<int> expected = {1, -1, 0};
    for (std::size_t i = 0; i < corpora.size(); ++i) {
        const auto model = train_sentiment(corpora[i], 1e9);
        CHECK(model.classify("up down flat") == expected[i]);
    }
}

TEST_CASE("missing classes get smoothed priors, empty corpus throws") {
    const std::vector<std::pair<std::string, int>> corpus = {{"good", 1}, {"fine", 1}};
    const auto model = train_sentiment(corpus);
    for (int c = 0; c < 3; ++c) CHECK(std::isfinite(model.log_priors[c]));
    CHECK(std::exp(model.log_priors[2]) > std::exp(model.log_priors[0]));
    CHECK_THROWS_AS(train_sentiment({}), parse_error);
    CHECK_THROWS_AS(train_sentiment({{"x", 5}}), parse_error);
}

TEST_CASE("sentiment over mention parts concatenates contexts") {
    const std::vector<std::pair<std::string, int>> corpus = {
        {"excellent strong", 1}, {"broken poor", -1}, {"plain", 0}};
    const auto model = train_sentiment(corpus);
    CHECK(sentiment(model, "this is plain", "excellent start", "strong finish") == 1);
    CHECK(sentiment(model, "this is plain", "", "") == 0);
}

TEST_CASE("model file round trip preserves behaviour") {
    const std::vector<std::pair<std::string, int>> corpus = {
        {"solid great work", 1}, {"weak poor effort", -1}, {"plain neutral text", 0}};
    const auto model = train_sentiment(corpus);
    const auto path = std::filesystem::temp_directory_path() / "phocus_sentiment_test.model";
    save_sentiment_model(model, path);
    const auto loaded = load_sentiment_model(path);
    for (const char* text : {"great", "poor", "plain", "unseen thing"}) {
        const auto a = model.log_posterior(text);
        const auto b = loaded.log_posterior(text);
        for (int c = 0; c < 3; ++c) CHECK(a[c] == b[c]);
    }
    std::filesystem::remove(path);
}

TEST_CASE("corpus file parsing") {
    const auto path = std::filesystem::temp_directory_path() / "phocus_corpus_test.tsv";
    {
        std::ofstream out(path);
        out << "a fine method\t1\n";
        out << "it breaks often\t-1\n";
        out << "we describe a system\t0\n";
    }
    const auto corpus = load_sentiment_corpus(path);
    REQUIRE(corpus.size() == 3);
    CHECK(corpus[0] == std::pair<std::string, int>{"a fine method", 1});
    CHECK(corpus[1].second == -1);
    std::filesystem::remove(path);

    const auto bad = std::filesystem::temp_directory_path() / "phocus_corpus_bad.tsv";
    {
        std::ofstream out(bad);
        out << "no label here\n";
    }
    CHECK_THROWS_AS(load_sentiment_corpus(bad), parse_error);
    std::filesystem::remove(bad);
}
