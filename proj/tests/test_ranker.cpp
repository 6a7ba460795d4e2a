#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "phocus/errors.hpp"
#include "phocus/ranker.hpp"

using namespace phocus;

namespace {

CitationFeature feature(double au, double ncit, double words, double sen) {
    CitationFeature f;
    f.au_overlap = au;
    f.n_cit = ncit;
    f.cit_word = words;
    f.sen_label = sen;
    return f;
}

RegressionTree leaf_tree(double value) {
    RegressionTree t;
    TreeNode leaf;
    leaf.value = value;
    t.nodes.push_back(leaf);
    return t;
}

// Synthetic ranking task: relevance is a monotone step function of n_cit
// plus label noise.
std::vector<Query> synthetic_queries(int count, std::mt19937_64& rng, double noise = 0.0) {
    std::vector<Query> queries;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int q = 0; q < count; ++q) {
        Query query;
        const int rows = 6 + static_cast<int>(rng() % 5);
        for (int r = 0; r < rows; ++r) {
            const double ncit = 1.0 + static_cast<double>(rng() % 12);
            query.rows.push_back(feature(unit(rng), ncit, 5.0 + static_cast<double>(rng() % 60),
                                         static_cast<double>(rng() % 3) - 1.0));
            double label = ncit <= 3 ? 0.0 : (ncit <= 6 ? 1.0 : (ncit <= 9 ? 2.0 : 3.0));
            if (noise > 0.0 && unit(rng) < noise)
                label = static_cast<double>(rng() % 4);
            query.labels.push_back(label);
        }
        queries.push_back(std::move(query));
    }
    return queries;
}

double mean_ndcg(const GBDTEnsemble& model, const std::vector<Query>& queries) {
    double total = 0.0;
    for (const auto& q : queries) {
        std::vector<int> order(q.rows.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> scores;
        for (const auto& row : q.rows) scores.push_back(model.score(row));
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return scores[a] > scores[b]; });
        total += ndcg(order, q.labels);
    }
    return total / static_cast<double>(queries.size());
}

} // namespace

TEST_CASE("ensemble scoring basics") {
    GBDTEnsemble empty;
    CHECK(score_citation(empty, feature(0.1, 2, 10, 0)) == 0.0);

    GBDTEnsemble single;
    single.learning_rate = 0.5;
    single.trees.push_back(leaf_tree(0.8));
    CHECK(score_citation(single, feature(0, 0, 0, 0)) == 0.5 * 0.8);
    CHECK(score_citation(single, feature(1, 9, 99, 1)) == 0.5 * 0.8);

    // Two-leaf tree splitting on n_cit <= 2.
    GBDTEnsemble split_model;
    split_model.learning_rate = 1.0;
    RegressionTree t;
    TreeNode root;
    root.feature = 1;
    root.threshold = 2.0;
    root.left = 1;
    root.right = 2;
    t.nodes.push_back(root);
    TreeNode low;
    low.value = 0.1;
    TreeNode high;
    high.value = 0.9;
    t.nodes.push_back(low);
    t.nodes.push_back(high);
    split_model.trees.push_back(t);
    CHECK(score_citation(split_model, feature(0, 3, 0, 0)) == 0.9);
    CHECK(score_citation(split_model, feature(0, 2, 0, 0)) == 0.1);
}

TEST_CASE("reference score is the occurrence mean") {
    CHECK(score_reference(std::vector<double>{0.4}) == 0.4);
    CHECK(score_reference(std::vector<double>{0.2, 0.8}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(score_reference(std::vector<double>{0.7, 0.7, 0.7}) ==
          doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS(score_reference(std::vector<double>{}));
}

TEST_CASE("reference ranking order and ties") {
    SUBCASE("plain ordering") {
        const auto ranked = rank_references({{1, 0.9}, {2, 0.1}});
        CHECK(ranked[0].cit_id == 1);
        CHECK(ranked[0].rank == 1);
        CHECK(ranked[1].cit_id == 2);
        CHECK(ranked[1].rank == 2);
    }
    SUBCASE("ties break by ascending cit_id") {
        const auto ranked = rank_references({{2, 0.5}, {1, 0.5}});
        CHECK(ranked[0].cit_id == 1);
        CHECK(ranked[1].cit_id == 2);
    }
    SUBCASE("three-way sort") {
        const auto ranked = rank_references({{3, 0.2}, {1, 0.7}, {2, 0.4}});
        CHECK(ranked[0].cit_id == 1);
        CHECK(ranked[1].cit_id == 2);
        CHECK(ranked[2].cit_id == 3);
    }
    SUBCASE("input order never matters and ranks are a permutation") {
        std::mt19937_64 rng(8);
        std::vector<std::pair<int, double>> scored;
        for (int i = 1; i <= 20; ++i)
            scored.emplace_back(i, static_cast<double>(rng() % 5) / 4.0);
        auto shuffled = scored;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto a = rank_references(scored);
        const auto b = rank_references(shuffled);
        REQUIRE(a.size() == b.size());
        std::set<int> ranks;
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].cit_id == b[i].cit_id);
            CHECK(a[i].rank == b[i].rank);
            ranks.insert(a[i].rank);
        }
        CHECK(ranks.size() == a.size());
        CHECK(*ranks.begin() == 1);
        CHECK(*ranks.rbegin() == static_cast<int>(a.size()));
    }
}

TEST_CASE("ndcg examples") {
    SUBCASE("ideal ordering scores 1") {
        const std::vector<double> labels = {3, 2, 0, 1};
        const std::vector<int> ideal = {0, 1, 3, 2};
        CHECK(ndcg(ideal, labels) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("all-zero labels score 1 by convention") {
        const std::vector<double> labels = {0, 0, 0};
        const std::vector<int> order = {2, 0, 1};
        CHECK(ndcg(order, labels) == 1.0);
    }
    SUBCASE("hand-computed reversed pair") {
        const std::vector<double> labels = {3, 1};
        const std::vector<int> reversed = {1, 0};
        const double dcg = 1.0 / std::log2(2.0) + 7.0 / std::log2(3.0);
        const double ideal = 7.0 / std::log2(2.0) + 1.0 / std::log2(3.0);
        CHECK(ndcg(reversed, labels) == doctest::Approx(dcg / ideal).epsilon(1e-12));
        CHECK(ndcg(reversed, labels) == doctest::Approx(0.7098).epsilon(1e-4));
    }
    SUBCASE("always within [0,1]") {
        std::mt19937_64 rng(12);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 2 + static_cast<int>(rng() % 8);
            std::vector<double> labels;
            std::vector<int> order(n);
            std::iota(order.begin(), order.end(), 0);
            for (int i = 0; i < n; ++i) labels.push_back(static_cast<double>(rng() % 4));
            std::shuffle(order.begin(), order.end(), rng);
            const double v = ndcg(order, labels);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("training pushes the relevant row above the irrelevant one") {
    Query q;
    q.rows = {feature(0.8, 5, 50, 1), feature(0.0, 1, 5, -1)};
    q.labels = {3.0, 0.0};
    LambdaMartConfig config;
    config.trees = 20;
    config.min_samples_leaf = 1;
    const auto model = train_lambdamart({q}, config);
    CHECK(model.score(q.rows[0]) > model.score(q.rows[1]));
}

TEST_CASE("constant labels produce a constant model") {
    Query q;
    q.rows = {feature(0.1, 1, 5, 0), feature(0.9, 9, 80, 1), feature(0.5, 4, 30, -1)};
    q.labels = {2.0, 2.0, 2.0};
    const auto model = train_lambdamart({q}, LambdaMartConfig{});
    const double s0 = model.score(q.rows[0]);
    CHECK(model.score(q.rows[1]) == s0);
    CHECK(model.score(q.rows[2]) == s0);
    CHECK(s0 == 0.0);
}

TEST_CASE("learning curve: held-out ndcg and monotone pairwise error") {
    std::mt19937_64 rng(42);
    const auto train_queries = synthetic_queries(60, rng);
    const auto held_out = synthetic_queries(20, rng);
    LambdaMartConfig config;
    config.trees = 60;
    LambdaMartStats stats;
    const auto model = train_lambdamart(train_queries, config, &stats);

    CHECK(mean_ndcg(model, held_out) >= 0.95);

    REQUIRE(stats.pairwise_error.size() == 61);
    for (std::size_t i = 1; i < stats.pairwise_error.size(); ++i)
        CHECK(stats.pairwise_error[i] <= stats.pairwise_error[i - 1] + 1e-12);
    CHECK(stats.pairwise_error.back() < stats.pairwise_error.front());
}

TEST_CASE("training is deterministic") {
    std::mt19937_64 rng_a(7);
    std::mt19937_64 rng_b(7);
    const auto qa = synthetic_queries(10, rng_a);
    const auto qb = synthetic_queries(10, rng_b);
    LambdaMartConfig config;
    config.trees = 15;
    const auto ma = train_lambdamart(qa, config);
    const auto mb = train_lambdamart(qb, config);
    for (const auto& q : qa)
        for (const auto& row : q.rows) CHECK(ma.score(row) == mb.score(row));
}

TEST_CASE("bad configuration throws") {
    Query q;
    q.rows = {feature(0, 1, 1, 0), feature(0, 2, 2, 0)};
    q.labels = {0.0, 1.0};
    LambdaMartConfig config;
    config.trees = 0;
    CHECK_THROWS(train_lambdamart({q}, config));
    config.trees = 10;
    config.learning_rate = -1.0;
    CHECK_THROWS(train_lambdamart({q}, config));
    Query single;
    single.rows = {feature(0, 1, 1, 0)};
    single.labels = {1.0};
    CHECK_THROWS(train_lambdamart({single}, LambdaMartConfig{}));
}

TEST_CASE("ranker model file round trip") {
    std::mt19937_64 rng(31);
    const auto queries = synthetic_queries(15, rng);
    LambdaMartConfig config;
    config.trees = 12;
    const auto model = train_lambdamart(queries, config);
    const auto path = std::filesystem::temp_directory_path() / "phocus_ranker_test.model";
    save_ranker_model(model, path);
    const auto loaded = load_ranker_model(path);
    for (const auto& q : queries)
        for (const auto& row : q.rows) CHECK(model.score(row) == loaded.score(row));
    std::filesystem::remove(path);
}
