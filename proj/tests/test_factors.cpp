#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <random>

#include "phocus/errors.hpp"
#include "phocus/factors.hpp"

using namespace phocus;

namespace {

Paper paper_with_mentions(const std::vector<CitationMention>& mentions) {
    Paper paper;
    paper.paper_id = "t";
    ReferenceEntry ref;
    ref.cit_id = 1;
    ref.title = "T";
    ref.year = 2000;
    ref.au_overlap = 0.25;
    paper.references.push_back(ref);
    paper.mentions = mentions;
    for (const auto& m : paper.mentions) paper.find_reference(m.cit_id)->n_cit += 1;
    return paper;
}

CitationMention mention(int sec, int sen, int words) {
    CitationMention m;
    m.cit_id = 1;
    m.sec_id = sec;
    m.sen_label = sen;
    m.cit_word = words;
    return m;
}

// Reconstructs the smoothed posterior from the raw training set, sharing
// no code with the classifier.
std::array<double, kClassCount> posterior_oracle(
    const std::vector<std::pair<FactorVector, int>>& train, const FactorVector& fv,
    double alpha) {
    std::array<double, kClassCount> class_count{};
    // counts[feature][bucket][class]
    double counts[5][3][kClassCount] = {};
    for (const auto& [x, y] : train) {
        class_count[y] += 1;
        const auto values = discretize(x).values();
        for (int f = 0; f < 5; ++f) counts[f][values[f]][y] += 1;
    }
    const double total = static_cast<double>(train.size());
    const auto values = discretize(fv).values();
    std::array<double, kClassCount> lp{};
    for (int c = 0; c < kClassCount; ++c) {
        lp[c] = std::log((class_count[c] + 1.0) / (total + 4.0));
        for (int f = 0; f < 5; ++f)
            lp[c] += std::log((counts[f][values[f]][c] + alpha) / (class_count[c] + 3.0 * alpha));
    }
    const double m = *std::max_element(lp.begin(), lp.end());
    double sum = 0.0;
    std::array<double, kClassCount> p{};
    for (int c = 0; c < kClassCount; ++c) {
        p[c] = std::exp(lp[c] - m);
        sum += p[c];
    }
    for (auto& v : p) v /= sum;
    return p;
}

FactorVector from_buckets(int au, int sec, int ncit, int words, int sen) {
    FactorVector fv;
    fv.au_overlap = au == 0 ? 0.0 : (au == 1 ? 0.25 : 0.75);
    fv.sec_id = sec;
    fv.n_cit = ncit == 0 ? 1 : (ncit == 1 ? 2 : 5);
    fv.cit_word = words == 0 ? 10 : (words == 1 ? 40 : 120);
    fv.sen_label = sen - 1;
    return fv;
}

// Deterministic class rule for the synthetic separable set.
int rule_label(const FactorVector& fv) {
    if (fv.sen_label < 0) return 0;
    if (fv.au_overlap >= 0.5) return 3;
    if (fv.sec_id == 1) return 2;
    return 1;
}

} // namespace

TEST_CASE("factor aggregation") {
    SUBCASE("single mention carries through") {
        const auto paper = paper_with_mentions({mention(1, 1, 12)});
        const auto fv = aggregate_factors(paper, 1);
        CHECK(fv.n_cit == 1);
        CHECK(fv.sen_label == 1);
        CHECK(fv.cit_word == 12);
        CHECK(fv.sec_id == 1);
        CHECK(fv.au_overlap == 0.25);
    }
    SUBCASE("opposite labels cancel to zero") {
        const auto paper = paper_with_mentions({mention(1, 1, 5), mention(1, -1, 5)});
        CHECK(aggregate_factors(paper, 1).sen_label == 0);
    }
    SUBCASE("section mode by count") {
        const auto paper =
            paper_with_mentions({mention(0, 0, 5), mention(1, 0, 5), mention(1, 0, 5)});
        CHECK(aggregate_factors(paper, 1).sec_id == 1);
    }
    SUBCASE("section ties break to the smaller code") {
        const auto paper = paper_with_mentions({mention(2, 0, 5), mention(0, 0, 5)});
        CHECK(aggregate_factors(paper, 1).sec_id == 0);
    }
    SUBCASE("unknown reference throws") {
        const auto paper = paper_with_mentions({mention(1, 0, 5)});
        CHECK_THROWS_AS(aggregate_factors(paper, 9), not_found_error);
    }
    SUBCASE("matches the document-model mention count") {
        const auto paper = paper_with_mentions({mention(1, 0, 5), mention(0, 0, 7)});
        CHECK(aggregate_factors(paper, 1).n_cit == paper.find_reference(1)->n_cit);
        CHECK(aggregate_factors(paper, 1).cit_word == 12);
    }
}

TEST_CASE("discretization buckets") {
    FactorVector fv;
    fv.au_overlap = 0.0;
    CHECK(discretize(fv).au_overlap == 0);
    fv.au_overlap = 0.49;
    CHECK(discretize(fv).au_overlap == 1);
    fv.au_overlap = 0.5;
    CHECK(discretize(fv).au_overlap == 2);

    fv.n_cit = 1;
    CHECK(discretize(fv).n_cit == 0);
    fv.n_cit = 3;
    CHECK(discretize(fv).n_cit == 1);
    fv.n_cit = 4;
    CHECK(discretize(fv).n_cit == 2);

    fv.cit_word = 25;
    CHECK(discretize(fv).cit_word == 0);
    fv.cit_word = 26;
    CHECK(discretize(fv).cit_word == 1);
    fv.cit_word = 81;
    CHECK(discretize(fv).cit_word == 2);

    fv.sen_label = -1;
    CHECK(discretize(fv).sen_label == 0);
    fv.sen_label = 1;
    CHECK(discretize(fv).sen_label == 2);
}

TEST_CASE("identical features, one example per class: tie goes to class 0") {
    std::vector<std::pair<FactorVector, int>> train;
    const auto fv = from_buckets(1, 1, 1, 1, 1);
    for (int c = 0; c < 4; ++c) train.emplace_back(fv, c);
    const auto model = train_classifier(train);
    const auto p = model.posterior(fv);
    for (int c = 1; c < 4; ++c) CHECK(p[c] == doctest::Approx(p[0]).epsilon(1e-12));
    CHECK(model.classify(fv) == 0);
}

TEST_CASE("negative sentiment seen only with class 0 pins the prediction") {
    std::vector<std::pair<FactorVector, int>> train;
    // Class 0 examples all carry sen_label -1; other classes never do.
    for (int i = 0; i < 10; ++i) {
        train.emplace_back(from_buckets(i % 3, i % 3, i % 3, i % 3, 0), 0);
        train.emplace_back(from_buckets(i % 3, i % 3, i % 3, i % 3, 1), 1);
        train.emplace_back(from_buckets(i % 3, (i + 1) % 3, i % 3, i % 3, 1), 2);
        train.emplace_back(from_buckets((i + 1) % 3, i % 3, i % 3, i % 3, 2), 3);
    }
    const auto model = train_classifier(train);
    for (int au = 0; au < 3; ++au)
        for (int sec = 0; sec < 3; ++sec)
            CHECK(model.classify(from_buckets(au, sec, 1, 1, 0)) == 0);
}

TEST_CASE("duplicated training set gives identical parameters") {
    std::vector<std::pair<FactorVector, int>> train;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 40; ++i) {
        const auto fv = from_buckets(static_cast<int>(rng() % 3), static_cast<int>(rng() % 3),
                                     static_cast<int>(rng() % 3), static_cast<int>(rng() % 3),
                                     static_cast<int>(rng() % 3));
        train.emplace_back(fv, rule_label(fv));
    }
    auto doubled = train;
    doubled.insert(doubled.end(), train.begin(), train.end());
    const auto a = train_classifier(train);
    const auto b = train_classifier(doubled);
    std::mt19937_64 probe(4);
    for (int i = 0; i < 50; ++i) {
        const auto fv = from_buckets(static_cast<int>(probe() % 3), static_cast<int>(probe() % 3),
                                     static_cast<int>(probe() % 3), static_cast<int>(probe() % 3),
                                     static_cast<int>(probe() % 3));
        CHECK(a.classify(fv) == b.classify(fv));
    }
}

TEST_CASE("posterior equals brute-force Bayes over the whole categorical space") {
    std::vector<std::pair<FactorVector, int>> train;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 120; ++i) {
        const auto fv = from_buckets(static_cast<int>(rng() % 3), static_cast<int>(rng() % 3),
                                     static_cast<int>(rng() % 3), static_cast<int>(rng() % 3),
                                     static_cast<int>(rng() % 3));
        train.emplace_back(fv, rule_label(fv));
    }
    const auto model = train_classifier(train);
    // All 3^5 = 243 possible discretized instances.
    for (int au = 0; au < 3; ++au)
        for (int sec = 0; sec < 3; ++sec)
            for (int nc = 0; nc < 3; ++nc)
                for (int cw = 0; cw < 3; ++cw)
                    for (int sen = 0; sen < 3; ++sen) {
                        const auto fv = from_buckets(au, sec, nc, cw, sen);
                        const auto p = model.posterior(fv);
                        const auto q = posterior_oracle(train, fv, 1.0);
                        for (int c = 0; c < 4; ++c)
                            CHECK(p[c] == doctest::Approx(q[c]).epsilon(1e-12));
                    }
}

TEST_CASE("held-out accuracy on the separable synthetic set") {
    std::mt19937_64 rng(99);
    auto draw = [&] {
        return from_buckets(static_cast<int>(rng() % 3), static_cast<int>(rng() % 3),
                            static_cast<int>(rng() % 3), static_cast<int>(rng() % 3),
                            static_cast<int>(rng() % 3));
    };
    std::vector<std::pair<FactorVector, int>> train;
    std::vector<std::pair<FactorVector, int>> held_out;
    for (int i = 0; i < 300; ++i) {
        const auto fv = draw();
        train.emplace_back(fv, rule_label(fv));
    }
    for (int i = 0; i < 100; ++i) {
        const auto fv = draw();
        held_out.emplace_back(fv, rule_label(fv));
    }
    const auto model = train_classifier(train);
    int correct = 0;
    for (const auto& [fv, label] : held_out)
        if (model.classify(fv) == label) ++correct;
    CHECK(correct >= 95);
}

TEST_CASE("classify always lands in 0..3") {
    std::vector<std::pair<FactorVector, int>> train = {
        {from_buckets(0, 0, 0, 0, 0), 0}, {from_buckets(2, 2, 2, 2, 2), 3}};
    const auto model = train_classifier(train);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        FactorVector fv;
        fv.au_overlap = static_cast<double>(rng() % 100) / 99.0;
        fv.sec_id = static_cast<int>(rng() % 3);
        fv.n_cit = static_cast<int>(rng() % 10);
        fv.cit_word = static_cast<int>(rng() % 200);
        fv.sen_label = static_cast<int>(rng() % 3) - 1;
        const int c = model.classify(fv);
        CHECK(c >= 0);
        CHECK(c <= 3);
    }
}

TEST_CASE("bootstrap labeler priority order") {
    FactorVector fv;
    fv.sen_label = -1;
    fv.au_overlap = 0.9; // negative sentiment outranks everything
    CHECK(bootstrap_label(fv) == 0);

    fv.sen_label = 0;
    CHECK(bootstrap_label(fv) == 3); // au_overlap >= 0.5

    fv.au_overlap = 0.2;
    fv.n_cit = 4;
    CHECK(bootstrap_label(fv) == 3); // heavily cited

    fv.n_cit = 2;
    fv.sec_id = 1;
    CHECK(bootstrap_label(fv) == 2); // main body

    fv.sec_id = 0;
    CHECK(bootstrap_label(fv) == 1);
}

TEST_CASE("empty or invalid training data throws") {
    CHECK_THROWS_AS(train_classifier({}), parse_error);
    CHECK_THROWS_AS(train_classifier({{FactorVector{}, 7}}), parse_error);
}

TEST_CASE("classifier model file round trip") {
    std::vector<std::pair<FactorVector, int>> train;
    std::mt19937_64 rng(21);
    for (int i = 0; i < 60; ++i) {
        const auto fv = from_buckets(static_cast<int>(rng() % 3), static_cast<int>(rng() % 3),
                                     static_cast<int>(rng() % 3), static_cast<int>(rng() % 3),
                                     static_cast<int>(rng() % 3));
        train.emplace_back(fv, rule_label(fv));
    }
    const auto model = train_classifier(train);
    const auto path = std::filesystem::temp_directory_path() / "phocus_classifier_test.model";
    save_citation_classifier(model, path);
    const auto loaded = load_citation_classifier(path);
    for (int i = 0; i < 243; ++i) {
        const auto fv = from_buckets(i % 3, (i / 3) % 3, (i / 9) % 3, (i / 27) % 3, (i / 81) % 3);
        CHECK(model.classify(fv) == loaded.classify(fv));
        const auto p = model.posterior(fv);
        const auto q = loaded.posterior(fv);
        for (int c = 0; c < 4; ++c) CHECK(p[c] == q[c]);
    }
    std::filesystem::remove(path);
}
