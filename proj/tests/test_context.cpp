#include <doctest.h>

#include "phocus/context.hpp"

using namespace phocus;

namespace {

struct FixedVerdict final : RelatednessClassifier {
    bool value;
    explicit FixedVerdict(bool v) : value(v) {}
    RelatednessVerdict relatedness(std::string_view, std::string_view) const override {
        return {value, 1.0};
    }
};

// Related up to a fixed distance from the anchor, irrelevant beyond it.
struct DistanceVerdict final : RelatednessClassifier {
    const std::vector<Sentence>* sentences;
    int anchor;
    int limit;
    RelatednessVerdict relatedness(std::string_view s1, std::string_view) const override {
        for (const auto& s : *sentences)
            if (s.text == s1) return {std::abs(s.sent_id - anchor) <= limit, 1.0};
        return {false, 1.0};
    }
};

std::vector<Sentence> make_sentences(int count, int paragraph_of(int)) {
    std::vector<Sentence> out;
    for (int i = 0; i < count; ++i) {
        Sentence s;
        s.sent_id = i;
        s.text = "sentence number " + std::to_string(i) + " text";
        s.paragraph_id = paragraph_of(i);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

TEST_CASE("lexical relatedness verdicts") {
    const LexicalRelatedness classifier; // tau = 0.12

    SUBCASE("identical sentences with content are related") {
        const auto v = classifier.relatedness("the model works", "the model works");
        CHECK(v.related);
        CHECK(v.confidence == 1.0);
    }
    SUBCASE("no shared content words means irrelevant") {
        const auto v = classifier.relatedness("apples grow quickly", "neural networks converge");
        CHECK_FALSE(v.related);
        CHECK(v.confidence == 1.0);
    }
    SUBCASE("hand-computed jaccard crosses tau") {
        // stems: {model, use, attention, layer} vs {attention, layer, improve, model}
        // intersection 3, union 5 -> 0.6 >= 0.12
        const auto v = classifier.relatedness("the model uses attention layers",
                                              "attention layers improve the model");
        CHECK(v.related);
        CHECK(v.confidence == doctest::Approx(0.6).epsilon(1e-12));
    }
    SUBCASE("tau is a knob") {
        const LexicalRelatedness strict_classifier(0.7);
        CHECK_FALSE(strict_classifier
                        .relatedness("the model uses attention layers",
                                     "attention layers improve the model")
                        .related);
    }
}

TEST_CASE("context extraction boundaries") {
    // Paragraphs: 0-3 | 4-9 | 10-11
    auto sentences = make_sentences(12, [](int i) { return i < 4 ? 0 : (i < 10 ? 1 : 2); });

    SUBCASE("first sentence of its paragraph has empty backward context") {
        const FixedVerdict always_related(true);
        CHECK(extract_context(sentences, 4, ContextDirection::backward, always_related) == "");
    }
    SUBCASE("always-irrelevant stub gives empty contexts both ways") {
        const FixedVerdict never(false);
        CHECK(extract_context(sentences, 6, ContextDirection::backward, never) == "");
        CHECK(extract_context(sentences, 6, ContextDirection::forward, never) == "");
    }
    SUBCASE("always-related stub spans to the paragraph boundary") {
        const FixedVerdict always(true);
        CHECK(extract_context(sentences, 6, ContextDirection::backward, always) ==
              sentences[4].text + " " + sentences[5].text);
        CHECK(extract_context(sentences, 6, ContextDirection::forward, always) ==
              sentences[7].text + " " + sentences[8].text + " " + sentences[9].text);
    }
    SUBCASE("stop rule is monotone: nothing beyond the first irrelevant pair") {
        DistanceVerdict verdict;
        verdict.sentences = &sentences;
        verdict.anchor = 6;
        verdict.limit = 1;
        CHECK(extract_context(sentences, 6, ContextDirection::backward, verdict) ==
              sentences[5].text);
        CHECK(extract_context(sentences, 6, ContextDirection::forward, verdict) ==
              sentences[7].text);
    }
    SUBCASE("max_span caps the context length") {
        const FixedVerdict always(true);
        CHECK(extract_context(sentences, 9, ContextDirection::backward, always, 2) ==
              sentences[7].text + " " + sentences[8].text);
    }
    SUBCASE("document edges behave like boundaries") {
        const FixedVerdict always(true);
        CHECK(extract_context(sentences, 0, ContextDirection::backward, always) == "");
        CHECK(extract_context(sentences, 11, ContextDirection::forward, always) == "");
    }
    SUBCASE("bad sent_id throws") {
        const FixedVerdict always(true);
        CHECK_THROWS(extract_context(sentences, 99, ContextDirection::forward, always));
    }
}

TEST_CASE("extraction is deterministic") {
    auto sentences = make_sentences(8, [](int) { return 0; });
    const LexicalRelatedness classifier;
    const auto a = extract_context(sentences, 3, ContextDirection::backward, classifier);
    const auto b = extract_context(sentences, 3, ContextDirection::backward, classifier);
    CHECK(a == b);
}
