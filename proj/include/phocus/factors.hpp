#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "phocus/document.hpp"

namespace phocus {

// Contribution classes: 3 extending the work, 2 using the work,
// 1 related work, 0 negative sentiment towards the work.
inline constexpr int kClassCount = 4;

// Per-(paper, reference) feature record.
struct FactorVector {
    double au_overlap = 0.0; // [0,1]
    int sec_id = 0;          // dominant section of the reference's mentions
    int n_cit = 0;
    int cit_word = 0;        // summed over mentions
    int sen_label = 0;       // sign of the summed mention labels
};

// n_cit = mention count, cit_word = sum, sen_label = sign of sum,
// sec_id = mode (ties toward the smaller code). Unknown cit_id throws.
FactorVector aggregate_factors(const Paper& paper, int cit_id);

// Each factor mapped to one of three ordered buckets.
struct DiscreteFactors {
    int au_overlap = 0; // 0: zero, 1: (0,0.5), 2: [0.5,1]
    int sec_id = 0;     // pass-through
    int n_cit = 0;      // 0: <=1, 1: 2-3, 2: >=4
    int cit_word = 0;   // 0: <=25, 1: 26-80, 2: >80
    int sen_label = 0;  // label + 1

    std::array<int, 5> values() const { return {au_overlap, sec_id, n_cit, cit_word, sen_label}; }
};

DiscreteFactors discretize(const FactorVector& fv);

// Categorical Naive Bayes over the discretized factors. Count tables are
// kept so the model file stays human-readable and the posterior is
// reproducible from it.
struct CitationClassifier {
    double alpha = 1.0;
    std::array<long, kClassCount> class_counts{};
    long total = 0;
    // feature x bucket x class occurrence counts
    std::array<std::array<std::array<long, kClassCount>, 3>, 5> counts{};

    std::array<double, kClassCount> posterior(const FactorVector& fv) const;
    // Argmax posterior; ties go to the lower class.
    int classify(const FactorVector& fv) const;
};

CitationClassifier train_classifier(
    const std::vector<std::pair<FactorVector, int>>& labelled, double alpha = 1.0);

// Rule fallback for corpora without labelled data. Priority: negative
// sentiment, then extending (author overlap or heavy citing), then using
// (main body), else related work.
int bootstrap_label(const FactorVector& fv);

void save_citation_classifier(const CitationClassifier& model, const std::filesystem::path& path);
CitationClassifier load_citation_classifier(const std::filesystem::path& path);

// Labelled-data file: per line "au_overlap sec_id n_cit cit_word sen_label class".
std::vector<std::pair<FactorVector, int>> load_factor_corpus(const std::filesystem::path& path);

} // namespace phocus
