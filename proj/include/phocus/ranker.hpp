#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace phocus {

// Feature quaternion of one citation occurrence. n_cit and au_overlap are
// per-reference quantities repeated on every row of that reference.
struct CitationFeature {
    double au_overlap = 0.0;
    double n_cit = 0.0;
    double cit_word = 0.0;
    double sen_label = 0.0;

    static constexpr int kDim = 4;
    double operator[](int i) const {
        switch (i) {
            case 0: return au_overlap;
            case 1: return n_cit;
            case 2: return cit_word;
            default: return sen_label;
        }
    }
};

// Axis-aligned regression tree stored as a flat node array; node 0 is the
// root. Leaves have feature = -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0; // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(const CitationFeature& x) const;
};

struct GBDTEnsemble {
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;

    // Sum of learning_rate * tree(x); 0.0 for an empty ensemble.
    double score(const CitationFeature& x) const;
};

double score_citation(const GBDTEnsemble& model, const CitationFeature& x);

// Mean of the per-occurrence scores of one reference. Empty input throws:
// references without mentions are excluded before ranking.
double score_reference(std::span<const double> occurrence_scores);

struct RankedReference {
    int cit_id = 0;
    double score = 0.0;
    int rank = 0;        // 1 = highest score
    int cls = -1;        // contribution class, filled by the pipeline
    double local_if = 0.0;
};

// Descending score, ties by ascending cit_id. Ranks are 1..R.
std::vector<RankedReference> rank_references(std::vector<std::pair<int, double>> scored);

// Normalized DCG with gain 2^label - 1 and log2(position+1) discount.
// `ranking[p]` is the index of the item at position p. Returns 1.0 when
// the ideal DCG is zero.
double ndcg(std::span<const int> ranking, std::span<const double> labels);

struct LambdaMartConfig {
    int trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 2;
    double sigma = 1.0;      // pairwise logistic steepness
    std::uint64_t seed = 0;  // accepted for interface stability; training is
                             // fully deterministic and does not consume it
};

struct Query {
    std::vector<CitationFeature> rows;
    std::vector<double> labels; // relevance, e.g. contribution classes 0..3
};

struct LambdaMartStats {
    // Fraction of mis-ordered training pairs after each boosting round
    // (index 0 = before any tree). Equal scores count as mis-ordered.
    std::vector<double> pairwise_error;
};

// Gradient-boosted trees fit to NDCG-weighted pairwise lambda gradients.
// Pairs with equal labels contribute nothing. Deterministic.
GBDTEnsemble train_lambdamart(const std::vector<Query>& queries, const LambdaMartConfig& config,
                              LambdaMartStats* stats = nullptr);

// Plain-text versioned model file.
void save_ranker_model(const GBDTEnsemble& model, const std::filesystem::path& path);
GBDTEnsemble load_ranker_model(const std::filesystem::path& path);

// Training file: per line "qid au_overlap n_cit cit_word sen_label label".
std::vector<Query> load_query_file(const std::filesystem::path& path);

} // namespace phocus
