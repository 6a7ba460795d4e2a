#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace phocus {

struct AnnotatedToken {
    std::string text;
    std::string pos;       // "" when no tag available
    int dep_head = -2;     // -2 no parse, -1 root, else token index
    std::string dep_label; // "" when no parse
    int gold_in_span = -1; // -1 unknown, else 0/1
};

struct SpanSentence {
    std::vector<AnnotatedToken> tokens;
    int target = 0; // index of the citation marker token
};

struct SpanFeatures {
    int distance = 0;       // words between token and marker, 0 only at the marker
    int position = 0;       // 1 iff the token precedes the marker
    int segment = 0;        // 1 iff same punctuation/conjunction segment as the marker
    std::string pos_cur;    // "none" sentinel when untagged
    std::string pos_prev;   // "<bos>" at the sentence start
    std::string pos_next;   // "<eos>" at the sentence end
    int dtree_distance = -1; // dependency path length, -1 when no parse
    std::string lca;        // LCA node type, "none" when unavailable
};

// One feature record per token. Throws std::out_of_range for a bad target.
std::vector<SpanFeatures> extract_span_features(const SpanSentence& sentence);

// One-hot names of every active feature; the learner and the model file
// share this encoding.
std::vector<std::string> span_feature_names(const SpanFeatures& f);

// L2-regularized logistic regression trained by full-batch gradient
// descent with a fixed iteration count; everything is deterministic and
// invariant under duplicating the training set.
struct SpanModel {
    double bias = 0.0;
    std::map<std::string, double> weights;

    double decision(const SpanFeatures& f) const;
    bool predict(const SpanFeatures& f) const { return decision(f) > 0.0; }
};

struct SpanTrainConfig {
    double l2 = 1e-4;
    int iterations = 500;
    double learning_rate = 0.5;
};

// Throws when only one class is present.
SpanModel train_span(const std::vector<std::pair<SpanFeatures, int>>& data,
                     const SpanTrainConfig& config = {});

std::vector<bool> label_span(const SpanModel& model, const SpanSentence& sentence);

struct CvMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// A predictor labels each token of a sentence; a factory builds one from
// training sentences. Stub factories plug straight into cross_validate.
using SpanPredictor = std::function<std::vector<bool>(const SpanSentence&)>;
using SpanModelFactory = std::function<SpanPredictor(const std::vector<SpanSentence>&)>;

SpanModelFactory logistic_span_factory(const SpanTrainConfig& config = {});

// Sentence-level k-fold cross-validation with a seeded shuffle;
// micro-averaged token precision/recall/F1 over the in-span class.
// Throws when k exceeds the sentence count.
CvMetrics cross_validate(const std::vector<SpanSentence>& data, int k = 10,
                         std::uint64_t seed = 0,
                         const SpanModelFactory& factory = logistic_span_factory());

void save_span_model(const SpanModel& model, const std::filesystem::path& path);
SpanModel load_span_model(const std::filesystem::path& path);

// Columnar corpus: "sentence <target>" then one "text pos dep_head
// dep_label gold" row per token ("_" for absent fields), blank line
// between sentences.
std::vector<SpanSentence> load_span_corpus(const std::filesystem::path& path);
void save_span_corpus(const std::vector<SpanSentence>& data, const std::filesystem::path& path);

} // namespace phocus
