#include "phocus/span.hpp"

#include "phocus/errors.hpp"
#include "phocus/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace phocus {

namespace {

const std::set<std::string>& coordination_words() {
    static const std::set<std::string> words = {"and", "or", "but", "while", "whereas"};
    return words;
}

bool is_segment_boundary(const AnnotatedToken& token) {
    const std::string& t = token.text;
    if (t == "," || t == ";" || t == ":") return true;
    std::string lowered;
    lowered.reserve(t.size());
    for (unsigned char c : t) lowered.push_back(static_cast<char>(std::tolower(c)));
    return coordination_words().count(lowered) > 0;
}

// Segment number per token after splitting at punctuation and
// coordination conjunctions; the boundary token joins the segment on its
// left.
std::vector<int> segment_ids(const std::vector<AnnotatedToken>& tokens) {
    std::vector<int> out(tokens.size(), 0);
    int current = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        out[i] = current;
        if (is_segment_boundary(tokens[i])) ++current;
    }
    return out;
}

// Path to the root, starting at `index`. Empty when the token has no
// parse. Guards against malformed cyclic head chains.
std::vector<int> root_path(const std::vector<AnnotatedToken>& tokens, int index) {
    std::vector<int> path;
    int cur = index;
    while (cur >= 0 && path.size() <= tokens.size()) {
        path.push_back(cur);
        const int head = tokens[cur].dep_head;
        if (head == -2) return {}; // unparsed token somewhere on the chain
        if (head == -1) return path;
        if (head < 0 || head >= static_cast<int>(tokens.size())) return {};
        cur = head;
    }
    return {}; // cycle
}

std::string bucket_distance(int d) {
    if (d <= 6) return std::to_string(d);
    if (d <= 10) return "7-10";
    return ">10";
}

std::string bucket_tree_distance(int d) {
    if (d < 0) return "none";
    if (d <= 4) return std::to_string(d);
    return "5+";
}

} // namespace

std::vector<SpanFeatures> extract_span_features(const SpanSentence& sentence) {
    const auto& tokens = sentence.tokens;
    const int target = sentence.target;
    if (target < 0 || target >= static_cast<int>(tokens.size()))
        throw std::out_of_range("extract_span_features: target index out of range");

    const auto segments = segment_ids(tokens);
    const auto target_path = root_path(tokens, target);

    std::vector<SpanFeatures> out(tokens.size());
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
        SpanFeatures& f = out[i];
        f.distance = std::abs(i - target);
        f.position = i < target ? 1 : 0;
        f.segment = segments[i] == segments[target] ? 1 : 0;
        f.pos_cur = tokens[i].pos.empty() ? "none" : tokens[i].pos;
        f.pos_prev = i == 0 ? "<bos>" : (tokens[i - 1].pos.empty() ? "none" : tokens[i - 1].pos);
        f.pos_next = i + 1 == static_cast<int>(tokens.size())
                         ? "<eos>"
                         : (tokens[i + 1].pos.empty() ? "none" : tokens[i + 1].pos);

        f.dtree_distance = -1;
        f.lca = "none";
        if (!target_path.empty()) {
            const auto path = root_path(tokens, i);
            if (!path.empty()) {
                // First shared ancestor of the two root paths.
                int lca_node = -1;
                int pi = static_cast<int>(path.size()) - 1;
                int ti = static_cast<int>(target_path.size()) - 1;
                while (pi >= 0 && ti >= 0 && path[pi] == target_path[ti]) {
                    lca_node = path[pi];
                    --pi;
                    --ti;
                }
                if (lca_node >= 0) {
                    f.dtree_distance = (pi + 1) + (ti + 1);
                    const auto& lca_token = tokens[lca_node];
                    f.lca = !lca_token.dep_label.empty()
                                ? lca_token.dep_label
                                : (!lca_token.pos.empty() ? lca_token.pos : "none");
                }
            }
        }
    }
    return out;
}

std::vector<std::string> span_feature_names(const SpanFeatures& f) {
    return {
        "dist=" + bucket_distance(f.distance),
        "before=" + std::to_string(f.position),
        "seg=" + std::to_string(f.segment),
        "pos=" + f.pos_cur,
        "pos_prev=" + f.pos_prev,
        "pos_next=" + f.pos_next,
        "dtree=" + bucket_tree_distance(f.dtree_distance),
        "lca=" + f.lca,
    };
}

double SpanModel::decision(const SpanFeatures& f) const {
    double z = bias;
    for (const auto& name : span_feature_names(f)) {
        const auto it = weights.find(name);
        if (it != weights.end()) z += it->second;
    }
    return z;
}

SpanModel train_span(const std::vector<std::pair<SpanFeatures, int>>& data,
                     const SpanTrainConfig& config) {
    if (data.empty()) throw parse_error("span training data is empty");
    bool has_pos = false;
    bool has_neg = false;
    for (const auto& [f, y] : data) {
        if (y != 0) has_pos = true;
        else has_neg = true;
    }
    if (!has_pos || !has_neg)
        throw parse_error("span training data must contain both classes");

    // Feature ids in sorted-name order: independent of sample order and of
    // dataset duplication.
    std::map<std::string, int> feature_ids;
    for (const auto& [f, y] : data)
        for (const auto& name : span_feature_names(f)) feature_ids.emplace(name, 0);
    int next_id = 0;
    for (auto& [name, id] : feature_ids) id = next_id++;

    // Samples collapse into (active pattern, label) groups with counts, so
    // the gradient is a function of count proportions alone: duplicating
    // the data set changes nothing, bit for bit.
    std::map<std::pair<std::vector<int>, int>, long> groups;
    for (const auto& [f, y] : data) {
        std::vector<int> active;
        for (const auto& name : span_feature_names(f)) active.push_back(feature_ids.at(name));
        std::sort(active.begin(), active.end());
        groups[{std::move(active), y != 0 ? 1 : 0}] += 1;
    }

    const int dim = next_id;
    std::vector<double> w(dim, 0.0);
    double bias = 0.0;
    const double n = static_cast<double>(data.size());

    std::vector<double> grad(dim);
    for (int iter = 0; iter < config.iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (const auto& [group, count] : groups) {
            const auto& [active, label] = group;
            double z = bias;
            for (int id : active) z += w[id];
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double err = (p - label) * (static_cast<double>(count) / n);
            grad_bias += err;
            for (int id : active) grad[id] += err;
        }
        bias -= config.learning_rate * grad_bias;
        for (int id = 0; id < dim; ++id)
            w[id] -= config.learning_rate * (grad[id] + config.l2 * w[id]);
    }

    SpanModel model;
    model.bias = bias;
    for (const auto& [name, id] : feature_ids) model.weights.emplace(name, w[id]);
    return model;
}

std::vector<bool> label_span(const SpanModel& model, const SpanSentence& sentence) {
    std::vector<bool> out;
    for (const auto& f : extract_span_features(sentence)) out.push_back(model.predict(f));
    return out;
}

SpanModelFactory logistic_span_factory(const SpanTrainConfig& config) {
    return [config](const std::vector<SpanSentence>& train) -> SpanPredictor {
        std::vector<std::pair<SpanFeatures, int>> data;
        for (const auto& sentence : train) {
            const auto features = extract_span_features(sentence);
            for (std::size_t i = 0; i < features.size(); ++i) {
                const int gold = sentence.tokens[i].gold_in_span;
                if (gold < 0) continue;
                data.emplace_back(features[i], gold);
            }
        }
        SpanModel model = train_span(data, config);
        return [model](const SpanSentence& sentence) { return label_span(model, sentence); };
    };
}

CvMetrics cross_validate(const std::vector<SpanSentence>& data, int k, std::uint64_t seed,
                         const SpanModelFactory& factory) {
    const int n = static_cast<int>(data.size());
    if (k < 2) throw error("cross_validate: need at least 2 folds");
    if (k > n) throw error("cross_validate: more folds than sentences");

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    long tp = 0;
    long fp = 0;
    long fn = 0;
    for (int fold = 0; fold < k; ++fold) {
        // Contiguous slices of the shuffled order partition the sentences.
        const int begin = static_cast<int>(static_cast<long>(fold) * n / k);
        const int end = static_cast<int>(static_cast<long>(fold + 1) * n / k);
        std::vector<SpanSentence> train;
        std::vector<const SpanSentence*> test;
        for (int i = 0; i < n; ++i) {
            if (i >= begin && i < end)
                test.push_back(&data[perm[i]]);
            else
                train.push_back(data[perm[i]]);
        }
        const SpanPredictor predictor = factory(train);
        for (const SpanSentence* sentence : test) {
            const auto predicted = predictor(*sentence);
            for (std::size_t t = 0; t < sentence->tokens.size(); ++t) {
                const int gold = sentence->tokens[t].gold_in_span;
                if (gold < 0) continue;
                const bool hit = t < predicted.size() && predicted[t];
                if (hit && gold == 1) ++tp;
                else if (hit && gold == 0) ++fp;
                else if (!hit && gold == 1) ++fn;
            }
        }
    }

    CvMetrics m;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

void save_span_model(const SpanModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write span model: " + path.string());
    out << "phocus-span v1\n";
    out << "bias " << format_double(model.bias) << "\n";
    for (const auto& [name, weight] : model.weights)
        out << "w " << name << ' ' << format_double(weight) << "\n";
}

SpanModel load_span_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open span model: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "phocus-span v1")
        throw parse_error("span model: bad header in " + path.string());
    SpanModel model;
    std::string word;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        row >> word;
        if (word == "bias") {
            row >> word;
            model.bias = parse_double(word, "span model bias");
        } else if (word == "w") {
            std::string name;
            row >> name >> word;
            if (row.fail()) throw parse_error("span model: malformed weight row");
            model.weights.emplace(name, parse_double(word, "span model weight"));
        } else {
            throw parse_error("span model: unknown row '" + word + "'");
        }
    }
    return model;
}

namespace {

std::string field_or_underscore(const std::string& s) { return s.empty() ? "_" : s; }

} // namespace

void save_span_corpus(const std::vector<SpanSentence>& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write span corpus: " + path.string());
    for (const auto& sentence : data) {
        out << "sentence " << sentence.target << "\n";
        for (const auto& t : sentence.tokens) {
            out << t.text << ' ' << field_or_underscore(t.pos) << ' ';
            if (t.dep_head == -2) out << '_';
            else out << t.dep_head;
            out << ' ' << field_or_underscore(t.dep_label) << ' ';
            if (t.gold_in_span < 0) out << '_';
            else out << t.gold_in_span;
            out << "\n";
        }
        out << "\n";
    }
}

std::vector<SpanSentence> load_span_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw not_found_error("cannot open span corpus: " + path.string());
    std::vector<SpanSentence> data;
    SpanSentence current;
    bool open = false;
    std::string line;
    int line_no = 0;
    auto flush = [&] {
        if (!open) return;
        if (current.tokens.empty())
            throw parse_error("span corpus: sentence without tokens near line " +
                              std::to_string(line_no));
        if (current.target < 0 || current.target >= static_cast<int>(current.tokens.size()))
            throw parse_error("span corpus: target out of range near line " +
                              std::to_string(line_no));
        data.push_back(std::move(current));
        current = SpanSentence{};
        open = false;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            flush();
            continue;
        }
        std::istringstream row(line);
        std::string first;
        row >> first;
        if (first == "sentence") {
            flush();
            row >> current.target;
            if (row.fail())
                throw parse_error("span corpus line " + std::to_string(line_no) +
                                  ": expected 'sentence <target>'");
            open = true;
            continue;
        }
        if (!open)
            throw parse_error("span corpus line " + std::to_string(line_no) +
                              ": token row before sentence header");
        AnnotatedToken token;
        token.text = first;
        std::string pos;
        std::string head;
        std::string dep;
        std::string gold;
        row >> pos >> head >> dep >> gold;
        if (row.fail())
            throw parse_error("span corpus line " + std::to_string(line_no) +
                              ": expected 'text pos dep_head dep_label gold'");
        token.pos = pos == "_" ? "" : pos;
        token.dep_head = head == "_" ? -2 : static_cast<int>(parse_int(head, "span dep_head"));
        token.dep_label = dep == "_" ? "" : dep;
        token.gold_in_span = gold == "_" ? -1 : static_cast<int>(parse_int(gold, "span gold"));
        current.tokens.push_back(std::move(token));
    }
    flush();
    if (data.empty()) throw parse_error("span corpus is empty: " + path.string());
    return data;
}

} // namespace phocus
