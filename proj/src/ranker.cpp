#include "phocus/ranker.hpp"

#include "phocus/errors.hpp"
#include "phocus/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace phocus {

double RegressionTree::predict(const CitationFeature& x) const {
    if (nodes.empty()) return 0.0;
    int idx = 0;
    while (nodes[idx].feature >= 0)
        idx = x[nodes[idx].feature] <= nodes[idx].threshold ? nodes[idx].left : nodes[idx].right;
    return nodes[idx].value;
}

double GBDTEnsemble::score(const CitationFeature& x) const {
    double sum = 0.0;
    for (const auto& tree : trees) sum += learning_rate * tree.predict(x);
    return sum;
}

double score_citation(const GBDTEnsemble& model, const CitationFeature& x) {
    return model.score(x);
}

double score_reference(std::span<const double> occurrence_scores) {
    if (occurrence_scores.empty())
        throw error("score_reference: reference has no citation occurrences");
    double sum = 0.0;
    for (double s : occurrence_scores) sum += s;
    return sum / static_cast<double>(occurrence_scores.size());
}

std::vector<RankedReference> rank_references(std::vector<std::pair<int, double>> scored) {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<RankedReference> out;
    out.reserve(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        RankedReference r;
        r.cit_id = scored[i].first;
        r.score = scored[i].second;
        r.rank = static_cast<int>(i) + 1;
        out.push_back(r);
    }
    return out;
}

namespace {

double gain(double label) { return std::exp2(label) - 1.0; }
double discount(std::size_t position) { return 1.0 / std::log2(static_cast<double>(position) + 2.0); }

double dcg_of(std::span<const int> order, std::span<const double> labels) {
    double dcg = 0.0;
    for (std::size_t p = 0; p < order.size(); ++p) dcg += gain(labels[order[p]]) * discount(p);
    return dcg;
}

std::vector<int> ideal_order(std::span<const double> labels) {
    std::vector<int> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return labels[a] > labels[b]; });
    return order;
}

} // namespace

double ndcg(std::span<const int> ranking, std::span<const double> labels) {
    if (ranking.size() != labels.size())
        throw error("ndcg: ranking and labels differ in length");
    const double ideal = dcg_of(ideal_order(labels), labels);
    if (ideal <= 0.0) return 1.0;
    return dcg_of(ranking, labels) / ideal;
}

namespace {

// Rows of all queries flattened; per-query bookkeeping by [begin, end).
struct FlatDataset {
    std::vector<CitationFeature> rows;
    std::vector<double> labels;
    std::vector<std::pair<int, int>> query_spans;
};

FlatDataset flatten(const std::vector<Query>& queries) {
    FlatDataset data;
    for (const auto& q : queries) {
        if (q.rows.size() != q.labels.size())
            throw error("train_lambdamart: rows and labels differ in length");
        if (q.rows.size() < 2)
            throw error("train_lambdamart: every query needs at least 2 rows");
        const int begin = static_cast<int>(data.rows.size());
        data.rows.insert(data.rows.end(), q.rows.begin(), q.rows.end());
        data.labels.insert(data.labels.end(), q.labels.begin(), q.labels.end());
        data.query_spans.emplace_back(begin, static_cast<int>(data.rows.size()));
    }
    return data;
}

// Positions of each row when the query is sorted by current score
// (descending, ties by row index).
std::vector<int> score_positions(std::span<const double> scores, int begin, int end,
                                 std::vector<int>& order_buf) {
    order_buf.resize(end - begin);
    std::iota(order_buf.begin(), order_buf.end(), begin);
    std::sort(order_buf.begin(), order_buf.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<int> pos(end - begin);
    for (std::size_t p = 0; p < order_buf.size(); ++p) pos[order_buf[p] - begin] = static_cast<int>(p);
    return pos;
}

double pairwise_error_fraction(const FlatDataset& data, std::span<const double> scores) {
    long total = 0;
    long wrong = 0;
    for (const auto& [begin, end] : data.query_spans) {
        for (int i = begin; i < end; ++i) {
            for (int j = begin; j < end; ++j) {
                if (data.labels[i] <= data.labels[j]) continue;
                ++total;
                if (scores[i] <= scores[j]) ++wrong;
            }
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(total);
}

struct SplitResult {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Exact greedy least-squares split over the lambda targets.
SplitResult best_split(const std::vector<CitationFeature>& rows, std::span<const double> targets,
                       const std::vector<int>& samples, int min_leaf) {
    SplitResult best;
    const int n = static_cast<int>(samples.size());
    if (n < 2 * min_leaf) return best;

    double total_sum = 0.0;
    for (int s : samples) total_sum += targets[s];

    std::vector<std::pair<double, int>> sorted(n);
    for (int f = 0; f < CitationFeature::kDim; ++f) {
        for (int i = 0; i < n; ++i) sorted[i] = {rows[samples[i]][f], samples[i]};
        std::sort(sorted.begin(), sorted.end());

        double left_sum = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            left_sum += targets[sorted[i].second];
            if (sorted[i].first == sorted[i + 1].first) continue;
            const int left_n = i + 1;
            const int right_n = n - left_n;
            if (left_n < min_leaf || right_n < min_leaf) continue;
            const double right_sum = total_sum - left_sum;
            // Variance-reduction gain, constant terms dropped.
            const double g = left_sum * left_sum / left_n + right_sum * right_sum / right_n -
                             total_sum * total_sum / n;
            if (g > best.gain + 1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold = (sorted[i].first + sorted[i + 1].first) / 2.0;
                best.gain = g;
            }
        }
    }
    return best;
}

int build_node(RegressionTree& tree, const std::vector<CitationFeature>& rows,
               std::span<const double> lambdas, std::span<const double> hessians,
               std::vector<int>& samples, int depth, const LambdaMartConfig& config) {
    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    SplitResult split;
    if (depth < config.max_depth)
        split = best_split(rows, lambdas, samples, config.min_samples_leaf);

    if (!split.found) {
        double num = 0.0;
        double den = 0.0;
        for (int s : samples) {
            num += lambdas[s];
            den += hessians[s];
        }
        // Newton step per leaf; flat regions yield a zero leaf.
        tree.nodes[node_index].value = den > 1e-12 ? num / den : 0.0;
        return node_index;
    }

    std::vector<int> left;
    std::vector<int> right;
    for (int s : samples) {
        if (rows[s][split.feature] <= split.threshold)
            left.push_back(s);
        else
            right.push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    tree.nodes[node_index].feature = split.feature;
    tree.nodes[node_index].threshold = split.threshold;
    const int left_index = build_node(tree, rows, lambdas, hessians, left, depth + 1, config);
    tree.nodes[node_index].left = left_index;
    const int right_index = build_node(tree, rows, lambdas, hessians, right, depth + 1, config);
    tree.nodes[node_index].right = right_index;
    return node_index;
}

} // namespace

GBDTEnsemble train_lambdamart(const std::vector<Query>& queries, const LambdaMartConfig& config,
                              LambdaMartStats* stats) {
    if (config.trees <= 0) throw error("train_lambdamart: tree count must be positive");
    if (config.learning_rate <= 0.0) throw error("train_lambdamart: learning rate must be positive");
    if (config.max_depth <= 0) throw error("train_lambdamart: max depth must be positive");
    if (config.min_samples_leaf <= 0) throw error("train_lambdamart: min leaf size must be positive");

    FlatDataset data = flatten(queries);
    const int n = static_cast<int>(data.rows.size());

    GBDTEnsemble model;
    model.learning_rate = config.learning_rate;

    std::vector<double> scores(n, 0.0);
    std::vector<double> lambdas(n);
    std::vector<double> hessians(n);
    std::vector<int> order_buf;

    // Per-query ideal DCG for the NDCG swap weights.
    std::vector<double> ideal_dcg;
    for (const auto& [begin, end] : data.query_spans) {
        std::span<const double> labels(data.labels.data() + begin, end - begin);
        ideal_dcg.push_back(dcg_of(ideal_order(labels), labels));
    }

    if (stats != nullptr) {
        stats->pairwise_error.clear();
        stats->pairwise_error.push_back(pairwise_error_fraction(data, scores));
    }

    for (int round = 0; round < config.trees; ++round) {
        std::fill(lambdas.begin(), lambdas.end(), 0.0);
        std::fill(hessians.begin(), hessians.end(), 0.0);

        for (std::size_t qi = 0; qi < data.query_spans.size(); ++qi) {
            const auto [begin, end] = data.query_spans[qi];
            if (ideal_dcg[qi] <= 0.0) continue; // constant labels: no signal
            const auto pos = score_positions(scores, begin, end, order_buf);
            for (int i = begin; i < end; ++i) {
                for (int j = begin; j < end; ++j) {
                    if (data.labels[i] <= data.labels[j]) continue;
                    const double swap_delta =
                        std::abs((gain(data.labels[i]) - gain(data.labels[j])) *
                                 (discount(pos[i - begin]) - discount(pos[j - begin]))) /
                        ideal_dcg[qi];
                    const double rho =
                        1.0 / (1.0 + std::exp(config.sigma * (scores[i] - scores[j])));
                    const double step = config.sigma * rho * swap_delta;
                    lambdas[i] += step;
                    lambdas[j] -= step;
                    const double curvature =
                        config.sigma * config.sigma * rho * (1.0 - rho) * swap_delta;
                    hessians[i] += curvature;
                    hessians[j] += curvature;
                }
            }
        }

        RegressionTree tree;
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        build_node(tree, data.rows, lambdas, hessians, all, 0, config);
        for (int i = 0; i < n; ++i)
            scores[i] += config.learning_rate * tree.predict(data.rows[i]);
        model.trees.push_back(std::move(tree));

        if (stats != nullptr)
            stats->pairwise_error.push_back(pairwise_error_fraction(data, scores));
    }
    return model;
}

void save_ranker_model(const GBDTEnsemble& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write ranker model: " + path.string());
    out << "phocus-ranker v1\n";
    out << "learning_rate " << format_double(model.learning_rate) << "\n";
    out << "trees " << model.trees.size() << "\n";
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& tree = model.trees[t];
        out << "tree " << t << " nodes " << tree.nodes.size() << "\n";
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const auto& node = tree.nodes[i];
            if (node.feature >= 0) {
                out << "split " << i << ' ' << node.feature << ' '
                    << format_double(node.threshold) << ' ' << node.left << ' ' << node.right
                    << "\n";
            } else {
                out << "leaf " << i << ' ' << format_double(node.value) << "\n";
            }
        }
    }
}

GBDTEnsemble load_ranker_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open ranker model: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "phocus-ranker v1")
        throw parse_error("ranker model: bad header in " + path.string());

    GBDTEnsemble model;
    RegressionTree* current = nullptr;
    std::string word;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        row >> word;
        if (word == "learning_rate") {
            row >> word;
            model.learning_rate = parse_double(word, "ranker learning_rate");
        } else if (word == "trees") {
            continue;
        } else if (word == "tree") {
            std::size_t index = 0;
            std::size_t node_count = 0;
            row >> index >> word >> node_count;
            if (row.fail() || word != "nodes") throw parse_error("ranker model: bad tree row");
            model.trees.emplace_back();
            current = &model.trees.back();
            current->nodes.resize(node_count);
        } else if (word == "split" || word == "leaf") {
            if (current == nullptr) throw parse_error("ranker model: node before tree header");
            std::size_t index = 0;
            row >> index;
            if (row.fail() || index >= current->nodes.size())
                throw parse_error("ranker model: bad node index");
            TreeNode& node = current->nodes[index];
            if (word == "split") {
                row >> node.feature;
                row >> word;
                node.threshold = parse_double(word, "ranker split threshold");
                row >> node.left >> node.right;
                if (row.fail() || node.feature < 0 || node.feature >= CitationFeature::kDim ||
                    node.left < 0 || node.right < 0 ||
                    node.left >= static_cast<int>(current->nodes.size()) ||
                    node.right >= static_cast<int>(current->nodes.size()))
                    throw parse_error("ranker model: bad split row");
            } else {
                row >> word;
                node.value = parse_double(word, "ranker leaf value");
                node.feature = -1;
            }
        } else {
            throw parse_error("ranker model: unknown row '" + word + "'");
        }
    }
    return model;
}

std::vector<Query> load_query_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw not_found_error("cannot open ranker training file: " + path.string());
    std::map<long, Query> by_query;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        std::istringstream row(line);
        long qid = 0;
        CitationFeature x;
        double label = 0;
        row >> qid >> x.au_overlap >> x.n_cit >> x.cit_word >> x.sen_label >> label;
        if (row.fail())
            throw parse_error("ranker training line " + std::to_string(line_no) +
                              ": expected 'qid au_overlap n_cit cit_word sen_label label'");
        by_query[qid].rows.push_back(x);
        by_query[qid].labels.push_back(label);
    }
    std::vector<Query> queries;
    queries.reserve(by_query.size());
    for (auto& [qid, q] : by_query) queries.push_back(std::move(q));
    if (queries.empty()) throw parse_error("ranker training file is empty: " + path.string());
    return queries;
}

} // namespace phocus
