#include "phocus/influence.hpp"

#include "phocus/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace phocus {

double local_influence(int cls, int rank, int total_refs) {
    if (cls < 0 || cls > 3) throw std::invalid_argument("local_influence: class must be 0..3");
    if (total_refs < 1) throw std::invalid_argument("local_influence: need at least 1 reference");
    if (rank < 1 || rank > total_refs)
        throw std::invalid_argument("local_influence: rank outside 1..R");

    static constexpr double kLower[4] = {-1.0, 0.05, 0.35, 0.65};
    static constexpr double kUpper[4] = {-0.25, 0.35, 0.65, 1.0};
    const double w = total_refs > 1
                         ? static_cast<double>(total_refs - rank) / (total_refs - 1)
                         : 1.0;
    return kLower[cls] + (kUpper[cls] - kLower[cls]) * w;
}

int InfluenceGraph::add_node(const std::string& paper_id) {
    const auto it = index_.find(paper_id);
    if (it != index_.end()) return it->second;
    const int idx = static_cast<int>(ids_.size());
    ids_.push_back(paper_id);
    citers_.emplace_back();
    index_.emplace(paper_id, idx);
    return idx;
}

bool InfluenceGraph::has_node(const std::string& paper_id) const {
    return index_.count(paper_id) > 0;
}

int InfluenceGraph::node_index(const std::string& paper_id) const {
    const auto it = index_.find(paper_id);
    if (it == index_.end()) throw not_found_error("unknown paper in graph: " + paper_id);
    return it->second;
}

void InfluenceGraph::add_edge(const std::string& citing, const std::string& cited, double weight) {
    if (weight < -1.0 || weight > 1.0)
        throw std::invalid_argument("influence edge weight outside [-1,1]");
    const int citing_idx = node_index(citing);
    const int cited_idx = node_index(cited);
    citers_[cited_idx].emplace_back(citing_idx, weight);
}

void InfluenceGraph::set_author_shares(
    const std::string& paper_id, const std::vector<std::pair<std::string, double>>& shares) {
    const int idx = node_index(paper_id);
    double sum = 0.0;
    for (const auto& [author, share] : shares) sum += share;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("author shares of " + paper_id + " do not sum to 1");
    for (auto& [author, records] : authors_)
        records.erase(std::remove_if(records.begin(), records.end(),
                                     [&](const auto& r) { return r.first == idx; }),
                      records.end());
    for (const auto& [author, share] : shares) authors_[author].emplace_back(idx, share);
}

namespace {

double citation_sum(const InfluenceGraph& graph, std::span<const double> af, int node) {
    double sum = 0.0;
    for (const auto& [citer, weight] : graph.citers(node)) sum += af[citer] * weight;
    return sum;
}

[[noreturn]] void report_divergence(int max_iter, double residual) {
    throw divergence_error(
        "influence propagation did not converge within " + std::to_string(max_iter) +
        " iterations (residual " + std::to_string(residual) +
        "); the damped citation matrix likely has spectral radius >= 1 - retry with a smaller "
        "damping factor");
}

} // namespace

PropagationResult propagate(const InfluenceGraph& graph, const PropagationOptions& options) {
    if (options.damping <= 0.0 || options.damping > 1.0)
        throw std::invalid_argument("damping must lie in (0,1]");
    const std::size_t n = graph.node_count();
    PropagationResult result;
    result.af.assign(n, 1.0);
    std::vector<double> next(n);
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        double residual = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            next[v] = 1.0 + options.damping * citation_sum(graph, result.af, static_cast<int>(v));
            residual = std::max(residual, std::abs(next[v] - result.af[v]));
        }
        result.af.swap(next);
        result.iterations = iter;
        result.residual = residual;
        if (residual < options.tol) return result;
    }
    report_divergence(options.max_iter, result.residual);
}

PropagationResult propagate_sweep(const InfluenceGraph& graph, std::span<const int> order,
                                  const PropagationOptions& options) {
    if (options.damping <= 0.0 || options.damping > 1.0)
        throw std::invalid_argument("damping must lie in (0,1]");
    const std::size_t n = graph.node_count();
    if (order.size() != n) throw std::invalid_argument("sweep order must cover every node");

    PropagationResult result;
    result.af.assign(n, 1.0);
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        double residual = 0.0;
        for (int v : order) {
            const double updated = 1.0 + options.damping * citation_sum(graph, result.af, v);
            residual = std::max(residual, std::abs(updated - result.af[v]));
            result.af[v] = updated;
        }
        result.iterations = iter;
        result.residual = residual;
        if (residual < options.tol) return result;
    }
    report_divergence(options.max_iter, result.residual);
}

std::vector<double> evaluate_dag(const InfluenceGraph& graph, double damping) {
    const std::size_t n = graph.node_count();
    // Kahn's algorithm over the dependency "citer before cited".
    std::vector<int> pending(n, 0);
    std::vector<std::vector<int>> dependents(n); // citer -> papers it cites
    for (std::size_t v = 0; v < n; ++v) {
        pending[v] = static_cast<int>(graph.citers(static_cast<int>(v)).size());
        for (const auto& [citer, weight] : graph.citers(static_cast<int>(v)))
            dependents[citer].push_back(static_cast<int>(v));
    }
    std::vector<int> ready;
    for (std::size_t v = 0; v < n; ++v)
        if (pending[v] == 0) ready.push_back(static_cast<int>(v));

    std::vector<double> af(n, 0.0);
    std::size_t processed = 0;
    for (std::size_t k = 0; k < ready.size(); ++k) {
        const int v = ready[k];
        af[v] = 1.0 + damping * citation_sum(graph, af, v);
        ++processed;
        for (int w : dependents[v])
            if (--pending[w] == 0) ready.push_back(w);
    }
    if (processed != n)
        throw error("evaluate_dag: the citation graph contains a cycle");
    return af;
}

double author_influence(const InfluenceGraph& graph, const std::string& author,
                        std::span<const double> af) {
    if (af.size() != graph.node_count())
        throw error("author_influence: scores missing - run propagation first");
    const auto it = graph.authors().find(author);
    if (it == graph.authors().end()) return 0.0;
    double sum = 0.0;
    for (const auto& [node, share] : it->second) sum += share * af[node];
    return sum;
}

std::map<std::string, double> all_author_influence(const InfluenceGraph& graph,
                                                   std::span<const double> af) {
    std::map<std::string, double> out;
    for (const auto& [author, records] : graph.authors())
        out.emplace(author, author_influence(graph, author, af));
    return out;
}

ReferenceSetScorer make_ensemble_scorer(const GBDTEnsemble& model) {
    return [&model](const std::vector<std::vector<CitationFeature>>& refs) {
        std::vector<double> scores;
        scores.reserve(refs.size());
        for (const auto& rows : refs) {
            std::vector<double> per_occurrence;
            per_occurrence.reserve(rows.size());
            for (const auto& row : rows) per_occurrence.push_back(model.score(row));
            scores.push_back(score_reference(per_occurrence));
        }
        return scores;
    };
}

namespace {

// Indices ordered by (score desc, index asc) - the reference tie rule.
std::vector<int> order_of(const std::vector<int>& members, const std::vector<double>& scores) {
    std::vector<int> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return members[a] < members[b];
    });
    std::vector<int> ordered;
    ordered.reserve(order.size());
    for (int i : order) ordered.push_back(members[i]);
    return ordered;
}

} // namespace

bool removal_invariance_check(const std::vector<std::vector<CitationFeature>>& reference_rows,
                              const ReferenceSetScorer& scorer) {
    const int n = static_cast<int>(reference_rows.size());
    if (n < 3) throw error("removal_invariance_check: need at least 3 references");

    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    const auto base_order = order_of(all, scorer(reference_rows));
    std::vector<int> base_position(n);
    for (std::size_t p = 0; p < base_order.size(); ++p) base_position[base_order[p]] = static_cast<int>(p);

    for (int removed = 0; removed < n; ++removed) {
        std::vector<std::vector<CitationFeature>> subset;
        std::vector<int> members;
        for (int i = 0; i < n; ++i) {
            if (i == removed) continue;
            subset.push_back(reference_rows[i]);
            members.push_back(i);
        }
        const auto sub_order = order_of(members, scorer(subset));
        // The survivors must appear in the same relative order.
        for (std::size_t p = 1; p < sub_order.size(); ++p)
            if (base_position[sub_order[p - 1]] > base_position[sub_order[p]]) return false;
    }
    return true;
}

} // namespace phocus
