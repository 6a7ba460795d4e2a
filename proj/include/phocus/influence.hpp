#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phocus/ranker.hpp"

namespace phocus {

// Projects (class, rank) into the signed local influence factor in [-1,1].
// Within each class band the factor interpolates linearly with the rank
// weight w = (R-r)/(R-1), w = 1 for a single reference. Class 0 maps
// below zero, classes 1-3 above it.
double local_influence(int cls, int rank, int total_refs);

// Directed citation graph: an edge (citing -> cited, weight) carries the
// cited paper's local influence factor within the citing paper. Author
// records attach per-paper contribution shares that must sum to 1.
class InfluenceGraph {
public:
    int add_node(const std::string& paper_id); // idempotent, returns index
    bool has_node(const std::string& paper_id) const;
    int node_index(const std::string& paper_id) const; // throws not_found_error

    // Both endpoints must already be nodes; weight must lie in [-1,1].
    void add_edge(const std::string& citing, const std::string& cited, double weight);

    // shares: (author id, share); the shares of one paper must sum to 1
    // within 1e-9. Replaces any previous record for the paper.
    void set_author_shares(const std::string& paper_id,
                           const std::vector<std::pair<std::string, double>>& shares);

    std::size_t node_count() const { return ids_.size(); }
    const std::vector<std::string>& node_ids() const { return ids_; }
    // Incoming citers of `cited`, ordered by insertion.
    const std::vector<std::pair<int, double>>& citers(int cited) const { return citers_[cited]; }
    const std::map<std::string, std::vector<std::pair<int, double>>>& authors() const {
        return authors_;
    }

private:
    std::vector<std::string> ids_;
    std::map<std::string, int> index_;
    std::vector<std::vector<std::pair<int, double>>> citers_;
    std::map<std::string, std::vector<std::pair<int, double>>> authors_; // author -> (node, share)
};

struct PropagationOptions {
    double damping = 0.85; // in (0,1]
    double tol = 1e-9;
    int max_iter = 1000;
};

struct PropagationResult {
    std::vector<double> af; // aligned with graph.node_ids()
    int iterations = 0;
    double residual = 0.0;
};

// Synchronous (Jacobi) fixpoint of AF_A = 1 + d * sum_j AF_j * IF_jA from
// AF = 1. Throws divergence_error when max_iter passes without the
// residual dropping under tol.
PropagationResult propagate(const InfluenceGraph& graph, const PropagationOptions& options = {});

// In-place sweeps in the given node order (Gauss-Seidel). The converged
// values match propagate() for any order; used to demonstrate update-order
// independence.
PropagationResult propagate_sweep(const InfluenceGraph& graph, std::span<const int> order,
                                  const PropagationOptions& options = {});

// Exact single-pass evaluation in dependency order; requires an acyclic
// graph and matches the fixpoint of propagate().
std::vector<double> evaluate_dag(const InfluenceGraph& graph, double damping);

// AF_a = sum over the author's papers of share * AF. Unknown authors have
// no papers and score 0. Throws when `af` does not cover the graph.
double author_influence(const InfluenceGraph& graph, const std::string& author,
                        std::span<const double> af);

std::map<std::string, double> all_author_influence(const InfluenceGraph& graph,
                                                   std::span<const double> af);

// Scores every reference of a paper from its per-occurrence feature rows;
// returns one score per reference, aligned with the input.
using ReferenceSetScorer =
    std::function<std::vector<double>(const std::vector<std::vector<CitationFeature>>&)>;

ReferenceSetScorer make_ensemble_scorer(const GBDTEnsemble& model);

// True iff deleting any single reference leaves the pairwise order of the
// survivors unchanged (ranked by score descending, index ascending).
// Needs at least 3 references.
bool removal_invariance_check(const std::vector<std::vector<CitationFeature>>& reference_rows,
                              const ReferenceSetScorer& scorer);

} // namespace phocus
