#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phocus/document.hpp"
#include "phocus/influence.hpp"
#include "phocus/ranker.hpp"

namespace phocus {

// On-disk corpus store: one directory per paper with plain-text artifacts,
// a model registry versioned by content hash, and a graph snapshot. Every
// artifact carries the versions that produced it, so re-running a stage
// with unchanged inputs is a no-op and whole stores diff cleanly.
class CorpusStore {
public:
    explicit CorpusStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    // --- model registry -------------------------------------------------
    static bool known_model_name(const std::string& name);
    void register_model(const std::string& name, const std::filesystem::path& source);
    bool has_model(const std::string& name) const;
    std::filesystem::path model_path(const std::string& name) const; // throws model_missing_error
    std::string model_version(const std::string& name) const;

    // --- papers ----------------------------------------------------------
    struct IngestResult {
        std::string paper_id;
        std::vector<std::string> diagnostics;
        bool unchanged = false; // same bytes were already stored
    };
    IngestResult ingest(const std::filesystem::path& document, bool force, bool strict);

    std::vector<std::string> paper_ids() const; // sorted
    bool has_paper(const std::string& paper_id) const;
    Paper load_paper(const std::string& paper_id) const; // throws not_found_error
    std::filesystem::path paper_dir(const std::string& paper_id) const;

    // --- pipeline ----------------------------------------------------------
    struct PipelineConfig {
        double tau = 0.12; // context.tau
        int max_span = 0;  // context.max_span, 0 = unlimited
    };
    struct PipelineResult {
        bool skipped = false; // artifacts were already current
        int mentions = 0;
        int ranked = 0;
    };
    PipelineResult run_pipeline(const std::string& paper_id, const PipelineConfig& config);
    PipelineResult run_pipeline(const std::string& paper_id);

    struct StoredRankedRow {
        int cit_id = 0;
        int cls = 0;
        double score = 0.0;
        int rank = 0;
        double local_if = 0.0;
    };
    std::vector<StoredRankedRow> load_ranked(const std::string& paper_id) const;

    // --- graph and propagation ----------------------------------------------
    struct PropagateOutcome {
        int nodes = 0;
        int edges = 0;
        int iterations = 0;
        double residual = 0.0;
    };
    PropagateOutcome propagate(const PropagationOptions& options = {});

    std::map<std::string, double> load_af_papers() const;  // throws not_found_error
    std::map<std::string, double> load_af_authors() const;
    // citing -> [(cited, IF)] edge snapshot, for reports
    std::vector<std::tuple<std::string, std::string, double>> load_edges() const;
    std::map<std::string, std::vector<std::pair<std::string, double>>> load_author_shares() const;

private:
    std::filesystem::path root_;

    std::filesystem::path manifest_path() const { return root_ / "manifest.json"; }
    nlohmann::json load_manifest() const;
    void save_manifest(const nlohmann::json& manifest) const;
    InfluenceGraph build_graph() const;
};

} // namespace phocus
