#include "phocus/store.hpp"

#include "phocus/context.hpp"
#include "phocus/errors.hpp"
#include "phocus/factors.hpp"
#include "phocus/sentiment.hpp"
#include "phocus/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace phocus {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot write file: " + path.string());
    out << bytes;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

bool valid_paper_id(const std::string& id) {
    if (id.empty() || id.size() > 128) return false;
    for (unsigned char c : id)
        if (!std::isalnum(c) && c != '-' && c != '_' && c != '.') return false;
    return id != "." && id != "..";
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

} // namespace

CorpusStore::CorpusStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
    if (!std::filesystem::exists(manifest_path())) {
        nlohmann::json manifest;
        manifest["store_version"] = 1;
        manifest["models"] = nlohmann::json::object();
        save_manifest(manifest);
    }
}

nlohmann::json CorpusStore::load_manifest() const {
    nlohmann::json manifest;
    std::ifstream in(manifest_path());
    if (!in) throw error("store manifest missing: " + manifest_path().string());
    in >> manifest;
    return manifest;
}

void CorpusStore::save_manifest(const nlohmann::json& manifest) const {
    write_file(manifest_path(), manifest.dump(2) + "\n");
}

bool CorpusStore::known_model_name(const std::string& name) {
    return name == "sentiment" || name == "classifier" || name == "ranker" || name == "span";
}

void CorpusStore::register_model(const std::string& name, const std::filesystem::path& source) {
    if (!known_model_name(name))
        throw error("unknown model name '" + name +
                    "' (expected sentiment, classifier, ranker, or span)");
    const std::string bytes = read_file(source);
    const std::string version = hex64(fnv1a64(bytes));
    const std::string relative = "models/" + name + ".model";
    write_file(root_ / relative, bytes);
    auto manifest = load_manifest();
    manifest["models"][name] = {{"file", relative}, {"version", version}};
    save_manifest(manifest);
}

bool CorpusStore::has_model(const std::string& name) const {
    const auto manifest = load_manifest();
    return manifest.contains("models") && manifest["models"].contains(name);
}

std::filesystem::path CorpusStore::model_path(const std::string& name) const {
    const auto manifest = load_manifest();
    if (!manifest.contains("models") || !manifest["models"].contains(name))
        throw model_missing_error("no registered '" + name + "' model");
    return root_ / manifest["models"][name]["file"].get<std::string>();
}

std::string CorpusStore::model_version(const std::string& name) const {
    const auto manifest = load_manifest();
    if (!manifest.contains("models") || !manifest["models"].contains(name))
        throw model_missing_error("no registered '" + name + "' model");
    return manifest["models"][name]["version"].get<std::string>();
}

CorpusStore::IngestResult CorpusStore::ingest(const std::filesystem::path& document, bool force,
                                              bool strict) {
    ParseOptions options;
    options.strict = strict;
    const Paper paper = parse_paper_file(document, options);
    if (!valid_paper_id(paper.paper_id))
        throw parse_error("document.paper_id: '" + paper.paper_id +
                          "' is not usable as a store key (letters, digits, '._-' only)");

    const std::string bytes = paper_to_json(paper).dump(2) + "\n";
    const auto dir = paper_dir(paper.paper_id);
    const auto paper_file = dir / "paper.json";

    IngestResult result;
    result.paper_id = paper.paper_id;
    result.diagnostics = paper.diagnostics;

    if (std::filesystem::exists(paper_file)) {
        if (read_file(paper_file) == bytes) {
            result.unchanged = true; // same inputs: no-op
            return result;
        }
        if (!force)
            throw error("paper '" + paper.paper_id +
                        "' already stored with different content (use --force to replace)");
        std::filesystem::remove_all(dir); // drop stale stage artifacts
    }

    write_file(paper_file, bytes);
    std::string diag;
    for (const auto& d : paper.diagnostics) diag += d + "\n";
    write_file(dir / "diagnostics.txt", diag);
    return result;
}

std::vector<std::string> CorpusStore::paper_ids() const {
    std::vector<std::string> ids;
    const auto papers = root_ / "papers";
    if (std::filesystem::exists(papers)) {
        for (const auto& entry : std::filesystem::directory_iterator(papers))
            if (entry.is_directory() && std::filesystem::exists(entry.path() / "paper.json"))
                ids.push_back(entry.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

bool CorpusStore::has_paper(const std::string& paper_id) const {
    return std::filesystem::exists(paper_dir(paper_id) / "paper.json");
}

std::filesystem::path CorpusStore::paper_dir(const std::string& paper_id) const {
    return root_ / "papers" / paper_id;
}

Paper CorpusStore::load_paper(const std::string& paper_id) const {
    const auto file = paper_dir(paper_id) / "paper.json";
    if (!std::filesystem::exists(file))
        throw not_found_error("paper not in store: " + paper_id);
    nlohmann::json doc;
    std::ifstream in(file);
    in >> doc;
    return paper_from_json(doc);
}

CorpusStore::PipelineResult CorpusStore::run_pipeline(const std::string& paper_id) {
    return run_pipeline(paper_id, PipelineConfig{});
}

CorpusStore::PipelineResult CorpusStore::run_pipeline(const std::string& paper_id,
                                                      const PipelineConfig& config) {
    if (!has_paper(paper_id)) throw not_found_error("paper not in store: " + paper_id);
    if (!has_model("sentiment"))
        throw model_missing_error(
            "sentiment stage requires a 'sentiment' model (run train-sentiment)");
    if (!has_model("ranker"))
        throw model_missing_error(
            "ranking stage requires a 'ranker' model (run train-ranker or register-model)");

    const auto dir = paper_dir(paper_id);
    const std::string input_hash = hex64(fnv1a64(read_file(dir / "paper.json")));
    const std::string classifier_version =
        has_model("classifier") ? model_version("classifier") : "bootstrap";
    const std::string header = "# phocus pipeline input=" + input_hash +
                               " sentiment=" + model_version("sentiment") +
                               " classifier=" + classifier_version +
                               " ranker=" + model_version("ranker") +
                               " tau=" + format_double(config.tau) +
                               " max_span=" + std::to_string(config.max_span);

    PipelineResult result;
    const auto ranked_file = dir / "ranked.tsv";
    if (std::filesystem::exists(ranked_file)) {
        std::ifstream in(ranked_file);
        std::string first;
        std::getline(in, first);
        if (first == header) {
            result.skipped = true;
            result.ranked = static_cast<int>(load_ranked(paper_id).size());
            Paper stored = load_paper(paper_id);
            result.mentions = static_cast<int>(stored.mentions.size());
            return result;
        }
    }

    Paper paper = load_paper(paper_id);
    const SentimentModel sentiment_model = load_sentiment_model(model_path("sentiment"));
    const GBDTEnsemble ranker = load_ranker_model(model_path("ranker"));
    std::optional<CitationClassifier> classifier;
    if (has_model("classifier"))
        classifier = load_citation_classifier(model_path("classifier"));

    // Stage 1: contexts and per-mention factors.
    const LexicalRelatedness relatedness(config.tau);
    for (auto& m : paper.mentions) {
        m.context_a = extract_context(paper.sentences, m.sent_id, ContextDirection::backward,
                                      relatedness, config.max_span);
        m.context_b = extract_context(paper.sentences, m.sent_id, ContextDirection::forward,
                                      relatedness, config.max_span);
        m.cit_word = count_tokens(m.context_a) + count_tokens(m.cit_text) +
                     count_tokens(m.context_b);
        m.sen_label = sentiment(sentiment_model, m.cit_text, m.context_a, m.context_b);
    }

    // Stage 2: per-reference aggregation and classification.
    std::map<int, FactorVector> factors;
    std::map<int, int> classes;
    for (const auto& ref : paper.references) {
        const FactorVector fv = aggregate_factors(paper, ref.cit_id);
        factors.emplace(ref.cit_id, fv);
        classes.emplace(ref.cit_id,
                        classifier ? classifier->classify(fv) : bootstrap_label(fv));
    }

    // Stage 3: per-occurrence scoring, reference ranking, local influence.
    std::map<int, std::vector<double>> occurrence_scores;
    for (const auto& m : paper.mentions) {
        const FactorVector& fv = factors.at(m.cit_id);
        CitationFeature row;
        row.au_overlap = fv.au_overlap;
        row.n_cit = static_cast<double>(fv.n_cit);
        row.cit_word = static_cast<double>(m.cit_word);
        row.sen_label = static_cast<double>(m.sen_label);
        occurrence_scores[m.cit_id].push_back(score_citation(ranker, row));
    }
    std::vector<std::pair<int, double>> scored;
    for (const auto& [cit_id, scores] : occurrence_scores)
        scored.emplace_back(cit_id, score_reference(scores));
    std::vector<RankedReference> ranked = rank_references(std::move(scored));
    const int total_refs = static_cast<int>(ranked.size());
    for (auto& r : ranked) {
        r.cls = classes.at(r.cit_id);
        r.local_if = local_influence(r.cls, r.rank, total_refs);
    }

    // Persist each stage.
    {
        std::ostringstream out;
        out << header << "\n";
        out << "# mention\tcit_id\tsent_id\tsec_id\tsen_label\tcit_word\tcit_text\tcontext_a"
               "\tcontext_b\n";
        for (std::size_t i = 0; i < paper.mentions.size(); ++i) {
            const auto& m = paper.mentions[i];
            out << i << '\t' << m.cit_id << '\t' << m.sent_id << '\t' << m.sec_id << '\t'
                << m.sen_label << '\t' << m.cit_word << '\t' << m.cit_text << '\t' << m.context_a
                << '\t' << m.context_b << "\n";
        }
        write_file(dir / "mentions.tsv", out.str());
    }
    {
        std::ostringstream out;
        out << header << "\n";
        out << "# cit_id\tau_overlap\tsec_id\tn_cit\tcit_word\tsen_label\tclass\n";
        for (const auto& ref : paper.references) {
            const FactorVector& fv = factors.at(ref.cit_id);
            out << ref.cit_id << '\t' << format_double(fv.au_overlap) << '\t' << fv.sec_id << '\t'
                << fv.n_cit << '\t' << fv.cit_word << '\t' << fv.sen_label << '\t'
                << classes.at(ref.cit_id) << "\n";
        }
        write_file(dir / "factors.tsv", out.str());
    }
    {
        std::ostringstream out;
        out << header << "\n";
        out << "# cit_id\tclass\tscore\trank\tlocal_if\n";
        for (const auto& r : ranked) {
            out << r.cit_id << '\t' << r.cls << '\t' << format_double(r.score) << '\t' << r.rank
                << '\t' << format_double(r.local_if) << "\n";
        }
        write_file(ranked_file, out.str());
    }

    result.mentions = static_cast<int>(paper.mentions.size());
    result.ranked = total_refs;
    return result;
}

std::vector<CorpusStore::StoredRankedRow> CorpusStore::load_ranked(
    const std::string& paper_id) const {
    const auto file = paper_dir(paper_id) / "ranked.tsv";
    if (!std::filesystem::exists(file))
        throw not_found_error("no ranking artifact for paper " + paper_id +
                              " (run pipeline first)");
    std::ifstream in(file);
    std::string line;
    std::vector<StoredRankedRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 5) throw parse_error("ranked.tsv: malformed row '" + line + "'");
        StoredRankedRow row;
        row.cit_id = static_cast<int>(parse_int(fields[0], "ranked cit_id"));
        row.cls = static_cast<int>(parse_int(fields[1], "ranked class"));
        row.score = parse_double(fields[2], "ranked score");
        row.rank = static_cast<int>(parse_int(fields[3], "ranked rank"));
        row.local_if = parse_double(fields[4], "ranked local_if");
        rows.push_back(row);
    }
    return rows;
}

InfluenceGraph CorpusStore::build_graph() const {
    const auto ids = paper_ids();
    InfluenceGraph graph;
    std::map<std::string, std::vector<std::string>> by_title;
    std::map<std::string, Paper> papers;
    for (const auto& id : ids) {
        graph.add_node(id);
        Paper paper = load_paper(id);
        by_title[normalize_title(paper.title)].push_back(id);
        papers.emplace(id, std::move(paper));
    }

    for (const auto& id : ids) {
        const Paper& paper = papers.at(id);
        if (!paper.authors.empty()) {
            std::vector<std::pair<std::string, double>> shares;
            if (!paper.author_shares.empty()) {
                for (std::size_t i = 0; i < paper.authors.size(); ++i)
                    shares.emplace_back(paper.authors[i], paper.author_shares[i]);
            } else {
                const double equal = 1.0 / static_cast<double>(paper.authors.size());
                for (const auto& author : paper.authors) shares.emplace_back(author, equal);
            }
            // The same name listed twice collapses into one record.
            std::map<std::string, double> merged;
            for (const auto& [author, share] : shares) merged[author] += share;
            shares.assign(merged.begin(), merged.end());
            graph.set_author_shares(id, shares);
        }
    }
    return graph;
}

CorpusStore::PropagateOutcome CorpusStore::propagate(const PropagationOptions& options) {
    const auto ids = paper_ids();
    if (ids.empty()) throw not_found_error("store has no papers; run ingest first");

    InfluenceGraph graph = build_graph();

    // Edge snapshot from the per-paper ranking artifacts; a reference links
    // to a stored paper by exact (normalized) title match.
    std::map<std::string, std::vector<std::string>> by_title;
    for (const auto& id : ids) by_title[normalize_title(load_paper(id).title)].push_back(id);

    int edge_count = 0;
    bool any_ranked = false;
    std::ostringstream edges_out;
    for (const auto& citing : ids) {
        if (!std::filesystem::exists(paper_dir(citing) / "ranked.tsv")) continue;
        any_ranked = true;
        const Paper paper = load_paper(citing);
        auto rows = load_ranked(citing);
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.cit_id < b.cit_id; });
        for (const auto& row : rows) {
            const ReferenceEntry* ref = paper.find_reference(row.cit_id);
            if (ref == nullptr) continue;
            const auto it = by_title.find(normalize_title(ref->title));
            if (it == by_title.end() || it->second.size() != 1) continue;
            const std::string& cited = it->second.front();
            graph.add_edge(citing, cited, row.local_if);
            edges_out << citing << '\t' << cited << '\t' << format_double(row.local_if) << "\n";
            ++edge_count;
        }
    }
    if (!any_ranked)
        throw not_found_error("no paper has local influence factors yet; run pipeline first");

    const PropagationResult result = phocus::propagate(graph, options);

    std::ostringstream nodes_out;
    for (const auto& id : ids) nodes_out << id << "\n";
    std::ostringstream authors_out;
    for (const auto& [author, records] : graph.authors())
        for (const auto& [node, share] : records)
            authors_out << author << '\t' << graph.node_ids()[node] << '\t'
                        << format_double(share) << "\n";

    std::ostringstream af_papers_out;
    for (std::size_t i = 0; i < ids.size(); ++i)
        af_papers_out << graph.node_ids()[i] << '\t' << format_double(result.af[i]) << "\n";
    std::ostringstream af_authors_out;
    for (const auto& [author, af] : all_author_influence(graph, result.af))
        af_authors_out << author << '\t' << format_double(af) << "\n";

    write_file(root_ / "graph" / "nodes.tsv", nodes_out.str());
    write_file(root_ / "graph" / "edges.tsv", edges_out.str());
    write_file(root_ / "graph" / "authors.tsv", authors_out.str());
    write_file(root_ / "graph" / "af_papers.tsv", af_papers_out.str());
    write_file(root_ / "graph" / "af_authors.tsv", af_authors_out.str());

    PropagateOutcome outcome;
    outcome.nodes = static_cast<int>(ids.size());
    outcome.edges = edge_count;
    outcome.iterations = result.iterations;
    outcome.residual = result.residual;
    return outcome;
}

namespace {

std::map<std::string, double> load_two_column(const std::filesystem::path& path,
                                              const char* what) {
    if (!std::filesystem::exists(path))
        throw not_found_error(std::string(what) + " not computed yet; run propagate first");
    std::ifstream in(path);
    std::map<std::string, double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 2) throw parse_error(std::string(what) + ": malformed row");
        out.emplace(fields[0], parse_double(fields[1], what));
    }
    return out;
}

} // namespace

std::map<std::string, double> CorpusStore::load_af_papers() const {
    return load_two_column(root_ / "graph" / "af_papers.tsv", "paper influence table");
}

std::map<std::string, double> CorpusStore::load_af_authors() const {
    return load_two_column(root_ / "graph" / "af_authors.tsv", "author influence table");
}

std::vector<std::tuple<std::string, std::string, double>> CorpusStore::load_edges() const {
    const auto path = root_ / "graph" / "edges.tsv";
    if (!std::filesystem::exists(path))
        throw not_found_error("edge snapshot not computed yet; run propagate first");
    std::ifstream in(path);
    std::vector<std::tuple<std::string, std::string, double>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 3) throw parse_error("edges.tsv: malformed row");
        out.emplace_back(fields[0], fields[1], parse_double(fields[2], "edge weight"));
    }
    return out;
}

std::map<std::string, std::vector<std::pair<std::string, double>>>
CorpusStore::load_author_shares() const {
    const auto path = root_ / "graph" / "authors.tsv";
    if (!std::filesystem::exists(path))
        throw not_found_error("author share table not computed yet; run propagate first");
    std::ifstream in(path);
    std::map<std::string, std::vector<std::pair<std::string, double>>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 3) throw parse_error("authors.tsv: malformed row");
        out[fields[0]].emplace_back(fields[1], parse_double(fields[2], "author share"));
    }
    return out;
}

} // namespace phocus
