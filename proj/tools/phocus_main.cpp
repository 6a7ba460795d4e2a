#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "phocus/errors.hpp"
#include "phocus/factors.hpp"
#include "phocus/ranker.hpp"
#include "phocus/sentiment.hpp"
#include "phocus/span.hpp"
#include "phocus/store.hpp"
#include "phocus/text.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotFound = 2;
constexpr int kExitModelMissing = 3;
constexpr int kExitDivergence = 4;

struct GlobalOptions {
    std::string store = "phocus-store";
    std::uint64_t seed = 0;
    bool strict = false;
};

void print_af_report(const std::map<std::string, double>& table,
                     const std::map<std::string, std::vector<std::pair<std::string, double>>>&
                         contributions,
                     const std::string& only) {
    // Descending influence, ties by id.
    std::vector<std::pair<std::string, double>> rows(table.begin(), table.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [id, af] : rows) {
        if (!only.empty() && id != only) continue;
        std::string detail;
        const auto it = contributions.find(id);
        if (it != contributions.end()) {
            for (const auto& [other, value] : it->second) {
                if (!detail.empty()) detail += ",";
                detail += other + ":" + phocus::format_double(value);
            }
        }
        std::cout << id << '\t' << phocus::format_double(af) << '\t' << detail << "\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"citation influence engine"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--store", global.store, "corpus store directory")->envname("PHOCUS_STORE");
    app.add_option("--seed", global.seed, "seed for randomized procedures");
    app.add_flag("--strict", global.strict, "treat unresolved citation markers as fatal");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse a document and store it");
    std::string ingest_path;
    bool ingest_force = false;
    ingest->add_option("document", ingest_path, "document file")->required();
    ingest->add_flag("--force", ingest_force, "replace an existing paper with different content");

    // pipeline
    auto* pipeline = app.add_subcommand(
        "pipeline", "run context, sentiment, factors, classes, ranking, local influence");
    std::string pipeline_paper;
    bool pipeline_all = false;
    double pipeline_tau = 0.12;
    int pipeline_max_span = 0;
    pipeline->add_option("paper_id", pipeline_paper, "paper to process");
    pipeline->add_flag("--all", pipeline_all, "process every stored paper");
    pipeline->add_option("--tau", pipeline_tau, "context.tau relatedness threshold");
    pipeline->add_option("--max-span", pipeline_max_span,
                         "context.max_span cap on context sentences per side (0 = unlimited)");

    // propagate
    auto* propagate = app.add_subcommand("propagate", "propagate influence over the graph");
    phocus::PropagationOptions prop_options;
    propagate->add_option("--damping", prop_options.damping, "damping factor in (0,1]");
    propagate->add_option("--tol", prop_options.tol, "convergence tolerance");
    propagate->add_option("--max-iter", prop_options.max_iter, "iteration budget");

    // report
    auto* report = app.add_subcommand("report", "print influence tables");
    std::string report_kind;
    std::string report_id;
    report->add_option("kind", report_kind, "'paper' or 'author'")
        ->required()
        ->check(CLI::IsMember({"paper", "author"}));
    report->add_option("id", report_id, "restrict to one id");

    // train-sentiment
    auto* train_sent = app.add_subcommand("train-sentiment", "train the sentiment model");
    std::string train_sent_file;
    double train_sent_alpha = 1.0;
    train_sent->add_option("corpus", train_sent_file, "labelled corpus (text<TAB>label)")
        ->required();
    train_sent->add_option("--alpha", train_sent_alpha, "Laplace smoothing");

    // train-classifier
    auto* train_cls = app.add_subcommand("train-classifier", "train the citation classifier");
    std::string train_cls_file;
    double train_cls_alpha = 1.0;
    train_cls->add_option("corpus", train_cls_file, "labelled factor records")->required();
    train_cls->add_option("--alpha", train_cls_alpha, "Laplace smoothing");

    // train-ranker
    auto* train_rank = app.add_subcommand("train-ranker", "train the reference ranker");
    std::string train_rank_file;
    phocus::LambdaMartConfig rank_config;
    train_rank->add_option("queries", train_rank_file, "query/label training file")->required();
    train_rank->add_option("--trees", rank_config.trees, "boosting rounds");
    train_rank->add_option("--depth", rank_config.max_depth, "tree depth");
    train_rank->add_option("--learning-rate", rank_config.learning_rate, "shrinkage");
    train_rank->add_option("--min-leaf", rank_config.min_samples_leaf, "min samples per leaf");

    // train-span
    auto* train_span_cmd = app.add_subcommand("train-span", "train the citation span labeler");
    std::string train_span_file;
    phocus::SpanTrainConfig span_config;
    train_span_cmd->add_option("corpus", train_span_file, "annotated span corpus")->required();
    train_span_cmd->add_option("--l2", span_config.l2, "L2 regularization");
    train_span_cmd->add_option("--iterations", span_config.iterations, "gradient steps");
    train_span_cmd->add_option("--learning-rate", span_config.learning_rate, "step size");

    // cross-validate-span
    auto* cv_span = app.add_subcommand("cross-validate-span",
                                       "k-fold cross-validation of the span labeler");
    std::string cv_span_file;
    int cv_span_k = 10;
    cv_span->add_option("corpus", cv_span_file, "annotated span corpus")->required();
    cv_span->add_option("-k,--folds", cv_span_k, "fold count");

    // register-model
    auto* register_model = app.add_subcommand("register-model",
                                              "register a pre-built model file");
    std::string register_name;
    std::string register_file;
    register_model->add_option("name", register_name, "sentiment|classifier|ranker|span")
        ->required();
    register_model->add_option("file", register_file, "model file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "error: usage: " << e.what() << "\n";
        return kExitUsage;
    }

    phocus::CorpusStore store{std::filesystem::path(global.store)};

    if (ingest->parsed()) {
        const auto result = store.ingest(ingest_path, ingest_force, global.strict);
        for (const auto& d : result.diagnostics) std::cout << "diagnostic: " << d << "\n";
        std::cout << "ingested " << result.paper_id
                  << (result.unchanged ? " (unchanged)" : "") << "\n";
        return kExitOk;
    }

    if (pipeline->parsed()) {
        if (pipeline_all == !pipeline_paper.empty())
            throw phocus::error("pipeline: give either a paper_id or --all");
        phocus::CorpusStore::PipelineConfig config;
        config.tau = pipeline_tau;
        config.max_span = pipeline_max_span;
        const std::vector<std::string> targets =
            pipeline_all ? store.paper_ids() : std::vector<std::string>{pipeline_paper};
        if (targets.empty()) throw phocus::not_found_error("store has no papers");
        for (const auto& id : targets) {
            const auto result = store.run_pipeline(id, config);
            std::cout << "pipeline " << id << ": " << result.mentions << " mentions, "
                      << result.ranked << " ranked references"
                      << (result.skipped ? " (up to date)" : "") << "\n";
        }
        return kExitOk;
    }

    if (propagate->parsed()) {
        const auto outcome = store.propagate(prop_options);
        std::cout << "propagated " << outcome.nodes << " papers, " << outcome.edges
                  << " edges: iterations=" << outcome.iterations
                  << " residual=" << phocus::format_double(outcome.residual) << "\n";
        return kExitOk;
    }

    if (report->parsed()) {
        if (report_kind == "paper") {
            const auto table = store.load_af_papers();
            if (!report_id.empty() && table.find(report_id) == table.end())
                throw phocus::not_found_error("unknown paper id: " + report_id);
            // Contributions: citers of each paper with edge weights.
            std::map<std::string, std::vector<std::pair<std::string, double>>> incoming;
            for (const auto& [citing, cited, weight] : store.load_edges())
                incoming[cited].emplace_back(citing, weight);
            print_af_report(table, incoming, report_id);
        } else {
            const auto table = store.load_af_authors();
            if (!report_id.empty() && table.find(report_id) == table.end())
                throw phocus::not_found_error("unknown author id: " + report_id);
            print_af_report(table, store.load_author_shares(), report_id);
        }
        return kExitOk;
    }

    if (train_sent->parsed()) {
        const auto corpus = phocus::load_sentiment_corpus(train_sent_file);
        const auto model = phocus::train_sentiment(corpus, train_sent_alpha);
        const auto tmp = std::filesystem::path(global.store) / "sentiment.model.tmp";
        phocus::save_sentiment_model(model, tmp);
        store.register_model("sentiment", tmp);
        std::filesystem::remove(tmp);
        std::cout << "sentiment model trained on " << corpus.size() << " records (version "
                  << store.model_version("sentiment") << ")\n";
        return kExitOk;
    }

    if (train_cls->parsed()) {
        const auto corpus = phocus::load_factor_corpus(train_cls_file);
        const auto model = phocus::train_classifier(corpus, train_cls_alpha);
        const auto tmp = std::filesystem::path(global.store) / "classifier.model.tmp";
        phocus::save_citation_classifier(model, tmp);
        store.register_model("classifier", tmp);
        std::filesystem::remove(tmp);
        std::cout << "citation classifier trained on " << corpus.size() << " records (version "
                  << store.model_version("classifier") << ")\n";
        return kExitOk;
    }

    if (train_rank->parsed()) {
        rank_config.seed = global.seed;
        const auto queries = phocus::load_query_file(train_rank_file);
        const auto model = phocus::train_lambdamart(queries, rank_config);
        const auto tmp = std::filesystem::path(global.store) / "ranker.model.tmp";
        phocus::save_ranker_model(model, tmp);
        store.register_model("ranker", tmp);
        std::filesystem::remove(tmp);
        std::cout << "ranker trained on " << queries.size() << " queries (version "
                  << store.model_version("ranker") << ")\n";
        return kExitOk;
    }

    if (train_span_cmd->parsed()) {
        const auto corpus = phocus::load_span_corpus(train_span_file);
        std::vector<std::pair<phocus::SpanFeatures, int>> data;
        for (const auto& sentence : corpus) {
            const auto features = phocus::extract_span_features(sentence);
            for (std::size_t i = 0; i < features.size(); ++i)
                if (sentence.tokens[i].gold_in_span >= 0)
                    data.emplace_back(features[i], sentence.tokens[i].gold_in_span);
        }
        const auto model = phocus::train_span(data, span_config);
        const auto tmp = std::filesystem::path(global.store) / "span.model.tmp";
        phocus::save_span_model(model, tmp);
        store.register_model("span", tmp);
        std::filesystem::remove(tmp);
        std::cout << "span model trained on " << data.size() << " tokens (version "
                  << store.model_version("span") << ")\n";
        return kExitOk;
    }

    if (cv_span->parsed()) {
        const auto corpus = phocus::load_span_corpus(cv_span_file);
        const auto metrics = phocus::cross_validate(corpus, cv_span_k, global.seed);
        std::cout << "precision=" << phocus::format_double(metrics.precision)
                  << " recall=" << phocus::format_double(metrics.recall)
                  << " f1=" << phocus::format_double(metrics.f1) << "\n";
        return kExitOk;
    }

    if (register_model->parsed()) {
        store.register_model(register_name, register_file);
        std::cout << "registered " << register_name << " model (version "
                  << store.model_version(register_name) << ")\n";
        return kExitOk;
    }

    return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const phocus::divergence_error& e) {
        std::cerr << "error: divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const phocus::model_missing_error& e) {
        std::cerr << "error: model-missing: " << e.what() << "\n";
        return kExitModelMissing;
    } catch (const phocus::not_found_error& e) {
        std::cerr << "error: not-found: " << e.what() << "\n";
        return kExitNotFound;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
