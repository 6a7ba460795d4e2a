#include "phocus/factors.hpp"

#include "phocus/errors.hpp"
#include "phocus/text.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace phocus {

namespace {

constexpr double kTieTolerance = 1e-9;

} // namespace

FactorVector aggregate_factors(const Paper& paper, int cit_id) {
    const ReferenceEntry* ref = paper.find_reference(cit_id);
    if (ref == nullptr)
        throw not_found_error("aggregate_factors: unknown cit_id " + std::to_string(cit_id) +
                              " in paper " + paper.paper_id);
    FactorVector fv;
    fv.au_overlap = ref->au_overlap;
    int label_sum = 0;
    std::array<int, 3> section_counts{};
    for (const auto& m : paper.mentions) {
        if (m.cit_id != cit_id) continue;
        fv.n_cit += 1;
        fv.cit_word += m.cit_word;
        label_sum += m.sen_label;
        if (m.sec_id >= 0 && m.sec_id < 3) section_counts[m.sec_id] += 1;
    }
    fv.sen_label = label_sum > 0 ? 1 : (label_sum < 0 ? -1 : 0);
    // Mode, ties toward the smaller code.
    int best = 0;
    for (int s = 1; s < 3; ++s)
        if (section_counts[s] > section_counts[best]) best = s;
    fv.sec_id = best;
    return fv;
}

DiscreteFactors discretize(const FactorVector& fv) {
    DiscreteFactors d;
    d.au_overlap = fv.au_overlap <= 0.0 ? 0 : (fv.au_overlap < 0.5 ? 1 : 2);
    d.sec_id = std::clamp(fv.sec_id, 0, 2);
    d.n_cit = fv.n_cit <= 1 ? 0 : (fv.n_cit <= 3 ? 1 : 2);
    d.cit_word = fv.cit_word <= 25 ? 0 : (fv.cit_word <= 80 ? 1 : 2);
    d.sen_label = std::clamp(fv.sen_label, -1, 1) + 1;
    return d;
}

std::array<double, kClassCount> CitationClassifier::posterior(const FactorVector& fv) const {
    const auto values = discretize(fv).values();
    std::array<double, kClassCount> lp{};
    for (int c = 0; c < kClassCount; ++c) {
        // Add-one smoothed prior; likelihoods smoothed with alpha over the
        // three buckets of each feature.
        lp[c] = std::log((class_counts[c] + 1.0) / (total + static_cast<double>(kClassCount)));
        for (int f = 0; f < 5; ++f) {
            lp[c] += std::log((counts[f][values[f]][c] + alpha) /
                              (class_counts[c] + alpha * 3.0));
        }
    }
    // Normalize to probabilities for reporting.
    const double max_lp = *std::max_element(lp.begin(), lp.end());
    double sum = 0.0;
    std::array<double, kClassCount> p{};
    for (int c = 0; c < kClassCount; ++c) {
        p[c] = std::exp(lp[c] - max_lp);
        sum += p[c];
    }
    for (auto& v : p) v /= sum;
    return p;
}

int CitationClassifier::classify(const FactorVector& fv) const {
    const auto p = posterior(fv);
    int best = 0;
    for (int c = 1; c < kClassCount; ++c)
        if (p[c] > p[best] + kTieTolerance) best = c;
    return best;
}

CitationClassifier train_classifier(const std::vector<std::pair<FactorVector, int>>& labelled,
                                    double alpha) {
    if (labelled.empty()) throw parse_error("citation classifier training set is empty");
    if (alpha <= 0.0) throw parse_error("citation classifier smoothing must be positive");
    CitationClassifier model;
    model.alpha = alpha;
    for (const auto& [fv, label] : labelled) {
        if (label < 0 || label >= kClassCount)
            throw parse_error("citation class out of range: " + std::to_string(label));
        model.class_counts[label] += 1;
        model.total += 1;
        const auto values = discretize(fv).values();
        for (int f = 0; f < 5; ++f) model.counts[f][values[f]][label] += 1;
    }
    return model;
}

int bootstrap_label(const FactorVector& fv) {
    if (fv.sen_label < 0) return 0;
    if (fv.au_overlap >= 0.5 || fv.n_cit >= 4) return 3;
    if (fv.sec_id == kSectionBody) return 2;
    return 1;
}

void save_citation_classifier(const CitationClassifier& model,
                              const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write citation classifier: " + path.string());
    out << "phocus-classifier v1\n";
    out << "alpha " << format_double(model.alpha) << "\n";
    out << "classes";
    for (long c : model.class_counts) out << ' ' << c;
    out << "\n";
    for (int f = 0; f < 5; ++f)
        for (int v = 0; v < 3; ++v) {
            out << "count " << f << ' ' << v;
            for (int c = 0; c < kClassCount; ++c) out << ' ' << model.counts[f][v][c];
            out << "\n";
        }
}

CitationClassifier load_citation_classifier(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw not_found_error("cannot open citation classifier: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "phocus-classifier v1")
        throw parse_error("citation classifier: bad header in " + path.string());
    CitationClassifier model;
    std::string word;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        row >> word;
        if (word == "alpha") {
            row >> word;
            model.alpha = parse_double(word, "classifier alpha");
        } else if (word == "classes") {
            model.total = 0;
            for (int c = 0; c < kClassCount; ++c) {
                row >> model.class_counts[c];
                model.total += model.class_counts[c];
            }
        } else if (word == "count") {
            int f = 0;
            int v = 0;
            row >> f >> v;
            if (f < 0 || f >= 5 || v < 0 || v >= 3)
                throw parse_error("citation classifier: bad count row");
            for (int c = 0; c < kClassCount; ++c) row >> model.counts[f][v][c];
        } else {
            throw parse_error("citation classifier: unknown row '" + word + "'");
        }
        if (row.fail()) throw parse_error("citation classifier: malformed row '" + line + "'");
    }
    return model;
}

std::vector<std::pair<FactorVector, int>> load_factor_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw not_found_error("cannot open factor corpus: " + path.string());
    std::vector<std::pair<FactorVector, int>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        std::istringstream row(line);
        FactorVector fv;
        int label = -1;
        row >> fv.au_overlap >> fv.sec_id >> fv.n_cit >> fv.cit_word >> fv.sen_label >> label;
        if (row.fail())
            throw parse_error("factor corpus line " + std::to_string(line_no) +
                              ": expected 'au_overlap sec_id n_cit cit_word sen_label class'");
        out.emplace_back(fv, label);
    }
    if (out.empty()) throw parse_error("factor corpus is empty: " + path.string());
    return out;
}

} // namespace phocus
