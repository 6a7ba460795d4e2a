#include "phocus/context.hpp"

#include "phocus/errors.hpp"
#include "phocus/text.hpp"

#include <stdexcept>

namespace phocus {

RelatednessVerdict LexicalRelatedness::relatedness(std::string_view s1,
                                                   std::string_view s2) const {
    const double sim = jaccard(content_stems(s1), content_stems(s2));
    if (sim >= tau_) return {true, sim};
    return {false, 1.0 - sim};
}

std::string extract_context(std::span<const Sentence> sentences, int sent_id,
                            ContextDirection direction, const RelatednessClassifier& classifier,
                            int max_span) {
    if (sent_id < 0 || sent_id >= static_cast<int>(sentences.size()))
        throw std::out_of_range("extract_context: sent_id out of range");

    const Sentence& anchor = sentences[sent_id];
    const int step = direction == ContextDirection::backward ? -1 : 1;
    std::vector<int> accepted;
    for (int i = 1;; ++i) {
        if (max_span > 0 && i > max_span) break;
        const int idx = sent_id + step * i;
        if (idx < 0 || idx >= static_cast<int>(sentences.size())) break;
        const Sentence& candidate = sentences[idx];
        if (candidate.paragraph_id != anchor.paragraph_id) break;
        if (!classifier.relatedness(candidate.text, anchor.text).related) break;
        accepted.push_back(idx);
    }

    if (direction == ContextDirection::backward)
        std::reverse(accepted.begin(), accepted.end());
    std::string out;
    for (int idx : accepted) {
        if (!out.empty()) out.push_back(' ');
        out += sentences[idx].text;
    }
    return out;
}

} // namespace phocus
