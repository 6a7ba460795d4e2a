#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "phocus/document.hpp"

namespace phocus {

struct RelatednessVerdict {
    bool related = false;
    double confidence = 0.0; // in [0,1]
};

// Sentence-pair relatedness. Implementations must be deterministic and
// stateless so per-mention extraction can run in parallel.
class RelatednessClassifier {
public:
    virtual ~RelatednessClassifier() = default;
    virtual RelatednessVerdict relatedness(std::string_view s1, std::string_view s2) const = 0;
};

// Default: related iff the Jaccard similarity of content-word stems
// reaches tau. A learned model can be swapped in behind the same
// interface without touching the iteration logic.
class LexicalRelatedness final : public RelatednessClassifier {
public:
    explicit LexicalRelatedness(double tau = 0.12) : tau_(tau) {}
    RelatednessVerdict relatedness(std::string_view s1, std::string_view s2) const override;
    double tau() const { return tau_; }

private:
    double tau_;
};

enum class ContextDirection { backward, forward };

// Walks away from the citing sentence one step at a time, testing each
// neighbour against it, and stops at the first irrelevant verdict, at the
// paragraph boundary, or after max_span accepted sentences (0 = no cap).
// Returns the accepted sentences joined in document order.
std::string extract_context(std::span<const Sentence> sentences, int sent_id,
                            ContextDirection direction, const RelatednessClassifier& classifier,
                            int max_span = 0);

} // namespace phocus
