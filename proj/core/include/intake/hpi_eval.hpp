#pragma once

#include <string>
#include <utility>
#include <vector>

#include "intake/dialogue.hpp"
#include "intake/embedding.hpp"
#include "intake/vignette.hpp"

namespace intake {

struct AtomicStatement {
    enum class Source { generated, ground_truth };
    std::string text;
    Source source = Source::generated;
};

// Deterministic HPI summarizer: one sentence per covered entity, in reveal
// order, using the same category frames the case generator uses; with
// nothing covered, just the chief-complaint sentence. That frame sharing is
// what lets a fully covered conversation reproduce ground truth verbatim.
std::string generate_hpi(const Trajectory& traj);

// Interface mirrored by the remote extractor; the deterministic rule splits
// sentences, then coordinating conjunctions ("and", "but", "or", ";") at
// points where both sides still carry an important word.
class StatementExtractor {
public:
    virtual ~StatementExtractor() = default;
    virtual std::vector<AtomicStatement> extract(const std::string& hpi,
                                                 AtomicStatement::Source tag) const = 0;
};

std::vector<AtomicStatement> extract_statements(const std::string& hpi,
                                                AtomicStatement::Source tag);

class DeterministicExtractor : public StatementExtractor {
public:
    std::vector<AtomicStatement> extract(const std::string& hpi,
                                         AtomicStatement::Source tag) const override {
        return extract_statements(hpi, tag);
    }
};

struct EvalResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<std::pair<int, int>> matched; // (generated idx, truth idx)
    std::vector<int> unmatched_generated;
    std::vector<int> unmatched_truth;
};

// Greedy one-to-one matching, truth statements taken in order. A normalized
// exact string equality claims an unmatched generated statement outright;
// otherwise the highest-cosine unmatched generated statement wins if it
// clears the threshold. precision = matched/|generated|, recall =
// matched/|truth| (0/0 reads as 0), f1 their harmonic mean.
EvalResult match_statements(const std::vector<AtomicStatement>& generated,
                            const std::vector<AtomicStatement>& truth,
                            const EmbeddingProvider& provider,
                            double threshold = 0.85);

} // namespace intake
