#pragma once

#include <string>
#include <utility>
#include <vector>

#include "intake/embedding.hpp"
#include "intake/quality.hpp"
#include "intake/signals.hpp"
#include "intake/vignette.hpp"

namespace intake {

// H(p) = -p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0.
// Throws DomainError outside [0,1].
double binary_entropy(double p);

// Per-entity coverage probabilities for one candidate question, in the same
// order as the uncovered set they were estimated for.
struct CoverageProbabilities {
    std::vector<std::pair<std::string, SignalBreakdown>> entries;
    MixtureWeights weights;
    ClipBounds clip;

    const SignalBreakdown& at(const std::string& entity_id) const;
};

// sem: question-to-surface embedding cosine, clamped to [0,1].
// llm: the assessor's relevance judgment.
// key: fraction of the surface's important words present in the question.
// p:   the weighted mix, clipped.
SignalBreakdown estimate_coverage_probability(const ClinicalEntity& entity,
                                              const std::string& question,
                                              const EmbeddingProvider& provider,
                                              const QualityAssessor& assessor,
                                              const MixtureWeights& weights = {},
                                              const ClipBounds& clip = {});

CoverageProbabilities estimate_all(const std::vector<ClinicalEntity>& uncovered,
                                   const std::string& question,
                                   const EmbeddingProvider& provider,
                                   const QualityAssessor& assessor,
                                   const MixtureWeights& weights = {},
                                   const ClipBounds& clip = {});

// Expected information gain of asking a question, before seeing the answer.
// Every uncovered entity contributes 1 - H(p); the prior treats each as a
// fair coin (1 bit). per_category_ig partitions ig by entity category;
// weighted_ig applies each entity's importance weight.
struct GainBreakdown {
    double prior_entropy = 0.0;
    double conditional_entropy = 0.0;
    double ig = 0.0;
    std::vector<std::pair<std::string, double>> per_category_ig;
    double weighted_ig = 0.0;
};

// probs must cover exactly the uncovered set (same ids, same order);
// anything else is a caller bug and throws ContractViolation.
GainBreakdown information_gain(const std::vector<ClinicalEntity>& uncovered,
                               const CoverageProbabilities& probs);

} // namespace intake
