#include "intake/infogain.hpp"

#include <algorithm>
#include <cmath>

#include "intake/errors.hpp"
#include "intake/text.hpp"

namespace intake {

double binary_entropy(double p) {
    if (!(p >= 0.0) || !(p <= 1.0)) {
        throw DomainError("binary_entropy: p must be in [0,1], got " +
                          std::to_string(p));
    }
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

const SignalBreakdown& CoverageProbabilities::at(const std::string& entity_id) const {
    for (const auto& [id, signals] : entries) {
        if (id == entity_id) return signals;
    }
    throw ContractViolation("no coverage probability for entity \"" + entity_id + "\"");
}

SignalBreakdown estimate_coverage_probability(const ClinicalEntity& entity,
                                              const std::string& question,
                                              const EmbeddingProvider& provider,
                                              const QualityAssessor& assessor,
                                              const MixtureWeights& weights,
                                              const ClipBounds& clip) {
    SignalBreakdown s;
    try {
        s.sem = clamp01(cosine(provider.embed(question), provider.embed(entity.surface)));
        s.llm = clamp01(assessor.relevance(entity, question));
    } catch (const RemoteError& ex) {
        // Keep the type (it maps to its own exit code) but attach the entity
        // so operators can see which estimate died.
        throw RemoteError("estimating coverage probability for entity \"" +
                          entity.id + "\": " + ex.what());
    }
    s.key = text::important_overlap(entity.surface, text::tokenize(question));
    s.p = mix_and_clip(s.sem, s.llm, s.key, weights, clip);
    return s;
}

CoverageProbabilities estimate_all(const std::vector<ClinicalEntity>& uncovered,
                                   const std::string& question,
                                   const EmbeddingProvider& provider,
                                   const QualityAssessor& assessor,
                                   const MixtureWeights& weights,
                                   const ClipBounds& clip) {
    CoverageProbabilities probs;
    probs.weights = weights;
    probs.clip = clip;
    probs.entries.reserve(uncovered.size());
    for (const auto& e : uncovered) {
        probs.entries.emplace_back(
            e.id, estimate_coverage_probability(e, question, provider, assessor,
                                                weights, clip));
    }
    return probs;
}

GainBreakdown information_gain(const std::vector<ClinicalEntity>& uncovered,
                               const CoverageProbabilities& probs) {
    if (probs.entries.size() != uncovered.size()) {
        throw ContractViolation("information_gain: probability set size " +
                                std::to_string(probs.entries.size()) +
                                " does not match uncovered set size " +
                                std::to_string(uncovered.size()));
    }
    GainBreakdown g;
    for (std::size_t i = 0; i < uncovered.size(); ++i) {
        const auto& e = uncovered[i];
        const auto& [id, signals] = probs.entries[i];
        if (id != e.id) {
            throw ContractViolation("information_gain: probability entry \"" + id +
                                    "\" does not match uncovered entity \"" + e.id +
                                    "\"");
        }
        const double h = binary_entropy(signals.p);
        const double gain = 1.0 - h;
        g.prior_entropy += 1.0;
        g.conditional_entropy += h;

        auto it = std::find_if(g.per_category_ig.begin(), g.per_category_ig.end(),
                               [&](const auto& kv) { return kv.first == e.category; });
        if (it == g.per_category_ig.end()) {
            g.per_category_ig.emplace_back(e.category, gain);
        } else {
            it->second += gain;
        }
        g.weighted_ig += e.importance_weight * gain;
    }
    g.ig = g.prior_entropy - g.conditional_entropy;
    return g;
}

} // namespace intake
