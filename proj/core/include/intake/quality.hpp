#pragma once

#include <memory>
#include <string>

#include "intake/coverage.hpp"
#include "intake/embedding.hpp"
#include "intake/signals.hpp"
#include "intake/vignette.hpp"

namespace intake {

// Five-dimension question quality. aggregate is always the arithmetic mean
// of the five dimensions, each clamped to [0,1] first. provenance records
// which assessor produced the scores ("heuristic", "remote", or "fallback"
// when a remote assessor degraded to the heuristic).
struct QualityScores {
    double information_gathering = 0.0;
    double specificity = 0.0;
    double patient_engagement = 0.0;
    double clinical_relevance = 0.0;
    double comprehensiveness = 0.0;
    double aggregate = 0.0;
    std::string provenance = "heuristic";
};

QualityScores make_quality_scores(double information_gathering, double specificity,
                                  double patient_engagement, double clinical_relevance,
                                  double comprehensiveness,
                                  std::string provenance = "heuristic");

// Scores a candidate question given the conversation so far. relevance() is
// the assessor's judgment of how likely the question elicits one particular
// entity; it doubles as the llm signal in coverage-probability estimation.
class QualityAssessor {
public:
    virtual ~QualityAssessor() = default;
    virtual QualityScores assess(const std::string& question,
                                 const std::string& conversation_summary,
                                 const CoverageState& state) const = 0;
    virtual double relevance(const ClinicalEntity& entity,
                             const std::string& question) const = 0;
};

// Deterministic default assessor built from measurable proxies; see the
// implementation for the exact rule per dimension.
class HeuristicAssessor : public QualityAssessor {
public:
    HeuristicAssessor(std::shared_ptr<const EmbeddingProvider> provider,
                      MixtureWeights weights = {}, ClipBounds clip = {});
    QualityScores assess(const std::string& question,
                         const std::string& conversation_summary,
                         const CoverageState& state) const override;
    double relevance(const ClinicalEntity& entity,
                     const std::string& question) const override;

private:
    std::shared_ptr<const EmbeddingProvider> provider_;
    MixtureWeights weights_;
    ClipBounds clip_;
};

struct RewardBreakdown {
    double weighted_ig = 0.0;
    QualityScores quality;
    double lambda = 0.0;
    double total = 0.0;
};

// total = weighted_ig + lambda * quality.aggregate
RewardBreakdown combine_reward(double weighted_ig, const QualityScores& scores,
                               double lambda);

} // namespace intake
