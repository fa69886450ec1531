#include "intake/quality.hpp"

#include <algorithm>

#include "intake/errors.hpp"
#include "intake/infogain.hpp"
#include "intake/text.hpp"

namespace intake {

QualityScores make_quality_scores(double information_gathering, double specificity,
                                  double patient_engagement, double clinical_relevance,
                                  double comprehensiveness, std::string provenance) {
    QualityScores q;
    q.information_gathering = clamp01(information_gathering);
    q.specificity = clamp01(specificity);
    q.patient_engagement = clamp01(patient_engagement);
    q.clinical_relevance = clamp01(clinical_relevance);
    q.comprehensiveness = clamp01(comprehensiveness);
    q.aggregate = (q.information_gathering + q.specificity + q.patient_engagement +
                   q.clinical_relevance + q.comprehensiveness) /
                  5.0;
    q.provenance = std::move(provenance);
    return q;
}

HeuristicAssessor::HeuristicAssessor(std::shared_ptr<const EmbeddingProvider> provider,
                                     MixtureWeights weights, ClipBounds clip)
    : provider_(std::move(provider)), weights_(weights), clip_(clip) {
    if (!provider_) throw ContractViolation("HeuristicAssessor: null provider");
    weights_.validate();
    clip_.validate();
}

double HeuristicAssessor::relevance(const ClinicalEntity& entity,
                                    const std::string& question) const {
    const double overlap =
        text::important_overlap(entity.surface, text::tokenize(question));
    const double sim =
        clamp01(cosine(provider_->embed(question), provider_->embed(entity.surface)));
    return std::max(overlap, sim);
}

QualityScores HeuristicAssessor::assess(const std::string& question,
                                        const std::string& /*conversation_summary*/,
                                        const CoverageState& state) const {
    const auto uncovered = state.uncovered();
    const auto question_vec = provider_->embed(question);
    const auto tokens = text::tokenize(question);

    // information_gathering: the best coverage probability the question
    // achieves over anything still hidden. 0 when nothing is hidden.
    double info = 0.0;
    for (const auto& e : uncovered) {
        info = std::max(info, estimate_coverage_probability(e, question, *provider_,
                                                            *this, weights_, clip_)
                                  .p);
    }

    // specificity: share of content-bearing tokens. Tokenless input scores 0.
    double specificity = 0.0;
    if (!tokens.empty()) {
        const auto content = std::count_if(tokens.begin(), tokens.end(),
                                           [](const std::string& t) {
                                               return text::is_important(t);
                                           });
        specificity = static_cast<double>(content) / static_cast<double>(tokens.size());
    }

    // patient_engagement: full marks for a question mark and at most 30
    // words; no question mark halves the score; beyond 30 words the score
    // decays linearly, reaching 0 at 60.
    const auto last_visible = question.find_last_not_of(" \t\r\n");
    const bool asks = last_visible != std::string::npos && question[last_visible] == '?';
    double length_factor = 1.0;
    if (tokens.size() > 30) {
        length_factor =
            std::max(0.0, 1.0 - (static_cast<double>(tokens.size()) - 30.0) / 30.0);
    }
    const double engagement = (asks ? 1.0 : 0.5) * length_factor;

    // clinical_relevance: closeness to any entity of the case, hidden or not.
    double relevance_score = 0.0;
    for (const auto& e : state.all()) {
        relevance_score =
            std::max(relevance_score, clamp01(cosine(question_vec, provider_->embed(e.surface))));
    }

    // comprehensiveness: of the categories that still hide entities, the
    // share whose name the question is at least loosely related to.
    std::vector<std::string> open_categories;
    for (const auto& e : uncovered) {
        if (std::find(open_categories.begin(), open_categories.end(), e.category) ==
            open_categories.end()) {
            open_categories.push_back(e.category);
        }
    }
    double comprehensiveness = 0.0;
    if (!open_categories.empty()) {
        std::size_t related = 0;
        for (const auto& label : open_categories) {
            std::string readable = label;
            std::replace(readable.begin(), readable.end(), '_', ' ');
            if (cosine(question_vec, provider_->embed(readable)) > 0.3) ++related;
        }
        comprehensiveness =
            static_cast<double>(related) / static_cast<double>(open_categories.size());
    }

    return make_quality_scores(info, specificity, engagement, relevance_score,
                               comprehensiveness, "heuristic");
}

RewardBreakdown combine_reward(double weighted_ig, const QualityScores& scores,
                               double lambda) {
    if (lambda < 0.0) {
        throw ConfigError("quality bonus coefficient lambda must be >= 0");
    }
    RewardBreakdown r;
    r.weighted_ig = weighted_ig;
    r.quality = scores;
    r.lambda = lambda;
    r.total = weighted_ig + lambda * scores.aggregate;
    return r;
}

} // namespace intake
