#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "intake/coverage.hpp"
#include "intake/embedding.hpp"
#include "intake/infogain.hpp"
#include "intake/policy.hpp"
#include "intake/quality.hpp"
#include "intake/signals.hpp"
#include "intake/vignette.hpp"

namespace intake {

struct PatientConfig {
    int disclosure_cap = 2;      // max entities revealed per answer
    double reveal_threshold = 0.4; // minimum relevance to disclose
    std::uint64_t seed = 0;

    void validate() const;
};

struct PatientReply {
    std::string text;
    // What the patient intended to disclose. The episode runner still runs
    // detection on the text; these ids are for closed-loop checks.
    std::vector<std::string> disclosed_ids;
};

class Patient {
public:
    virtual ~Patient() = default;
    virtual PatientReply answer(const std::string& question,
                                const CoverageState& state) = 0;
};

// Rule-based patient: ranks uncovered entities by relevance to the question
// (max of important-word overlap and embedding cosine), discloses the top
// k <= disclosure_cap whose relevance clears reveal_threshold by emitting a
// per-category sentence holding the surface verbatim, and falls back to a
// fixed non-informative reply. Stateless across turns; deterministic in
// (seed, question, state).
class SimulatedPatient : public Patient {
public:
    SimulatedPatient(VignetteCase kase, PatientConfig config,
                     std::shared_ptr<const EmbeddingProvider> provider);
    PatientReply answer(const std::string& question,
                        const CoverageState& state) override;

    static const std::string& non_informative_reply();

private:
    VignetteCase case_;
    PatientConfig config_;
    std::shared_ptr<const EmbeddingProvider> provider_;
};

struct RewardConfig {
    MixtureWeights mix;
    ClipBounds clip;
    // Quality bonus coefficient. 1.0 weighs the bonus as-is against the
    // weighted IG term; the aggregate lives in [0,1] so the IG term still
    // dominates the reward scale.
    double lambda = 1.0;
    double discount = 1.0;
    double semantic_threshold = 0.85;

    void validate() const;
};

struct Turn {
    int index = 0;
    std::string question;
    int template_index = -1;
    double log_prob = 0.0;
    // Reward pieces, computed on the pre-answer state: the policy commits
    // to a question before seeing what the patient says.
    GainBreakdown gain;
    QualityScores quality;
    RewardBreakdown reward;
    std::string answer;
    std::vector<std::string> revealed_ids; // as detected, not as intended
    // Weighted entropy actually resolved by this turn's disclosures: each
    // revealed entity collapses a maximal-entropy unknown, worth its
    // category weight in bits. Zero when the answer reveals nothing.
    double realized_weighted_ig = 0.0;
    CoverageState coverage_after;
};

struct Trajectory {
    std::string case_id;
    std::string chief_complaint;
    std::vector<Turn> turns;
    CoverageState final_coverage;
    double total_reward = 0.0;      // discounted sum of r_t
    double total_weighted_ig = 0.0; // sum of per-turn expected weighted IG
    // Episode cumulative IG: weighted bits resolved over the whole
    // conversation, i.e. the sum of category weights of everything the
    // patient actually surfaced. The expected-IG sum above scores what the
    // questions promised; this scores what the interview delivered.
    double realized_weighted_ig = 0.0;
};

// One self-play conversation: question, answer, coverage update, reward,
// until max_turns or nothing is left uncovered. episode_key seeds all
// stochastic choices, so equal keys replay bit-identically. When reward
// computation fails mid-episode the error propagates, and the turns
// completed so far are copied into *partial (if given) for diagnostics.
Trajectory run_episode(QuestionPolicy& policy, const VignetteCase& kase,
                       Patient& patient, const EmbeddingProvider& provider,
                       const QualityAssessor& assessor, const RewardConfig& reward,
                       const CategoryRegistry& registry, int max_turns,
                       std::uint64_t episode_key, Trajectory* partial = nullptr);

// Conversation history strictly before turn `upto` plus the chief
// complaint; the text every turn-t training sample conditions on.
std::string conversation_prefix(const Trajectory& traj, std::size_t upto);

// Compact description of what is still hidden, appended to sample states.
std::string uncovered_digest(const CoverageState& state);

struct TurnSample {
    std::string case_id;
    int turn_index = 0;
    std::string state_text;
};

// One sample per turn; sample t conditions on everything before turn t.
std::vector<TurnSample> extract_turn_samples(const Trajectory& traj);

} // namespace intake
