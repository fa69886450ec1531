#include "intake/dialogue.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "intake/errors.hpp"
#include "intake/text.hpp"

namespace intake {
namespace {

struct AnswerFrames {
    std::string_view category;
    std::string_view variants[2]; // "{}" replaced by the surface, verbatim
};

constexpr AnswerFrames kAnswerFrames[] = {
    {"symptom", {"Yes, I have been having {} lately.", "I do have {}."}},
    {"temporal_pattern", {"It has been {}.", "The trouble has been {}."}},
    {"severity", {"I would call it {}.", "It feels {}."}},
    {"location", {"I feel it mostly {}.", "It sits mainly {}."}},
    {"quality_character", {"It feels like {}.", "I would describe it as {}."}},
    {"aggravating_factor", {"It gets worse {}.", "It flares up {}."}},
    {"alleviating_factor", {"It gets better {}.", "It settles down {}."}},
    {"associated_symptom", {"I have also noticed {}.", "On top of that there is {}."}},
    {"medical_history", {"I was diagnosed with {} years ago.", "My record includes {}."}},
    {"medication", {"I take {}.", "I am currently on {}."}},
};

std::string render_answer(const ClinicalEntity& e, std::uint64_t variant) {
    std::string_view frame = variant ? "I should mention {}." : "There is also {}.";
    for (const auto& f : kAnswerFrames) {
        if (f.category == e.category) {
            frame = f.variants[variant % 2];
            break;
        }
    }
    std::string out(frame);
    out.replace(out.find("{}"), 2, e.surface);
    return out;
}

} // namespace

void PatientConfig::validate() const {
    if (disclosure_cap < 1) {
        throw ConfigError("patient disclosure cap must be at least 1");
    }
    if (reveal_threshold < 0.0 || reveal_threshold > 1.0) {
        throw ConfigError("patient reveal threshold must be in [0,1]");
    }
}

void RewardConfig::validate() const {
    mix.validate();
    clip.validate();
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (discount < 0.0 || discount > 1.0) {
        throw ConfigError("discount must be in [0,1]");
    }
    if (!(semantic_threshold > 0.0) || semantic_threshold > 1.0) {
        throw ConfigError("semantic threshold must be in (0,1]");
    }
}

SimulatedPatient::SimulatedPatient(VignetteCase kase, PatientConfig config,
                                   std::shared_ptr<const EmbeddingProvider> provider)
    : case_(std::move(kase)), config_(config), provider_(std::move(provider)) {
    config_.validate();
    if (!provider_) throw ContractViolation("SimulatedPatient: null provider");
}

const std::string& SimulatedPatient::non_informative_reply() {
    static const std::string reply = "I am not sure about that.";
    return reply;
}

PatientReply SimulatedPatient::answer(const std::string& question,
                                      const CoverageState& state) {
    if (question.empty()) {
        throw ContractViolation("patient asked an empty question");
    }
    const auto uncovered = state.uncovered();
    if (uncovered.empty()) {
        return {non_informative_reply(), {}};
    }

    const auto qtokens = text::tokenize(question);
    const auto qvec = provider_->embed(question);
    std::vector<double> rel(uncovered.size());
    for (std::size_t i = 0; i < uncovered.size(); ++i) {
        rel[i] = std::max(
            text::important_overlap(uncovered[i].surface, qtokens),
            clamp01(cosine(qvec, provider_->embed(uncovered[i].surface))));
    }

    std::vector<std::size_t> order(uncovered.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rel[a] > rel[b]; });

    PatientReply reply;
    for (std::size_t rank = 0;
         rank < order.size() &&
         reply.disclosed_ids.size() < static_cast<std::size_t>(config_.disclosure_cap);
         ++rank) {
        const auto i = order[rank];
        if (rel[i] < config_.reveal_threshold) break; // sorted: nothing later qualifies
        const auto& e = uncovered[i];
        const auto variant = mix64(config_.seed, fnv1a(e.id.data(), e.id.size())) % 2;
        if (!reply.text.empty()) reply.text += " ";
        reply.text += render_answer(e, variant);
        reply.disclosed_ids.push_back(e.id);
    }
    if (reply.disclosed_ids.empty()) {
        reply.text = non_informative_reply();
    }
    return reply;
}

std::string conversation_prefix(const Trajectory& traj, std::size_t upto) {
    std::string out = "Chief complaint: " + traj.chief_complaint + ".";
    for (std::size_t t = 0; t < upto && t < traj.turns.size(); ++t) {
        out += "\nQ: " + traj.turns[t].question;
        out += "\nA: " + traj.turns[t].answer;
    }
    return out;
}

std::string uncovered_digest(const CoverageState& state) {
    std::string out = "Uncovered: " + std::to_string(state.uncovered_count()) +
                      " of " + std::to_string(state.all().size()) + " entities.";
    std::vector<std::string> open;
    for (const auto& e : state.all()) {
        if (state.is_covered(e.id)) continue;
        if (std::find(open.begin(), open.end(), e.category) == open.end()) {
            open.push_back(e.category);
        }
    }
    if (!open.empty()) {
        out += " Open categories:";
        for (std::size_t i = 0; i < open.size(); ++i) {
            out += (i == 0 ? " " : ", ") + open[i];
        }
        out += ".";
    }
    return out;
}

Trajectory run_episode(QuestionPolicy& policy, const VignetteCase& kase,
                       Patient& patient, const EmbeddingProvider& provider,
                       const QualityAssessor& assessor, const RewardConfig& reward,
                       const CategoryRegistry& registry, int max_turns,
                       std::uint64_t episode_key, Trajectory* partial) {
    reward.validate();
    if (max_turns < 1) throw ConfigError("max_turns must be at least 1");

    CoverageState coverage(kase.entities);
    Trajectory traj{kase.case_id, kase.chief_complaint, {}, coverage, 0.0, 0.0, 0.0};
    bool last_informative = false;

    for (int t = 0; t < max_turns && coverage.uncovered_count() > 0; ++t) {
        StateContext ctx{&kase, &coverage, t, max_turns, last_informative};
        Rng turn_rng(mix64(episode_key, static_cast<std::uint64_t>(t), 0x71));
        const auto action = policy.propose(ctx, turn_rng);

        const auto uncovered = coverage.uncovered();
        GainBreakdown gain;
        QualityScores quality;
        try {
            const auto probs = estimate_all(uncovered, action.question, provider,
                                            assessor, reward.mix, reward.clip);
            gain = information_gain(uncovered, probs);
            quality = assessor.assess(action.question,
                                      conversation_prefix(traj, traj.turns.size()),
                                      coverage);
        } catch (const Error&) {
            // Reward computation failed (typically a remote dependency).
            // Hand the turns completed so far to the caller, then rethrow.
            traj.final_coverage = coverage;
            if (partial) *partial = traj;
            throw;
        }
        const auto rb = combine_reward(gain.weighted_ig, quality, reward.lambda);

        const auto reply = patient.answer(action.question, coverage);
        const auto matches = detect_revealed(reply.text, uncovered, provider,
                                             reward.semantic_threshold);
        coverage.apply(matches, t);

        Turn turn{t,       action.question, action.template_index, action.log_prob,
                  gain,    quality,         rb,                    reply.text,
                  {},      0.0,             coverage};
        for (const auto& m : matches) {
            turn.revealed_ids.push_back(m.entity_id);
            for (const auto& e : uncovered) {
                if (e.id == m.entity_id) {
                    turn.realized_weighted_ig += registry.weight(e.category);
                    break;
                }
            }
        }
        traj.turns.push_back(std::move(turn));

        traj.total_reward += std::pow(reward.discount, t) * rb.total;
        traj.total_weighted_ig += gain.weighted_ig;
        traj.realized_weighted_ig += traj.turns.back().realized_weighted_ig;
        last_informative = !matches.empty();
    }
    traj.final_coverage = coverage;
    return traj;
}

std::vector<TurnSample> extract_turn_samples(const Trajectory& traj) {
    std::vector<TurnSample> samples;
    samples.reserve(traj.turns.size());
    for (std::size_t t = 0; t < traj.turns.size(); ++t) {
        const CoverageState before =
            t == 0 ? CoverageState(traj.final_coverage.all())
                   : traj.turns[t - 1].coverage_after;
        TurnSample s;
        s.case_id = traj.case_id;
        s.turn_index = static_cast<int>(t);
        s.state_text = conversation_prefix(traj, t) + "\n" + uncovered_digest(before);
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace intake
