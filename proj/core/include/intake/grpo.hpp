#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "intake/dialogue.hpp"
#include "intake/policy.hpp"
#include "intake/vignette.hpp"

namespace intake {

struct GrpoConfig {
    int k = 2;                  // candidates per state
    double tau = 1.0;           // ranking temperature
    double learning_rate = 1e-4;
    double weight_decay = 0.01; // decoupled
    int batch_size = 8;         // turn-states per optimizer step
    int epochs = 150;
    int steps_per_epoch = 10;
    double discount = 1.0;
    std::uint64_t seed = 0;
    int checkpoint_every = 10;  // epochs
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

// u_i = exp(r_i / tau) / sum_j exp(r_j / tau). Invariant to shifting all
// rewards by a constant; tends to uniform as tau grows and to the argmax
// indicator as tau shrinks (exact ties split mass evenly).
std::vector<double> ranking_weights(const std::vector<double>& rewards, double tau);

// One training group: K candidates drawn at a single state. Rewards enter
// the loss only through the ranking weights and carry no gradient.
struct GroupSample {
    std::vector<double> features;
    std::vector<int> action_indices;
    std::vector<double> rewards;
};

// L = -sum_i u_i log pi(a_i | s), log-probabilities taken at `params`.
double grpo_loss(const PolicyParameters& params, const GroupSample& group, double tau);

struct PolicyGradient {
    std::vector<double> theta; // same layout as PolicyParameters::theta
    std::vector<double> bias;
};

// Exact gradient of grpo_loss for the softmax-linear policy:
// d/d logits = sum_i u_i (pi - e_{a_i}), theta takes its outer product with
// the features, bias takes it directly.
PolicyGradient grpo_gradient(const PolicyParameters& params, const GroupSample& group,
                             double tau);

struct AdamState {
    std::vector<double> m_theta, v_theta;
    std::vector<double> m_bias, v_bias;
    std::int64_t step = 0;

    static AdamState zeros(std::size_t m, std::size_t f);
};

// Decoupled-weight-decay adaptive-moment update. Returns false (leaving
// params and moments untouched) when the gradient is not finite.
bool optimizer_step(PolicyParameters& params, const PolicyGradient& grad,
                    const GrpoConfig& config, AdamState& state);

// One metrics record per optimizer step. mean_episode_ig is the mean
// realized weighted IG of the episodes generated for that step: the
// weighted bits the simulated patient actually surfaced, not the expected
// values that drive the gradient. Epoch averages of it are what reports
// and acceptance look at. Wall-clock time is kept out of this record so
// metrics files are bit-reproducible; the trainer reports it separately.
struct StepMetrics {
    int epoch = 0;
    int step = 0;
    double mean_reward = 0.0;
    double loss = 0.0;
    double mean_episode_ig = 0.0;
};

struct TrainResult {
    PolicyParameters params;
    AdamState adam;
    std::vector<StepMetrics> history;
    std::vector<double> wall_ms; // parallel to history
};

struct TrainHooks {
    // Called after each optimizer step; lets callers stream metrics to disk
    // as they happen. May be empty.
    std::function<void(const StepMetrics&, double wall_ms)> on_step_end;
    // Called after each epoch with epochs completed so far; used for
    // checkpoint writing. May be empty.
    std::function<void(int epochs_completed, const PolicyParameters&,
                       const AdamState&)> on_epoch_end;
};

// Algorithm: per step, run fresh self-play episodes under the current
// policy until batch_size turn-states are gathered, draw K candidates per
// state, score each candidate by expected weighted IG plus quality bonus,
// average the group gradients, and take one optimizer step. Deterministic
// per seed with the heuristic assessor and simulated patient. start_epoch
// and the initial params/adam support exact resume from a checkpoint.
TrainResult train(const std::vector<VignetteCase>& cases, SoftmaxPolicy& policy,
                  const PatientConfig& patient_config, const RewardConfig& reward,
                  const GrpoConfig& config, const EmbeddingProvider& provider,
                  const QualityAssessor& assessor, int max_turns,
                  AdamState adam, int start_epoch = 0, TrainHooks hooks = {});

// Mean realized weighted IG per episode for a policy over the given
// cases, one episode per case, under keys derived from eval_seed. The
// paired trained-vs-uniform comparison uses equal seeds on both sides.
double evaluate_mean_episode_ig(QuestionPolicy& policy,
                                const std::vector<VignetteCase>& cases,
                                const PatientConfig& patient_config,
                                const RewardConfig& reward,
                                const CategoryRegistry& registry,
                                const EmbeddingProvider& provider,
                                const QualityAssessor& assessor, int max_turns,
                                std::uint64_t eval_seed);

} // namespace intake
