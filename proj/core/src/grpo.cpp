#include "intake/grpo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "intake/errors.hpp"
#include "intake/infogain.hpp"

namespace intake {

void GrpoConfig::validate() const {
    if (k < 2) throw ConfigError("grpo group size K must be at least 2");
    if (!(tau > 0.0)) throw ConfigError("grpo temperature tau must be > 0");
    if (learning_rate < 0.0) throw ConfigError("learning rate must be >= 0");
    if (weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (steps_per_epoch < 1) throw ConfigError("steps per epoch must be at least 1");
    if (discount < 0.0 || discount > 1.0) throw ConfigError("discount must be in [0,1]");
    if (checkpoint_every < 1) throw ConfigError("checkpoint interval must be at least 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in [0,1)");
    }
    if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

std::vector<double> ranking_weights(const std::vector<double>& rewards, double tau) {
    if (!(tau > 0.0)) throw ConfigError("ranking temperature tau must be > 0");
    if (rewards.empty()) throw ContractViolation("ranking_weights: empty reward set");
    const double rmax = *std::max_element(rewards.begin(), rewards.end());
    std::vector<double> u(rewards.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        u[i] = std::exp((rewards[i] - rmax) / tau);
        sum += u[i];
    }
    for (auto& x : u) x /= sum;
    return u;
}

namespace {

void check_group(const PolicyParameters& params, const GroupSample& group) {
    if (group.action_indices.size() != group.rewards.size() ||
        group.action_indices.empty()) {
        throw ContractViolation("group candidates and rewards must align and be non-empty");
    }
    if (group.features.size() != params.f) {
        throw ContractViolation("group feature dimension does not match parameters");
    }
    for (int a : group.action_indices) {
        if (a < 0 || static_cast<std::size_t>(a) >= params.m) {
            throw ContractViolation("group action index out of range");
        }
    }
    for (double r : group.rewards) {
        if (!std::isfinite(r)) throw ContractViolation("group reward not finite");
    }
}

} // namespace

double grpo_loss(const PolicyParameters& params, const GroupSample& group, double tau) {
    check_group(params, group);
    const auto u = ranking_weights(group.rewards, tau);
    const auto pi = action_distribution(params, group.features);
    double loss = 0.0;
    for (std::size_t i = 0; i < group.action_indices.size(); ++i) {
        loss -= u[i] * std::log(pi[group.action_indices[i]]);
    }
    return loss;
}

PolicyGradient grpo_gradient(const PolicyParameters& params, const GroupSample& group,
                             double tau) {
    check_group(params, group);
    const auto u = ranking_weights(group.rewards, tau);
    const auto pi = action_distribution(params, group.features);

    // d L / d logit_a = sum_i u_i * (pi_a - [a == a_i]); with sum_i u_i = 1
    // that is pi_a - sum_{i: a_i = a} u_i.
    std::vector<double> dlogits(pi);
    for (std::size_t i = 0; i < group.action_indices.size(); ++i) {
        dlogits[group.action_indices[i]] -= u[i];
    }

    PolicyGradient g;
    g.bias = dlogits;
    g.theta.assign(params.m * params.f, 0.0);
    for (std::size_t a = 0; a < params.m; ++a) {
        const double d = dlogits[a];
        if (d == 0.0) continue;
        double* row = g.theta.data() + a * params.f;
        for (std::size_t i = 0; i < params.f; ++i) {
            row[i] = d * group.features[i];
        }
    }
    return g;
}

AdamState AdamState::zeros(std::size_t m, std::size_t f) {
    AdamState s;
    s.m_theta.assign(m * f, 0.0);
    s.v_theta.assign(m * f, 0.0);
    s.m_bias.assign(m, 0.0);
    s.v_bias.assign(m, 0.0);
    return s;
}

bool optimizer_step(PolicyParameters& params, const PolicyGradient& grad,
                    const GrpoConfig& config, AdamState& state) {
    config.validate();
    if (grad.theta.size() != params.theta.size() ||
        grad.bias.size() != params.bias.size() ||
        state.m_theta.size() != params.theta.size() ||
        state.m_bias.size() != params.bias.size()) {
        throw ContractViolation("optimizer_step: shape mismatch");
    }
    const auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(),
                           [](double x) { return std::isfinite(x); });
    };
    if (!finite(grad.theta) || !finite(grad.bias)) {
        return false; // caller logs and skips this step
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);

    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
            p[i] -= config.learning_rate * config.weight_decay * p[i];
        }
    };
    update(params.theta, grad.theta, state.m_theta, state.v_theta);
    update(params.bias, grad.bias, state.m_bias, state.v_bias);
    return true;
}

namespace {

// A turn-state captured during self-play, with everything candidate scoring
// needs later.
struct CapturedState {
    std::vector<double> features;
    CoverageState coverage;
    std::string summary;
    const VignetteCase* kase;
};

double candidate_reward(const QuestionCandidate& cand, const CapturedState& st,
                        const EmbeddingProvider& provider,
                        const QualityAssessor& assessor, const RewardConfig& reward) {
    const auto uncovered = st.coverage.uncovered();
    const auto probs =
        estimate_all(uncovered, cand.question, provider, assessor, reward.mix,
                     reward.clip);
    const auto gain = information_gain(uncovered, probs);
    const auto quality = assessor.assess(cand.question, st.summary, st.coverage);
    return combine_reward(gain.weighted_ig, quality, reward.lambda).total;
}

} // namespace

TrainResult train(const std::vector<VignetteCase>& cases, SoftmaxPolicy& policy,
                  const PatientConfig& patient_config, const RewardConfig& reward,
                  const GrpoConfig& config, const EmbeddingProvider& provider,
                  const QualityAssessor& assessor, int max_turns,
                  AdamState adam, int start_epoch, TrainHooks hooks) {
    config.validate();
    reward.validate();
    patient_config.validate();
    if (cases.empty()) throw ConfigError("training requires at least one case");
    if (max_turns < 1) throw ConfigError("max_turns must be at least 1");

    TrainResult result{policy.params(), std::move(adam), {}, {}};

    auto provider_ptr =
        std::shared_ptr<const EmbeddingProvider>(&provider, [](const EmbeddingProvider*) {});

    for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
        for (int step = 0; step < config.steps_per_epoch; ++step) {
            const auto t0 = std::chrono::steady_clock::now();

            // Fresh on-policy episodes until the batch has enough states.
            // Episode keys depend only on (seed, epoch, step, i), so a
            // resumed run regenerates the identical stream.
            std::vector<CapturedState> batch;
            double episode_ig_sum = 0.0;
            std::size_t episodes = 0;
            for (std::size_t i = 0;
                 batch.size() < static_cast<std::size_t>(config.batch_size); ++i) {
                const auto key = mix64(config.seed, static_cast<std::uint64_t>(epoch),
                                       static_cast<std::uint64_t>(step), i);
                const auto& kase = cases[key % cases.size()];
                SimulatedPatient patient(kase, patient_config, provider_ptr);
                const auto traj =
                    run_episode(policy, kase, patient, provider, assessor, reward,
                                policy.registry(), max_turns, key);
                episode_ig_sum += traj.realized_weighted_ig;
                ++episodes;
                for (std::size_t t = 0;
                     t < traj.turns.size() &&
                     batch.size() < static_cast<std::size_t>(config.batch_size);
                     ++t) {
                    const CoverageState before =
                        t == 0 ? CoverageState(kase.entities)
                               : traj.turns[t - 1].coverage_after;
                    StateContext ctx{&kase, &before, static_cast<int>(t), max_turns,
                                     t > 0 && !traj.turns[t - 1].revealed_ids.empty()};
                    batch.push_back({compute_features(ctx, policy.registry()), before,
                                     conversation_prefix(traj, t), &kase});
                }
            }

            // K candidates per state, group gradient, batch average.
            PolicyGradient total{std::vector<double>(policy.params().theta.size(), 0.0),
                                 std::vector<double>(policy.params().bias.size(), 0.0)};
            double loss_sum = 0.0;
            double reward_sum = 0.0;
            std::size_t reward_count = 0;
            for (std::size_t b = 0; b < batch.size(); ++b) {
                auto& st = batch[b];
                Rng rng(mix64(config.seed, static_cast<std::uint64_t>(epoch),
                              static_cast<std::uint64_t>(step), 0xC0DE + b));
                const auto dist = policy.distribution(st.features);
                GroupSample group;
                group.features = st.features;
                for (int c = 0; c < config.k; ++c) {
                    double r = rng.next_double();
                    double cum = 0.0;
                    std::size_t idx = dist.size() - 1;
                    for (std::size_t a = 0; a < dist.size(); ++a) {
                        cum += dist[a];
                        if (r < cum) {
                            idx = a;
                            break;
                        }
                    }
                    QuestionCandidate cand{
                        static_cast<int>(idx),
                        policy.bank().render(idx, *st.kase, st.coverage),
                        std::log(dist[idx])};
                    group.action_indices.push_back(cand.template_index);
                    group.rewards.push_back(
                        candidate_reward(cand, st, provider, assessor, reward));
                    reward_sum += group.rewards.back();
                    ++reward_count;
                }
                loss_sum += grpo_loss(policy.params(), group, config.tau);
                const auto g = grpo_gradient(policy.params(), group, config.tau);
                for (std::size_t i = 0; i < total.theta.size(); ++i) {
                    total.theta[i] += g.theta[i];
                }
                for (std::size_t i = 0; i < total.bias.size(); ++i) {
                    total.bias[i] += g.bias[i];
                }
            }
            const double scale = 1.0 / static_cast<double>(batch.size());
            for (auto& x : total.theta) x *= scale;
            for (auto& x : total.bias) x *= scale;

            optimizer_step(policy.params(), total, config, result.adam);

            const auto t1 = std::chrono::steady_clock::now();
            StepMetrics m;
            m.epoch = epoch;
            m.step = step;
            m.mean_reward = reward_sum / static_cast<double>(reward_count);
            m.loss = loss_sum * scale;
            m.mean_episode_ig = episode_ig_sum / static_cast<double>(episodes);
            result.history.push_back(m);
            result.wall_ms.push_back(
                std::chrono::duration<double, std::milli>(t1 - t0).count());
            if (hooks.on_step_end) hooks.on_step_end(m, result.wall_ms.back());
        }
        if (hooks.on_epoch_end) {
            hooks.on_epoch_end(epoch + 1, policy.params(), result.adam);
        }
    }
    result.params = policy.params();
    return result;
}

double evaluate_mean_episode_ig(QuestionPolicy& policy,
                                const std::vector<VignetteCase>& cases,
                                const PatientConfig& patient_config,
                                const RewardConfig& reward,
                                const CategoryRegistry& registry,
                                const EmbeddingProvider& provider,
                                const QualityAssessor& assessor, int max_turns,
                                std::uint64_t eval_seed) {
    if (cases.empty()) throw ConfigError("evaluation requires at least one case");
    auto provider_ptr =
        std::shared_ptr<const EmbeddingProvider>(&provider, [](const EmbeddingProvider*) {});
    double sum = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        SimulatedPatient patient(cases[i], patient_config, provider_ptr);
        const auto key = mix64(eval_seed, 0xE7A1, i);
        const auto traj = run_episode(policy, cases[i], patient, provider, assessor,
                                      reward, registry, max_turns, key);
        sum += traj.realized_weighted_ig;
    }
    return sum / static_cast<double>(cases.size());
}

} // namespace intake
