#include <benchmark/benchmark.h>

#include <memory>

#include "intake/coverage.hpp"
#include "intake/dialogue.hpp"
#include "intake/embedding.hpp"
#include "intake/grpo.hpp"
#include "intake/infogain.hpp"
#include "intake/policy.hpp"
#include "intake/quality.hpp"
#include "intake/rng.hpp"
#include "intake/vignette.hpp"

using namespace intake;

namespace {

// Shared fixtures, built once. Benchmarks measure steady-state costs, so the
// embedding cache is pre-warmed where production code would run warm too.
struct Fixture {
    CategoryRegistry registry = CategoryRegistry::defaults();
    std::vector<VignetteCase> cases;
    std::shared_ptr<CachingProvider> cached;
    LexicalEmbedder raw;
    std::shared_ptr<TemplateBank> bank;
    std::unique_ptr<HeuristicAssessor> assessor;
    RewardConfig reward;

    Fixture() {
        cases = generate_synthetic_cases(4, 42, registry, {12, 12});
        cached = std::make_shared<CachingProvider>(std::make_shared<LexicalEmbedder>());
        bank = std::make_shared<TemplateBank>(TemplateBank::defaults(registry));
        assessor = std::make_unique<HeuristicAssessor>(cached);
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

void bm_embed_sentence(benchmark::State& state) {
    auto& f = fixture();
    const std::string text = "the pain started two days ago and gets worse at night";
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.raw.embed(text));
    }
}
BENCHMARK(bm_embed_sentence);

void bm_cosine_256(benchmark::State& state) {
    auto& f = fixture();
    const auto a = f.raw.embed("sharp chest pain");
    const auto b = f.raw.embed("pressure in the chest");
    for (auto _ : state) {
        benchmark::DoNotOptimize(cosine(a, b));
    }
}
BENCHMARK(bm_cosine_256);

void bm_detect_revealed(benchmark::State& state) {
    auto& f = fixture();
    const auto& kase = f.cases[0];
    const auto uncovered = CoverageState(kase.entities).uncovered();
    const std::string answer =
        "Yes, I have " + kase.entities[0].surface + " and it started recently.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_revealed(answer, uncovered, *f.cached));
    }
}
BENCHMARK(bm_detect_revealed);

// estimate_all + information_gain: the per-candidate reward math that
// dominates a training step (K candidates per state, every turn).
void bm_information_gain(benchmark::State& state) {
    auto& f = fixture();
    const auto& kase = f.cases[0];
    CoverageState cov(kase.entities);
    const auto uncovered = cov.uncovered();
    const auto question = f.bank->render(0, kase, cov);
    for (auto _ : state) {
        const auto probs =
            estimate_all(uncovered, question, *f.cached, *f.assessor);
        benchmark::DoNotOptimize(information_gain(uncovered, probs));
    }
}
BENCHMARK(bm_information_gain);

void bm_grpo_gradient(benchmark::State& state) {
    auto& f = fixture();
    const std::size_t m = f.bank->size();
    const std::size_t fdim = feature_dim(f.registry);
    PolicyParameters params = PolicyParameters::zeros(m, fdim);
    Rng rng(5);
    for (auto& x : params.theta) x = rng.next_double(-1, 1);
    for (auto& x : params.bias) x = rng.next_double(-1, 1);

    GroupSample group;
    for (std::size_t i = 0; i < fdim; ++i) group.features.push_back(rng.next_double());
    for (int i = 0; i < 4; ++i) {
        group.action_indices.push_back(static_cast<int>(rng.next_below(m)));
        group.rewards.push_back(rng.next_double(0, 6));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(grpo_gradient(params, group, 1.0));
    }
}
BENCHMARK(bm_grpo_gradient);

void bm_optimizer_step(benchmark::State& state) {
    auto& f = fixture();
    const std::size_t m = f.bank->size();
    const std::size_t fdim = feature_dim(f.registry);
    PolicyParameters params = PolicyParameters::zeros(m, fdim);
    PolicyGradient grad{std::vector<double>(m * fdim, 0.01),
                        std::vector<double>(m, 0.01)};
    GrpoConfig cfg;
    auto adam = AdamState::zeros(m, fdim);
    for (auto _ : state) {
        optimizer_step(params, grad, cfg, adam);
        benchmark::DoNotOptimize(params.theta.data());
    }
}
BENCHMARK(bm_optimizer_step);

void bm_run_episode(benchmark::State& state) {
    auto& f = fixture();
    const auto& kase = f.cases[1];
    SoftmaxPolicy policy(f.bank, f.registry);
    std::uint64_t key = 0;
    for (auto _ : state) {
        SimulatedPatient patient(kase, {}, f.cached);
        benchmark::DoNotOptimize(run_episode(policy, kase, patient, *f.cached,
                                             *f.assessor, f.reward, f.registry, 8,
                                             ++key));
    }
}
BENCHMARK(bm_run_episode);

} // namespace

BENCHMARK_MAIN();
