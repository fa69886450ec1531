#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "intake/config.hpp"
#include "intake/coverage.hpp"
#include "intake/dialogue.hpp"
#include "intake/embedding.hpp"
#include "intake/errors.hpp"
#include "intake/grpo.hpp"
#include "intake/hpi_eval.hpp"
#include "intake/infogain.hpp"
#include "intake/policy.hpp"
#include "intake/quality.hpp"
#include "intake/signals.hpp"
#include "intake/text.hpp"
#include "intake/vignette.hpp"

using namespace intake;

namespace {

// Frozen oracle values, computed independently of this codebase.
constexpr double kH005 = 0.28639695711595625;      // binary entropy at 0.05
constexpr double kMaxGain = 0.7136030428840437;    // 1 - H(0.05)
constexpr double kH09 = 0.4689955935892811;        // binary entropy at 0.9
constexpr double kIg3 = 1.2446074492947625;        // IG of p = (0.9, 0.5, 0.05)
constexpr double kWeighted08 = 0.5708824343072351; // 0.8 * (1 - H(0.05))
constexpr double kSoftmax10a = 0.7310585786300049; // softmax(1,0) first entry
constexpr double kSoftmax10b = 0.2689414213699951;
constexpr double kLogQuarter = 1.3862943611198906; // -log(1/4)
constexpr double kBias5Top = 0.980186662653491;    // softmax((5,0,0,0)) top
constexpr double kBias5Rest = 0.006604445782169677;

std::vector<ClinicalEntity> three_entities() {
    return {{"e1", "chest pain", {"pain in the chest"}, "symptom", 1.0},
            {"e2", "since yesterday", {}, "temporal_pattern", 0.9},
            {"e3", "metformin twice daily", {}, "medication", 0.6}};
}

// Provider/assessor pair returning exactly the signals a test dictates, so
// probability arithmetic can be pinned without lexical noise.
class FixedAssessor : public QualityAssessor {
public:
    explicit FixedAssessor(double relevance) : relevance_(relevance) {}
    double relevance(const ClinicalEntity&, const std::string&) const override {
        return relevance_;
    }
    QualityScores assess(const std::string&, const std::string&,
                         const CoverageState&) const override {
        return make_quality_scores(0.5, 0.5, 0.5, 0.5, 0.5, "fixed");
    }

private:
    double relevance_;
};

class ZeroProvider : public EmbeddingProvider {
public:
    std::vector<double> embed(const std::string&) const override {
        return std::vector<double>(4, 0.0);
    }
    std::size_t dim() const override { return 4; }
};

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("intake-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("binary entropy endpoints and the maximum") {
    CHECK(binary_entropy(0.5) == 1.0);
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.05) == doctest::Approx(kH005).epsilon(1e-12));
    CHECK(binary_entropy(0.95) == doctest::Approx(kH005).epsilon(1e-12));
    CHECK(binary_entropy(0.9) == doctest::Approx(kH09).epsilon(1e-12));
    CHECK_THROWS_AS(binary_entropy(-0.01), DomainError);
    CHECK_THROWS_AS(binary_entropy(1.01), DomainError);
}

TEST_CASE("information gain of a known probability vector") {
    const auto entities = three_entities();
    CoverageProbabilities probs;
    probs.entries = {{"e1", {0, 0, 0, 0.9}}, {"e2", {0, 0, 0, 0.5}},
                     {"e3", {0, 0, 0, 0.05}}};
    const auto g = information_gain(entities, probs);
    CHECK(g.prior_entropy == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(g.ig == doctest::Approx(kIg3).epsilon(1e-12));
    CHECK(g.ig == doctest::Approx(g.prior_entropy - g.conditional_entropy).epsilon(1e-12));

    double from_categories = 0.0;
    for (const auto& [cat, ig] : g.per_category_ig) from_categories += ig;
    CHECK(from_categories == doctest::Approx(g.ig).epsilon(1e-9));

    // weighted sum: 1.0*(1-H(.9)) + 0.9*(1-H(.5)) + 0.6*(1-H(.05))
    const double expect_weighted =
        1.0 * (1.0 - kH09) + 0.9 * 0.0 + 0.6 * kMaxGain;
    CHECK(g.weighted_ig == doctest::Approx(expect_weighted).epsilon(1e-12));
}

TEST_CASE("weighted gain of a single low-probability entity") {
    std::vector<ClinicalEntity> one = {
        {"e1", "mild nausea", {}, "severity", 0.8}};
    CoverageProbabilities probs;
    probs.entries = {{"e1", {0, 0, 0, 0.05}}};
    const auto g = information_gain(one, probs);
    CHECK(g.weighted_ig == doctest::Approx(kWeighted08).epsilon(1e-12));
}

TEST_CASE("information gain is zero exactly when every probability is half") {
    const auto entities = three_entities();
    CoverageProbabilities flat;
    flat.entries = {{"e1", {0, 0, 0, 0.5}}, {"e2", {0, 0, 0, 0.5}},
                    {"e3", {0, 0, 0, 0.5}}};
    CHECK(information_gain(entities, flat).ig == 0.0);

    Rng rng(41);
    for (int i = 0; i < 2000; ++i) {
        CoverageProbabilities probs;
        bool any_off_half = false;
        for (const auto& e : entities) {
            double p = 0.05 + 0.9 * rng.next_double();
            if (rng.next_u64() % 4 == 0) p = 0.5;
            if (p != 0.5) any_off_half = true;
            probs.entries.push_back({e.id, {0, 0, 0, p}});
        }
        const auto g = information_gain(entities, probs);
        CHECK(g.ig >= 0.0);
        CHECK(g.ig <= kMaxGain * 3.0 + 1e-12);
        if (any_off_half) {
            CHECK(g.ig > 0.0);
        } else {
            CHECK(g.ig == 0.0);
        }
    }
}

TEST_CASE("probability mixing arithmetic and clipping") {
    const MixtureWeights thirds;
    const ClipBounds clip;
    CHECK(mix_and_clip(0.9, 0.6, 1.0, thirds, clip) ==
          doctest::Approx(0.8333333333333334).epsilon(1e-4));
    CHECK(mix_and_clip(0.5, 0.5, 0.5, {0.2, 0.5, 0.3}, clip) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mix_and_clip(0.0, 0.0, 0.0, thirds, clip) == 0.05);
    CHECK(mix_and_clip(1.0, 1.0, 1.0, thirds, clip) == 0.95);

    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double a = rng.next_double(), b = rng.next_double(),
                     c = rng.next_double();
        const double p = mix_and_clip(a, b, c, thirds, clip);
        CHECK(p >= 0.05);
        CHECK(p <= 0.95);
    }
}

TEST_CASE("coverage probability estimation uses the assessor verbatim") {
    ZeroProvider provider;
    FixedAssessor assessor(0.6);
    ClinicalEntity e{"e1", "chest pain", {}, "symptom", 1.0};
    // sem = 0 (zero vectors), llm = 0.6, key = 1.0 when both words appear
    const auto s = estimate_coverage_probability(e, "any chest pain today", provider,
                                                 assessor);
    CHECK(s.sem == 0.0);
    CHECK(s.llm == 0.6);
    CHECK(s.key == 1.0);
    CHECK(s.p == doctest::Approx((0.6 + 1.0) / 3.0).epsilon(1e-12));

    const auto miss = estimate_coverage_probability(e, "hello there", provider,
                                                    FixedAssessor(0.0));
    CHECK(miss.p == 0.05);

    CHECK_THROWS_AS(estimate_coverage_probability(e, "q", provider, assessor,
                                                  {0.5, 0.2, 0.2}),
                    ConfigError);
}

TEST_CASE("tokenizer and important-word rules") {
    const auto toks = text::tokenize("The pain, it's WORSE at night!");
    CHECK(toks == std::vector<std::string>{"the", "pain", "it", "s", "worse",
                                           "at", "night"});
    CHECK(text::is_important("pain"));
    CHECK_FALSE(text::is_important("the"));
    CHECK_FALSE(text::is_important("at")); // two letters never carry content
    CHECK(text::normalize("  Chest   PAIN. ") == "chest pain");
    CHECK(text::important_overlap("chest pain", text::tokenize("the pain is in my chest")) ==
          1.0);
    CHECK(text::important_overlap("chest pain", text::tokenize("no discomfort")) == 0.0);

    const auto sents = text::split_sentences("First one. Second! Third? ");
    REQUIRE(sents.size() == 3);
    CHECK(sents[0] == "First one");
    CHECK(sents[2] == "Third");
}

TEST_CASE("lexical embedding determinism and degenerate inputs") {
    LexicalEmbedder emb;
    const auto a = emb.embed("fever");
    CHECK(cosine(a, emb.embed("fever")) == doctest::Approx(1.0).epsilon(1e-12));

    double norm = 0.0;
    for (double x : a) norm += x * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));

    CHECK(cosine(emb.embed(""), a) == 0.0);
}

TEST_CASE("embedding orders related above unrelated") {
    LexicalEmbedder emb;
    const double related = cosine(emb.embed("chest pain"), emb.embed("pain in the chest"));
    const double unrelated = cosine(emb.embed("chest pain"), emb.embed("blue bicycle"));
    CHECK(related > unrelated);
    CHECK(cosine(emb.embed("I feel fine"), emb.embed("shortness of breath")) < 0.85);
}

TEST_CASE("caching provider returns the inner provider's vectors") {
    auto inner = std::make_shared<LexicalEmbedder>();
    CachingProvider cache(inner);
    CHECK(cosine(cache.embed("nausea"), inner->embed("nausea")) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cache.dim() == inner->dim());
}

TEST_CASE("revealed-entity detection methods and precedence") {
    LexicalEmbedder emb;
    const auto entities = three_entities();

    auto r1 = detect_revealed("I have chest pain since this morning", entities, emb);
    REQUIRE(r1.size() >= 1);
    CHECK(r1[0].entity_id == "e1");
    CHECK(r1[0].method == MatchMethod::exact);
    CHECK(r1[0].score == 1.0);

    auto r2 = detect_revealed("the pain is in my chest", entities, emb);
    REQUIRE(r2.size() == 1);
    CHECK(r2[0].entity_id == "e1");
    CHECK(r2[0].method == MatchMethod::multiword);

    // alias hits count as exact
    auto r3 = detect_revealed("there is pain in the chest area", entities, emb);
    REQUIRE(r3.size() == 1);
    CHECK(r3[0].method == MatchMethod::exact);

    CHECK(detect_revealed("", entities, emb).empty());
    CHECK(detect_revealed("nothing relevant here", entities, emb).empty());

    CHECK_THROWS_AS(detect_revealed("x", entities, emb, 0.0), ConfigError);
}

TEST_CASE("detection is idempotent and never duplicates an entity") {
    LexicalEmbedder emb;
    const auto entities = three_entities();
    const std::string response =
        "I have chest pain, chest pain I said, since yesterday";
    const auto once = detect_revealed(response, entities, emb);
    const auto twice = detect_revealed(response, entities, emb);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(once[i].entity_id == twice[i].entity_id);
    }
    for (std::size_t i = 0; i < once.size(); ++i) {
        for (std::size_t j = i + 1; j < once.size(); ++j) {
            CHECK(once[i].entity_id != once[j].entity_id);
        }
    }
}

TEST_CASE("coverage state moves and partition invariant") {
    CoverageState state(three_entities());
    CHECK(state.uncovered_count() == 3);

    state.apply({{"e1", MatchMethod::exact, 1.0}}, 2);
    CHECK(state.covered_count() == 1);
    CHECK(state.covered()[0].entity_id == "e1");
    CHECK(state.covered()[0].turn == 2);
    CHECK(state.is_covered("e1"));
    CHECK_FALSE(state.is_covered("e2"));

    state.apply({}, 3);
    CHECK(state.covered_count() == 1);

    state.apply({{"e2", MatchMethod::multiword, 1.0},
                 {"e3", MatchMethod::semantic, 0.9}},
                4);
    CHECK(state.covered_count() == 3);
    CHECK(state.uncovered_count() == 0);
    CHECK(state.covered_count() + state.uncovered_count() == state.all().size());

    CHECK_THROWS_AS(state.apply({{"e1", MatchMethod::exact, 1.0}}, 5),
                    ContractViolation);
    CHECK_THROWS_AS(state.apply({{"nope", MatchMethod::exact, 1.0}}, 5),
                    ContractViolation);
}

TEST_CASE("random match sequences keep the partition invariant") {
    auto registry = CategoryRegistry::defaults();
    const auto cases = generate_synthetic_cases(5, 13, registry);
    Rng rng(99);
    for (const auto& kase : cases) {
        CoverageState state(kase.entities);
        int turn = 0;
        while (state.uncovered_count() > 0) {
            const auto uncovered = state.uncovered();
            std::vector<MatchResult> ms;
            const std::size_t take = 1 + rng.next_u64() % 2;
            for (std::size_t i = 0; i < take && i < uncovered.size(); ++i) {
                ms.push_back({uncovered[i].id, MatchMethod::exact, 1.0});
            }
            const std::size_t before = state.covered_count();
            state.apply(ms, turn++);
            CHECK(state.covered_count() == before + ms.size());
            CHECK(state.covered_count() + state.uncovered_count() ==
                  kase.entities.size());
        }
    }
}

TEST_CASE("quality score aggregation and clamping") {
    const auto q = make_quality_scores(0.8, 0.7, 0.9, 0.85, 0.6, "heuristic");
    CHECK(q.aggregate == doctest::Approx(0.77).epsilon(1e-12));

    const auto clamped = make_quality_scores(1.3, -0.2, 0.5, 0.5, 0.5, "x");
    CHECK(clamped.information_gathering == 1.0);
    CHECK(clamped.specificity == 0.0);
}

TEST_CASE("heuristic assessor rewards question marks and concise wording") {
    auto provider = std::make_shared<LexicalEmbedder>();
    HeuristicAssessor assessor(provider, {}, {});
    CoverageState state(three_entities());

    const auto asked = assessor.assess("Do you have chest pain?", "", state);
    const auto stated = assessor.assess("Do you have chest pain", "", state);
    CHECK(asked.patient_engagement == 1.0);
    CHECK(stated.patient_engagement == 0.5);
    CHECK(asked.provenance == "heuristic");
    // a targeted question beats an unrelated one on gathering and relevance
    CHECK(asked.information_gathering > 0.8);
    const auto offtopic = assessor.assess("Do you enjoy gardening?", "", state);
    CHECK(asked.clinical_relevance > offtopic.clinical_relevance);
    CHECK(asked.information_gathering > offtopic.information_gathering);

    std::string rambling = "tell me";
    for (int i = 0; i < 70; ++i) rambling += " word";
    rambling += "?";
    CHECK(assessor.assess(rambling, "", state).patient_engagement == 0.0);
}

TEST_CASE("reward combination arithmetic") {
    const auto q = make_quality_scores(0.8, 0.8, 0.8, 0.8, 0.8, "x");
    const auto r = combine_reward(1.244607, q, 0.5);
    CHECK(r.total == doctest::Approx(1.644607).epsilon(1e-9));
    CHECK(r.weighted_ig == 1.244607);
    CHECK_THROWS_AS(combine_reward(1.0, q, -0.1), ConfigError);
}

TEST_CASE("ranking weights: normalization, order, and temperature limits") {
    const auto u = ranking_weights({1.0, 0.0}, 1.0);
    CHECK(u[0] == doctest::Approx(kSoftmax10a).epsilon(1e-9));
    CHECK(u[1] == doctest::Approx(kSoftmax10b).epsilon(1e-9));

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> r = {rng.next_double(-5, 5), rng.next_double(-5, 5),
                                 rng.next_double(-5, 5), rng.next_double(-5, 5)};
        const auto w = ranking_weights(r, 0.7);
        double sum = 0.0;
        for (double x : w) {
            CHECK(x > 0.0);
            sum += x;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        for (std::size_t a = 0; a < r.size(); ++a) {
            for (std::size_t b = 0; b < r.size(); ++b) {
                if (r[a] > r[b]) CHECK(w[a] > w[b]);
            }
        }
        // shifting every reward leaves the weights unchanged
        std::vector<double> shifted = r;
        for (double& x : shifted) x += 11.25;
        const auto ws = ranking_weights(shifted, 0.7);
        for (std::size_t a = 0; a < r.size(); ++a) {
            CHECK(ws[a] == doctest::Approx(w[a]).epsilon(1e-9));
        }
    }

    const auto hot = ranking_weights({3.0, 1.0, 2.0}, 1e6);
    for (double x : hot) CHECK(std::abs(x - 1.0 / 3.0) < 1e-5);

    const auto cold = ranking_weights({3.0, 1.0, 2.0}, 1e-9);
    CHECK(cold[0] == doctest::Approx(1.0).epsilon(1e-9));

    const auto tied = ranking_weights({2.0, 2.0}, 1e-9);
    CHECK(tied[0] == doctest::Approx(0.5).epsilon(1e-9));

    CHECK_THROWS_AS(ranking_weights({1.0, 2.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(ranking_weights({1.0, 2.0}, -1.0), ConfigError);
}

TEST_CASE("grpo loss at the uniform policy is the log of the bank size") {
    auto params = PolicyParameters::zeros(4, 2);
    GroupSample group;
    group.features = {0.3, 0.7};
    group.action_indices = {0, 2};
    group.rewards = {5.0, 1.0};
    CHECK(grpo_loss(params, group, 1.0) ==
          doctest::Approx(kLogQuarter).epsilon(1e-6));

    // invariant under constant reward shifts
    GroupSample shifted = group;
    for (double& r : shifted.rewards) r += 123.0;
    CHECK(grpo_loss(params, shifted, 1.0) ==
          doctest::Approx(grpo_loss(params, group, 1.0)).epsilon(1e-9));
}

TEST_CASE("grpo gradient of the uniform duplicate-candidate group") {
    auto params = PolicyParameters::zeros(4, 2);
    GroupSample group;
    group.features = {1.0, 0.0};
    group.action_indices = {1, 1};
    group.rewards = {2.0, -1.0};
    const auto g = grpo_gradient(params, group, 1.0);
    CHECK(g.bias[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(g.bias[1] == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(g.bias[2] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(g.bias[3] == doctest::Approx(0.25).epsilon(1e-12));
    // theta column for the active feature mirrors the bias gradient
    CHECK(g.theta[1 * 2 + 0] == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(g.theta[1 * 2 + 1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("equal rewards reduce the gradient to an averaged likelihood pull") {
    Rng rng(17);
    PolicyParameters params = PolicyParameters::zeros(5, 3);
    for (auto& x : params.theta) x = rng.next_double(-1, 1);
    for (auto& x : params.bias) x = rng.next_double(-1, 1);
    GroupSample group;
    group.features = {0.2, 0.8, 0.1};
    group.action_indices = {0, 3, 3};
    group.rewards = {4.0, 4.0, 4.0};
    const auto g = grpo_gradient(params, group, 1.0);

    const auto pi = action_distribution(params, group.features);
    for (std::size_t a = 0; a < 5; ++a) {
        double expect = pi[a];
        if (a == 0) expect -= 1.0 / 3.0;
        if (a == 3) expect -= 2.0 / 3.0;
        CHECK(g.bias[a] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 3 + rng.next_u64() % 4;
        const std::size_t f = 2 + rng.next_u64() % 3;
        PolicyParameters params = PolicyParameters::zeros(m, f);
        for (auto& x : params.theta) x = rng.next_double(-1.5, 1.5);
        for (auto& x : params.bias) x = rng.next_double(-1.5, 1.5);

        GroupSample group;
        for (std::size_t i = 0; i < f; ++i) group.features.push_back(rng.next_double());
        const int k = 2 + static_cast<int>(rng.next_u64() % 3);
        for (int i = 0; i < k; ++i) {
            group.action_indices.push_back(static_cast<int>(rng.next_u64() % m));
            group.rewards.push_back(rng.next_double(-2, 2));
        }
        const double tau = 0.5 + rng.next_double();

        const auto g = grpo_gradient(params, group, tau);
        const double eps = 1e-5;
        auto check_one = [&](double& slot, double analytic) {
            const double keep = slot;
            slot = keep + eps;
            const double up = grpo_loss(params, group, tau);
            slot = keep - eps;
            const double down = grpo_loss(params, group, tau);
            slot = keep;
            const double numeric = (up - down) / (2 * eps);
            const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
            CHECK(std::abs(numeric - analytic) / denom < 1e-5);
        };
        // spot-check a couple of coordinates per draw, not the whole matrix
        const std::size_t bi = rng.next_u64() % m;
        check_one(params.bias[bi], g.bias[bi]);
        const std::size_t ti = rng.next_u64() % (m * f);
        check_one(params.theta[ti], g.theta[ti]);
    }
}

TEST_CASE("optimizer fixed points and the decoupled decay term") {
    GrpoConfig cfg;
    cfg.learning_rate = 1e-4;
    cfg.weight_decay = 0.0;
    auto params = PolicyParameters::zeros(1, 1);
    params.theta[0] = 1.0;
    params.bias[0] = -2.0;
    auto adam = AdamState::zeros(1, 1);
    PolicyGradient zero{{0.0}, {0.0}};
    CHECK(optimizer_step(params, zero, cfg, adam));
    CHECK(params.theta[0] == 1.0);
    CHECK(params.bias[0] == -2.0);

    cfg.weight_decay = 0.01;
    auto adam2 = AdamState::zeros(1, 1);
    CHECK(optimizer_step(params, zero, cfg, adam2));
    CHECK(params.theta[0] == doctest::Approx(0.999999).epsilon(1e-12));

    PolicyGradient bad{{std::nan("")}, {0.0}};
    auto before = params;
    CHECK_FALSE(optimizer_step(params, bad, cfg, adam2));
    CHECK(params.theta[0] == before.theta[0]);
}

TEST_CASE("one adam step matches the hand-computed scalar trace") {
    GrpoConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    auto params = PolicyParameters::zeros(1, 1);
    params.theta[0] = 2.0;
    auto adam = AdamState::zeros(1, 1);
    PolicyGradient g{{0.5}, {0.0}};
    REQUIRE(optimizer_step(params, g, cfg, adam));
    // m=0.05, v=0.00025; mhat=0.5, vhat=0.25; step = 0.1*0.5/(0.5+1e-8)
    const double expect = 2.0 - 0.1 * 0.5 / (0.5 + 1e-8);
    CHECK(params.theta[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("a single step from uniform strictly favors the better candidate") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 4 + rng.next_u64() % 4;
        const std::size_t f = 2 + rng.next_u64() % 3;
        PolicyParameters params = PolicyParameters::zeros(m, f);

        GroupSample group;
        for (std::size_t i = 0; i < f; ++i) group.features.push_back(rng.next_double());
        const int hi = static_cast<int>(rng.next_u64() % m);
        int lo = static_cast<int>(rng.next_u64() % m);
        if (lo == hi) lo = (lo + 1) % static_cast<int>(m);
        group.action_indices = {hi, lo};
        group.rewards = {1.0, 0.0};

        const auto before = action_distribution(params, group.features);
        const auto g = grpo_gradient(params, group, 1.0);
        GrpoConfig cfg;
        cfg.learning_rate = 0.01;
        cfg.weight_decay = 0.0;
        auto adam = AdamState::zeros(m, f);
        REQUIRE(optimizer_step(params, g, cfg, adam));
        const auto after = action_distribution(params, group.features);
        CHECK(after[hi] > before[hi]);
    }
}

TEST_CASE("action distribution: uniform start, shift invariance, known bias") {
    auto registry = CategoryRegistry::defaults();
    auto bank = std::make_shared<TemplateBank>(TemplateBank::defaults(registry));
    SoftmaxPolicy policy(bank, registry);
    REQUIRE(bank->size() == 24);

    std::vector<double> phi(feature_dim(registry), 0.5);
    const auto dist = policy.distribution(phi);
    for (double p : dist) CHECK(p == doctest::Approx(1.0 / 24).epsilon(1e-12));

    PolicyParameters params = PolicyParameters::zeros(4, 2);
    params.bias = {5.0, 0.0, 0.0, 0.0};
    const auto d = action_distribution(params, {0.0, 0.0});
    CHECK(d[0] == doctest::Approx(kBias5Top).epsilon(1e-9));
    CHECK(d[1] == doctest::Approx(kBias5Rest).epsilon(1e-9));

    for (auto& b : params.bias) b += 3.25;
    const auto shifted = action_distribution(params, {0.0, 0.0});
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(shifted[i] == doctest::Approx(d[i]).epsilon(1e-12));
    }

    double sum = 0.0;
    for (double p : d) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(action_distribution(params, {0.0}), ContractViolation);
}

TEST_CASE("candidate sampling: replay, recorded log-probs, frequencies") {
    auto registry = CategoryRegistry::defaults();
    auto bank = std::make_shared<TemplateBank>(TemplateBank::defaults(registry));
    const auto cases = generate_synthetic_cases(1, 0, registry);
    CoverageState cov(cases[0].entities);
    StateContext ctx{&cases[0], &cov, 0, 8, false};

    SoftmaxPolicy policy(bank, registry);
    Rng a(1234), b(1234);
    const auto c1 = policy.sample_candidates(ctx, 2, a);
    const auto c2 = policy.sample_candidates(ctx, 2, b);
    REQUIRE(c1.size() == 2);
    CHECK(c1[0].template_index == c2[0].template_index);
    CHECK(c1[1].template_index == c2[1].template_index);
    CHECK(c1[0].question == c2[0].question);

    const auto phi = compute_features(ctx, registry);
    const auto dist = policy.distribution(phi);
    for (const auto& c : c1) {
        CHECK(c.log_prob ==
              doctest::Approx(std::log(dist[c.template_index])).epsilon(1e-12));
    }

    // concentrated distribution: empirical frequency tracks probability
    PolicyParameters sharp = PolicyParameters::zeros(4, 2);
    sharp.bias = {5.0, 0.0, 0.0, 0.0};
    Rng mc(777);
    int hits = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto d = action_distribution(sharp, {0.0, 0.0});
        const double r = mc.next_double();
        double cum = 0.0;
        std::size_t idx = 3;
        for (std::size_t j = 0; j < 4; ++j) {
            cum += d[j];
            if (r < cum) {
                idx = j;
                break;
            }
        }
        if (idx == 0) ++hits;
    }
    CHECK(std::abs(hits / 1000.0 - kBias5Top) < 0.03);
}

TEST_CASE("template rendering is pure and fills the heaviest open category") {
    auto registry = CategoryRegistry::defaults();
    auto bank = std::make_shared<TemplateBank>(TemplateBank::defaults(registry));
    const auto cases = generate_synthetic_cases(3, 11, registry);
    const auto& kase = cases[0];
    CoverageState cov(kase.entities);

    for (std::size_t t = 0; t < bank->size(); ++t) {
        CHECK(bank->render(t, kase, cov) == bank->render(t, kase, cov));
    }

    // the hint slot takes an uncovered surface from the heaviest open
    // category: symptom outweighs everything while it has open entities
    std::string heaviest;
    double best_mass = 0.0;
    for (const auto& cat : registry.categories()) {
        double count = 0;
        for (const auto& e : kase.entities) {
            if (e.category == cat.label) ++count;
        }
        if (cat.weight * count > best_mass) {
            best_mass = cat.weight * count;
            heaviest = cat.label;
        }
    }
    std::string expected_surface;
    for (const auto& e : kase.entities) {
        if (e.category == heaviest) {
            expected_surface = e.surface;
            break;
        }
    }
    const auto q = bank->render(0, kase, cov);
    CHECK(q.find(expected_surface) != std::string::npos);

    CHECK_THROWS_AS(bank->render(bank->size(), kase, cov), ContractViolation);
}

TEST_CASE("template bank validation") {
    auto registry = CategoryRegistry::defaults();
    std::vector<QuestionTemplate> bad;
    for (const auto& c : registry.categories()) {
        bad.push_back({"About your " + c.label + "?", QuestionTemplate::Slot::none,
                       c.label});
    }
    bad.push_back({"Missing brace", QuestionTemplate::Slot::hint, "symptom"});
    CHECK_THROWS_AS(TemplateBank(bad, registry), ValidationError);

    std::vector<QuestionTemplate> unknown = bad;
    unknown.pop_back();
    unknown.push_back({"What about {hint}?", QuestionTemplate::Slot::hint, "made_up"});
    CHECK_THROWS_AS(TemplateBank(unknown, registry), ValidationError);
}

TEST_CASE("feature vector stays in range with the documented layout") {
    auto registry = CategoryRegistry::defaults();
    CHECK(feature_dim(registry) == 2 * registry.size() + 3);
    const auto cases = generate_synthetic_cases(2, 5, registry);
    CoverageState cov(cases[0].entities);
    StateContext ctx{&cases[0], &cov, 3, 8, true};
    const auto phi = compute_features(ctx, registry);
    REQUIRE(phi.size() == feature_dim(registry));
    for (double x : phi) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
    CHECK(phi[registry.size()] == doctest::Approx(3.0 / 8.0));
    CHECK(phi[registry.size() + 2] == 1.0);
}

TEST_CASE("checkpoint round-trip and schema-hash refusal") {
    auto registry = CategoryRegistry::defaults();
    auto bank = std::make_shared<TemplateBank>(TemplateBank::defaults(registry));
    TempDir dir;

    Checkpoint ck;
    ck.bank_hash = bank->hash();
    ck.feature_schema_hash = feature_schema_hash(registry);
    ck.params = PolicyParameters::zeros(bank->size(), feature_dim(registry));
    Rng rng(8);
    for (auto& x : ck.params.theta) x = rng.next_double(-1, 1);
    for (auto& x : ck.params.bias) x = rng.next_double(-1, 1);
    ck.adam_m_theta.assign(ck.params.theta.size(), 0.25);
    ck.adam_v_theta.assign(ck.params.theta.size(), 0.5);
    ck.adam_m_bias.assign(ck.params.bias.size(), 0.125);
    ck.adam_v_bias.assign(ck.params.bias.size(), 0.0625);
    ck.adam_step = 42;
    ck.epochs_completed = 7;

    const auto path = dir.file("ck.json");
    save_checkpoint(path, ck);
    const auto back = load_checkpoint_validated(path, *bank, registry);
    CHECK(back.params.theta == ck.params.theta);
    CHECK(back.params.bias == ck.params.bias);
    CHECK(back.adam_v_theta == ck.adam_v_theta);
    CHECK(back.adam_step == 42);
    CHECK(back.epochs_completed == 7);

    // a different bank refuses the checkpoint
    auto other_templates = TemplateBank::defaults(registry).templates();
    other_templates[0].text = "Something different about {hint}?";
    TemplateBank other(other_templates, registry);
    CHECK(other.hash() != bank->hash());
    CHECK_THROWS_AS(load_checkpoint_validated(path, other, registry), ValidationError);

    CHECK_THROWS_AS(load_checkpoint(dir.file("missing.json")), IoError);
}

TEST_CASE("synthetic case generation invariants") {
    auto registry = CategoryRegistry::defaults();

    const auto a = generate_synthetic_cases(5, 7, registry);
    const auto b = generate_synthetic_cases(5, 7, registry);
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a[i].case_id == b[i].case_id);
        CHECK(a[i].hpi_text == b[i].hpi_text);
        REQUIRE(a[i].entities.size() == b[i].entities.size());
        for (std::size_t j = 0; j < a[i].entities.size(); ++j) {
            CHECK(a[i].entities[j].surface == b[i].entities[j].surface);
        }
    }

    const auto one = generate_synthetic_cases(1, 0, registry, {10, 15});
    CHECK(one[0].entities.size() >= 10);
    CHECK(one[0].entities.size() <= 15);

    const auto many = generate_synthetic_cases(100, 3, registry);
    for (const auto& cat : registry.categories()) {
        bool seen = false;
        for (const auto& kase : many) {
            for (const auto& e : kase.entities) {
                if (e.category == cat.label) {
                    seen = true;
                    break;
                }
            }
            if (seen) break;
        }
        CHECK_MESSAGE(seen, "category never generated: ", cat.label);
    }

    // every surface is recoverable verbatim from the narrative,
    // one ground-truth statement per entity
    for (const auto& kase : many) {
        validate_case(kase, registry);
        CHECK(kase.ground_truth_statements.size() == kase.entities.size());
        for (const auto& e : kase.entities) {
            CHECK(kase.hpi_text.find(e.surface) != std::string::npos);
        }
    }
}

TEST_CASE("case files round-trip byte-identically") {
    auto registry = CategoryRegistry::defaults();
    const auto cases = generate_synthetic_cases(4, 21, registry);
    TempDir dir;
    const auto p1 = dir.file("a.jsonl");
    const auto p2 = dir.file("b.jsonl");
    save_cases(p1, cases);
    const auto loaded = load_cases(p1, registry);
    save_cases(p2, loaded);
    CHECK(slurp(p1) == slurp(p2));

    // entity weights come from the registry at load time
    CHECK(loaded[0].entities[0].importance_weight ==
          registry.weight(loaded[0].entities[0].category));

    std::ofstream bad(dir.file("bad.jsonl"));
    bad << R"({"case_id": "ok-but-truncated")" << "\n";
    bad.close();
    try {
        load_cases(dir.file("bad.jsonl"), registry);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":1") != std::string::npos);
    }
}

TEST_CASE("simulated patient discloses gradually and verbatim") {
    auto registry = CategoryRegistry::defaults();
    const auto cases = generate_synthetic_cases(1, 2, registry);
    const auto& kase = cases[0];
    auto provider = std::make_shared<CachingProvider>(std::make_shared<LexicalEmbedder>());
    SimulatedPatient patient(kase, {}, provider);
    CoverageState state(kase.entities);

    const auto& target = kase.entities[0];
    const auto reply =
        patient.answer("Can you tell me about " + target.surface + "?", state);
    CHECK(reply.text.find(target.surface) != std::string::npos);
    const auto found = detect_revealed(reply.text, state.uncovered(), *provider);
    bool hit = false;
    for (const auto& m : found) {
        if (m.entity_id == target.id) hit = true;
    }
    CHECK(hit);

    const auto offtopic = patient.answer("What is your favorite color?", state);
    CHECK(offtopic.text == SimulatedPatient::non_informative_reply());
    CHECK(offtopic.disclosed_ids.empty());

    // cap: no answer ever names more than disclosure_cap entities
    PatientConfig cfg;
    cfg.disclosure_cap = 2;
    SimulatedPatient capped(kase, cfg, provider);
    const auto broad = capped.answer(kase.hpi_text, state); // maximally relevant
    CHECK(broad.disclosed_ids.size() <= 2);

    CoverageState all_covered(kase.entities);
    std::vector<MatchResult> everything;
    for (const auto& e : kase.entities) {
        everything.push_back({e.id, MatchMethod::exact, 1.0});
    }
    all_covered.apply(everything, 0);
    CHECK(patient.answer("Anything else?", all_covered).text ==
          SimulatedPatient::non_informative_reply());
}

TEST_CASE("episodes: caps, determinism, and reward accounting") {
    auto registry = CategoryRegistry::defaults();
    const auto cases = generate_synthetic_cases(2, 9, registry);
    const auto& kase = cases[0];
    auto provider = std::make_shared<CachingProvider>(std::make_shared<LexicalEmbedder>());
    HeuristicAssessor assessor(provider, {}, {});
    RewardConfig reward;

    auto bank = std::make_shared<TemplateBank>(TemplateBank::defaults(registry));
    SoftmaxPolicy policy(bank, registry);

    SimulatedPatient p1(kase, {}, provider);
    auto t1 = run_episode(policy, kase, p1, *provider, assessor, reward, registry, 1,
                          555);
    CHECK(t1.turns.size() == 1);

    SimulatedPatient p2(kase, {}, provider);
    auto t2 = run_episode(policy, kase, p2, *provider, assessor, reward, registry, 8,
                          999);
    SimulatedPatient p3(kase, {}, provider);
    auto t3 = run_episode(policy, kase, p3, *provider, assessor, reward, registry, 8,
                          999);
    REQUIRE(t2.turns.size() == t3.turns.size());
    for (std::size_t i = 0; i < t2.turns.size(); ++i) {
        CHECK(t2.turns[i].question == t3.turns[i].question);
        CHECK(t2.turns[i].answer == t3.turns[i].answer);
        CHECK(t2.turns[i].reward.total == t3.turns[i].reward.total);
    }

    double reward_sum = 0.0, realized = 0.0;
    std::size_t revealed_count = 0;
    for (const auto& turn : t2.turns) {
        reward_sum += turn.reward.total;
        realized += turn.realized_weighted_ig;
        revealed_count += turn.revealed_ids.size();
    }
    CHECK(t2.total_reward == doctest::Approx(reward_sum).epsilon(1e-12));
    CHECK(t2.realized_weighted_ig == doctest::Approx(realized).epsilon(1e-12));
    CHECK(revealed_count == t2.final_coverage.covered_count());

    CHECK_THROWS_AS(run_episode(policy, kase, p1, *provider, assessor, reward,
                                registry, 0, 1),
                    ConfigError);
}

TEST_CASE("oracle interviewing empties a small case quickly") {
    auto registry = CategoryRegistry::defaults();
    auto base = generate_synthetic_cases(1, 4, registry, {10, 10})[0];
    base.entities.resize(3);
    base.ground_truth_statements.resize(3);
    auto provider = std::make_shared<CachingProvider>(std::make_shared<LexicalEmbedder>());
    HeuristicAssessor assessor(provider, {}, {});
    SimulatedPatient patient(base, {}, provider);
    OracleEntityPolicy oracle;
    const auto traj = run_episode(oracle, base, patient, *provider, assessor, {},
                                  registry, 8, 77);
    CHECK(traj.final_coverage.uncovered_count() == 0);
    CHECK(traj.turns.size() <= 3);
}

TEST_CASE("turn samples carry exact history prefixes") {
    auto registry = CategoryRegistry::defaults();
    const auto cases = generate_synthetic_cases(1, 6, registry);
    auto provider = std::make_shared<CachingProvider>(std::make_shared<LexicalEmbedder>());
    HeuristicAssessor assessor(provider, {}, {});
    auto bank = std::make_shared<TemplateBank>(TemplateBank::defaults(registry));
    SoftmaxPolicy policy(bank, registry);

    for (int n = 1; n <= 8; ++n) {
        SimulatedPatient patient(cases[0], {}, provider);
        const auto traj = run_episode(policy, cases[0], patient, *provider, assessor,
                                      {}, registry, n, 4000 + n);
        const auto samples = extract_turn_samples(traj);
        REQUIRE(samples.size() == traj.turns.size());
        for (std::size_t t = 0; t < samples.size(); ++t) {
            std::size_t q_count = 0;
            for (std::size_t pos = samples[t].state_text.find("Q: ");
                 pos != std::string::npos;
                 pos = samples[t].state_text.find("Q: ", pos + 1)) {
                ++q_count;
            }
            CHECK(q_count == t);
            CHECK(samples[t].state_text.find(traj.chief_complaint) != std::string::npos);
            if (t > 0) {
                CHECK(samples[t].state_text.find(traj.turns[t - 1].question) !=
                      std::string::npos);
            }
            // templates repeat, so only a first-time question is guaranteed
            // to be absent from its own prefix
            bool asked_before = false;
            for (std::size_t u = 0; u < t; ++u) {
                asked_before |= traj.turns[u].question == traj.turns[t].question;
            }
            if (!asked_before) {
                CHECK(samples[t].state_text.find(traj.turns[t].question) ==
                      std::string::npos);
            }
        }
    }
}

TEST_CASE("training: no-op run, determinism, and exact resume") {
    auto registry = CategoryRegistry::defaults();
    const auto cases = generate_synthetic_cases(6, 12, registry);
    auto provider = std::make_shared<CachingProvider>(std::make_shared<LexicalEmbedder>());
    HeuristicAssessor assessor(provider, {}, {});
    RewardConfig reward;
    auto bank = std::make_shared<TemplateBank>(TemplateBank::defaults(registry));

    GrpoConfig cfg;
    cfg.epochs = 0;
    SoftmaxPolicy noop(bank, registry);
    const auto empty = train(cases, noop, {}, reward, cfg, *provider, assessor, 8,
                             AdamState::zeros(noop.params().m, noop.params().f));
    CHECK(empty.history.empty());
    CHECK(empty.params.theta == PolicyParameters::zeros(24, feature_dim(registry)).theta);

    cfg.epochs = 4;
    cfg.steps_per_epoch = 3;
    cfg.batch_size = 4;
    cfg.learning_rate = 0.05;
    cfg.seed = 5;

    SoftmaxPolicy run_a(bank, registry);
    const auto a = train(cases, run_a, {}, reward, cfg, *provider, assessor, 8,
                         AdamState::zeros(run_a.params().m, run_a.params().f));
    SoftmaxPolicy run_b(bank, registry);
    const auto b = train(cases, run_b, {}, reward, cfg, *provider, assessor, 8,
                         AdamState::zeros(run_b.params().m, run_b.params().f));
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].mean_reward == b.history[i].mean_reward);
        CHECK(a.history[i].loss == b.history[i].loss);
        CHECK(a.history[i].mean_episode_ig == b.history[i].mean_episode_ig);
    }
    CHECK(a.params.theta == b.params.theta);

    // stop after 2 epochs, resume for the remaining 2: metrics and params
    // must equal the uninterrupted run exactly
    GrpoConfig half = cfg;
    half.epochs = 2;
    SoftmaxPolicy run_c(bank, registry);
    const auto first = train(cases, run_c, {}, reward, half, *provider, assessor, 8,
                             AdamState::zeros(run_c.params().m, run_c.params().f));
    SoftmaxPolicy run_d(bank, registry, first.params);
    const auto rest = train(cases, run_d, {}, reward, cfg, *provider, assessor, 8,
                            first.adam, 2);
    REQUIRE(first.history.size() + rest.history.size() == a.history.size());
    for (std::size_t i = 0; i < rest.history.size(); ++i) {
        const auto& straight = a.history[first.history.size() + i];
        CHECK(rest.history[i].epoch == straight.epoch);
        CHECK(rest.history[i].mean_reward == straight.mean_reward);
        CHECK(rest.history[i].loss == straight.loss);
        CHECK(rest.history[i].mean_episode_ig == straight.mean_episode_ig);
    }
    CHECK(rest.params.theta == a.params.theta);
    CHECK(rest.params.bias == a.params.bias);
}

TEST_CASE("a training run lifts realized information gain") {
    auto registry = CategoryRegistry::defaults();
    const auto cases = generate_synthetic_cases(20, 42, registry, {10, 15});
    auto provider = std::make_shared<CachingProvider>(std::make_shared<LexicalEmbedder>());
    HeuristicAssessor assessor(provider, {}, {});
    RewardConfig reward;
    auto bank = std::make_shared<TemplateBank>(TemplateBank::defaults(registry));

    GrpoConfig cfg;
    cfg.epochs = 30;
    cfg.steps_per_epoch = 10;
    cfg.k = 4;
    cfg.learning_rate = 0.05;
    cfg.seed = 0;
    SoftmaxPolicy policy(bank, registry);
    const auto result = train(cases, policy, {}, reward, cfg, *provider, assessor, 8,
                              AdamState::zeros(policy.params().m, policy.params().f));

    std::vector<double> epoch_mean(cfg.epochs, 0.0);
    std::vector<int> counts(cfg.epochs, 0);
    for (const auto& m : result.history) {
        epoch_mean[m.epoch] += m.mean_episode_ig;
        ++counts[m.epoch];
    }
    double first5 = 0.0, last5 = 0.0;
    for (int e = 0; e < 5; ++e) first5 += epoch_mean[e] / counts[e];
    for (int e = cfg.epochs - 5; e < cfg.epochs; ++e) last5 += epoch_mean[e] / counts[e];
    CHECK(last5 / 5.0 > first5 / 5.0);
}

TEST_CASE("generated narratives split into one statement per fact") {
    const auto parts = extract_statements(
        "Patient reports chest pain and dizziness. The symptoms began last week.",
        AtomicStatement::Source::generated);
    REQUIRE(parts.size() == 3);
    CHECK(parts[0].text == "Patient reports chest pain");
    CHECK(parts[1].text == "dizziness");
    CHECK(parts[2].text == "The symptoms began last week");

    // a conjunction with nothing substantive on one side stays whole
    const auto whole = extract_statements("The patient reports nausea and is so.",
                                          AtomicStatement::Source::generated);
    CHECK(whole.size() == 1);

    CHECK(extract_statements("", AtomicStatement::Source::generated).empty());
}

TEST_CASE("statement matching reproduces the worked precision-recall example") {
    LexicalEmbedder emb;
    const auto tag_g = AtomicStatement::Source::generated;
    const auto tag_t = AtomicStatement::Source::ground_truth;
    // 4 generated, 3 truth, exactly 2 correct
    std::vector<AtomicStatement> generated = {
        {"The patient reports chest pain", tag_g},
        {"The symptoms have been worse in the morning", tag_g},
        {"Completely unrelated gibberish zebra", tag_g},
        {"Another wrong statement about bicycles", tag_g}};
    std::vector<AtomicStatement> truth = {
        {"The patient reports chest pain", tag_t},
        {"The symptoms have been worse in the morning", tag_t},
        {"The patient takes lisinopril daily", tag_t}};
    const auto r = match_statements(generated, truth, emb);
    CHECK(r.precision == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
    CHECK(r.f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-6));
    CHECK(r.matched.size() == 2);
    CHECK(r.unmatched_generated.size() == 2);
    CHECK(r.unmatched_truth.size() == 1);

    const auto perfect = match_statements(truth, truth, emb);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const auto empty = match_statements({}, {}, emb);
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);

    CHECK_THROWS_AS(match_statements(generated, truth, emb, 0.0), ConfigError);
    CHECK_THROWS_AS(match_statements(generated, truth, emb, 1.5), ConfigError);
}

TEST_CASE("matching is one-to-one with exact equality taking priority") {
    LexicalEmbedder emb;
    const auto tag_g = AtomicStatement::Source::generated;
    const auto tag_t = AtomicStatement::Source::ground_truth;
    // one generated statement cannot satisfy two truths
    std::vector<AtomicStatement> generated = {{"The patient reports chest pain", tag_g}};
    std::vector<AtomicStatement> truth = {
        {"The patient reports chest pain", tag_t},
        {"The patient reports chest pain", tag_t}};
    const auto r = match_statements(generated, truth, emb);
    CHECK(r.matched.size() == 1);
    CHECK(r.recall == doctest::Approx(0.5).epsilon(1e-9));

    // normalization bridges case and spacing differences
    std::vector<AtomicStatement> g2 = {{"the PATIENT reports   chest pain.", tag_g}};
    std::vector<AtomicStatement> t2 = {{"The patient reports chest pain", tag_t}};
    CHECK(match_statements(g2, t2, emb).matched.size() == 1);
}

TEST_CASE("hpi generation mirrors coverage in reveal order") {
    auto registry = CategoryRegistry::defaults();
    const auto kase = generate_synthetic_cases(1, 33, registry)[0];

    Trajectory blank{kase.case_id, kase.chief_complaint, {},
                     CoverageState(kase.entities), 0.0, 0.0, 0.0};
    CHECK(generate_hpi(blank) == chief_statement(kase.chief_complaint));

    CoverageState cov(kase.entities);
    cov.apply({{kase.entities[2].id, MatchMethod::exact, 1.0}}, 0);
    cov.apply({{kase.entities[0].id, MatchMethod::exact, 1.0}}, 1);
    Trajectory partial = blank;
    partial.final_coverage = cov;
    const auto hpi = generate_hpi(partial);
    const auto first = hpi.find(kase.entities[2].surface);
    const auto second = hpi.find(kase.entities[0].surface);
    REQUIRE(first != std::string::npos);
    REQUIRE(second != std::string::npos);
    CHECK(first < second);
    CHECK(hpi.find(entity_statement(kase.entities[2])) != std::string::npos);
}

TEST_CASE("config parsing: defaults, full error listing, env overrides") {
    const auto defaults = parse_run_config("{}", "inline");
    CHECK(defaults.max_turns == 8);
    CHECK(defaults.grpo.epochs == 150);
    CHECK(defaults.lambda == 1.0);

    try {
        parse_run_config(R"({"max_turnz": 3, "grpo": {"tau": -1, "kk": 2},
                             "lambda": -0.5})",
                         "inline");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        CHECK(what.find("max_turnz") != std::string::npos);
        CHECK(what.find("grpo.kk") != std::string::npos);
        CHECK(what.find("tau") != std::string::npos);
        CHECK(what.find("lambda") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_run_config("{not json", "inline"), ParseError);

    RunConfig cfg;
    apply_env_overrides(cfg, [](const char* name) -> const char* {
        if (std::string(name) == "INTAKE_REMOTE_ENDPOINT") return "http://somewhere:9";
        if (std::string(name) == "INTAKE_REMOTE_TOKEN") return "sekrit";
        return nullptr;
    });
    CHECK(cfg.remote.endpoint == "http://somewhere:9");
    CHECK(cfg.remote.auth_token == "sekrit");

    // resolved JSON round-trips to the same document
    const auto dumped = run_config_to_json(cfg);
    const auto reparsed = parse_run_config(dumped, "roundtrip");
    CHECK(run_config_to_json(reparsed) == dumped);
}
