#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "intake/coverage.hpp"
#include "intake/rng.hpp"
#include "intake/vignette.hpp"

namespace intake {

// A question template. Slot::hint is filled with an uncovered entity's
// surface, Slot::category with a category label; both picks follow the
// weighted-uncovered-mass rule in TemplateBank::render. category ties the
// template to a registry label for the one-template-per-category invariant;
// generic templates leave it empty.
struct QuestionTemplate {
    enum class Slot { none, hint, category };
    std::string text;
    Slot slot = Slot::none;
    std::string category;
};

class TemplateBank {
public:
    TemplateBank(std::vector<QuestionTemplate> templates,
                 const CategoryRegistry& registry);

    // 24 templates for the standard registry: one entity-targeted and one
    // open question per category, plus four generic prompts. Custom
    // registries get a synthesized bank of the same shape.
    static TemplateBank defaults(const CategoryRegistry& registry);

    std::size_t size() const { return templates_.size(); }
    const std::vector<QuestionTemplate>& templates() const { return templates_; }

    // Pure in (index, case, coverage): the hint slot takes the surface of
    // the first uncovered entity in the category with the largest
    // weight * uncovered-count mass (registry order breaks ties); the
    // category slot takes that category's label. With nothing uncovered the
    // chief complaint and its category stand in.
    std::string render(std::size_t index, const VignetteCase& kase,
                       const CoverageState& coverage) const;

    // Content hash over texts, slots, and categories; stored in checkpoints
    // so parameters are never applied to a different action space.
    std::uint64_t hash() const;

private:
    std::vector<QuestionTemplate> templates_;
    std::vector<Category> categories_;
};

// Feature layout (dimension 2C+3 for C categories, all values in [0,1]):
// per-category uncovered fraction, turn/max_turns, fraction covered,
// last-answer-informative flag, chief-complaint category one-hot.
struct StateContext {
    const VignetteCase* kase = nullptr;
    const CoverageState* coverage = nullptr;
    int turn = 0;
    int max_turns = 8;
    bool last_informative = false;
};

std::size_t feature_dim(const CategoryRegistry& registry);
std::vector<double> compute_features(const StateContext& ctx,
                                     const CategoryRegistry& registry);
std::uint64_t feature_schema_hash(const CategoryRegistry& registry);

struct PolicyParameters {
    std::size_t m = 0; // actions (templates)
    std::size_t f = 0; // features
    std::vector<double> theta; // m x f, row-major
    std::vector<double> bias;  // m

    static PolicyParameters zeros(std::size_t m, std::size_t f);
    double& theta_at(std::size_t action, std::size_t feature);
    double theta_at(std::size_t action, std::size_t feature) const;
};

// softmax(theta * phi + bias); strictly positive, sums to 1.
std::vector<double> action_distribution(const PolicyParameters& params,
                                        const std::vector<double>& features);

struct ProposedAction {
    std::string question;
    int template_index = -1;
    double log_prob = 0.0;
};

struct QuestionCandidate {
    int template_index = -1;
    std::string question;
    double log_prob = 0.0;
};

class QuestionPolicy {
public:
    virtual ~QuestionPolicy() = default;
    virtual ProposedAction propose(const StateContext& ctx, Rng& rng) = 0;
};

class SoftmaxPolicy : public QuestionPolicy {
public:
    SoftmaxPolicy(std::shared_ptr<const TemplateBank> bank, CategoryRegistry registry);
    SoftmaxPolicy(std::shared_ptr<const TemplateBank> bank, CategoryRegistry registry,
                  PolicyParameters params);

    const PolicyParameters& params() const { return params_; }
    PolicyParameters& params() { return params_; }
    const TemplateBank& bank() const { return *bank_; }
    std::shared_ptr<const TemplateBank> bank_ptr() const { return bank_; }
    const CategoryRegistry& registry() const { return registry_; }

    std::vector<double> distribution(const std::vector<double>& features) const;
    ProposedAction propose(const StateContext& ctx, Rng& rng) override;
    // K independent draws with replacement; duplicates are legitimate
    // candidates with their own rewards.
    std::vector<QuestionCandidate> sample_candidates(const StateContext& ctx,
                                                     std::size_t k, Rng& rng) const;

private:
    std::shared_ptr<const TemplateBank> bank_;
    CategoryRegistry registry_;
    PolicyParameters params_;
};

// Always asks about the first still-uncovered entity by name. Used by
// closed-loop tests and `eval --oracle` as a coverage upper bound.
class OracleEntityPolicy : public QuestionPolicy {
public:
    ProposedAction propose(const StateContext& ctx, Rng& rng) override;
};

// Checkpoint: policy parameters plus optimizer state, tagged with the bank
// and feature-schema hashes of the run that wrote it.
struct Checkpoint {
    int version = 1;
    std::uint64_t bank_hash = 0;
    std::uint64_t feature_schema_hash = 0;
    PolicyParameters params;
    std::vector<double> adam_m_theta, adam_v_theta;
    std::vector<double> adam_m_bias, adam_v_bias;
    std::int64_t adam_step = 0;
    int epochs_completed = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Loads and refuses (ValidationError) when the checkpoint's hashes do not
// match the bank/registry it is about to drive.
Checkpoint load_checkpoint_validated(const std::string& path,
                                     const TemplateBank& bank,
                                     const CategoryRegistry& registry);

} // namespace intake
