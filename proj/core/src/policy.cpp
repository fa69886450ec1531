#include "intake/policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string_view>

#include <json.hpp>

#include "intake/errors.hpp"

namespace intake {
namespace {

using ordered_json = nlohmann::ordered_json;

const std::array<std::string, 10>& standard_labels() {
    static const std::array<std::string, 10> labels = {
        "symptom",          "temporal_pattern",  "severity",
        "location",         "quality_character", "aggravating_factor",
        "alleviating_factor", "associated_symptom", "medical_history",
        "medication"};
    return labels;
}

std::vector<QuestionTemplate> curated_templates() {
    using Slot = QuestionTemplate::Slot;
    return {
        {"Do you currently have {hint}?", Slot::hint, "symptom"},
        {"When did {hint} start?", Slot::hint, "temporal_pattern"},
        {"How severe is {hint}?", Slot::hint, "severity"},
        {"Where exactly is {hint}?", Slot::hint, "location"},
        {"How does {hint} feel?", Slot::hint, "quality_character"},
        {"What makes {hint} worse?", Slot::hint, "aggravating_factor"},
        {"What makes {hint} better?", Slot::hint, "alleviating_factor"},
        {"What else comes with {hint}?", Slot::hint, "associated_symptom"},
        {"Any health problems before {hint}?", Slot::hint, "medical_history"},
        {"What do you take for {hint}?", Slot::hint, "medication"},
        {"What symptoms are bothering you the most?", Slot::none, "symptom"},
        {"How long has this been going on?", Slot::none, "temporal_pattern"},
        {"How bad does it get on a typical day?", Slot::none, "severity"},
        {"Where in your body do you feel it?", Slot::none, "location"},
        {"What does the discomfort feel like?", Slot::none, "quality_character"},
        {"Does anything seem to trigger it or make it worse?", Slot::none,
         "aggravating_factor"},
        {"Does anything help relieve it?", Slot::none, "alleviating_factor"},
        {"Have you noticed any other changes or symptoms?", Slot::none,
         "associated_symptom"},
        {"Do you have any ongoing medical conditions?", Slot::none,
         "medical_history"},
        {"Are you taking any medications at the moment?", Slot::none, "medication"},
        {"Do you have any {category} you haven't mentioned?", Slot::category, ""},
        {"Can you tell me more about how this has been affecting you?", Slot::none,
         ""},
        {"Is there anything else you think I should know?", Slot::none, ""},
        {"Tell me more about your main concern.", Slot::none, ""},
    };
}

std::string readable(const std::string& label) {
    std::string out = label;
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

} // namespace

TemplateBank::TemplateBank(std::vector<QuestionTemplate> templates,
                           const CategoryRegistry& registry)
    : templates_(std::move(templates)), categories_(registry.categories()) {
    if (templates_.size() < categories_.size()) {
        throw ValidationError("template bank must hold at least one template per category");
    }
    for (const auto& cat : categories_) {
        const bool covered = std::any_of(templates_.begin(), templates_.end(),
                                         [&](const QuestionTemplate& t) {
                                             return t.category == cat.label;
                                         });
        if (!covered) {
            throw ValidationError("no template covers category \"" + cat.label + "\"");
        }
    }
    for (const auto& t : templates_) {
        if (t.text.empty()) throw ValidationError("template text must be non-empty");
        if (!t.category.empty() && !registry.contains(t.category)) {
            throw ValidationError("template references unknown category \"" +
                                  t.category + "\"");
        }
        const bool has_hint = t.text.find("{hint}") != std::string::npos;
        const bool has_cat = t.text.find("{category}") != std::string::npos;
        if ((t.slot == QuestionTemplate::Slot::hint) != has_hint ||
            (t.slot == QuestionTemplate::Slot::category) != has_cat) {
            throw ValidationError("template slot declaration does not match its text: \"" +
                                  t.text + "\"");
        }
    }
}

TemplateBank TemplateBank::defaults(const CategoryRegistry& registry) {
    const auto& cats = registry.categories();
    const auto& known = standard_labels();
    const bool standard =
        cats.size() == known.size() &&
        std::equal(cats.begin(), cats.end(), known.begin(),
                   [](const Category& c, const std::string& l) { return c.label == l; });
    if (standard) {
        return TemplateBank(curated_templates(), registry);
    }
    // Synthesized bank for custom registries, same 2-per-category + 4 shape.
    using Slot = QuestionTemplate::Slot;
    std::vector<QuestionTemplate> ts;
    for (const auto& c : cats) {
        ts.push_back({"Can you tell me about {hint}?", Slot::hint, c.label});
        ts.push_back({"Is there anything regarding your " + readable(c.label) +
                          " you haven't told me?",
                      Slot::none, c.label});
    }
    ts.push_back({"Do you have any {category} you haven't mentioned?", Slot::category, ""});
    ts.push_back({"Can you tell me more about how this has been affecting you?",
                  Slot::none, ""});
    ts.push_back({"Is there anything else you think I should know?", Slot::none, ""});
    ts.push_back({"Tell me more about your main concern.", Slot::none, ""});
    return TemplateBank(std::move(ts), registry);
}

std::string TemplateBank::render(std::size_t index, const VignetteCase& kase,
                                 const CoverageState& coverage) const {
    if (index >= templates_.size()) {
        throw ContractViolation("template index out of range: " + std::to_string(index));
    }
    const auto& t = templates_[index];
    if (t.slot == QuestionTemplate::Slot::none) return t.text;

    const auto uncovered = coverage.uncovered();
    std::string target_category = kase.entities.front().category;
    std::string hint = kase.chief_complaint;
    if (!uncovered.empty()) {
        // Largest weight * uncovered-count mass; earlier registry position
        // wins ties because we scan in registry order with a strict >.
        double best_mass = 0.0;
        for (const auto& cat : categories_) {
            const auto count = std::count_if(uncovered.begin(), uncovered.end(),
                                             [&](const ClinicalEntity& e) {
                                                 return e.category == cat.label;
                                             });
            const double mass = cat.weight * static_cast<double>(count);
            if (mass > best_mass) {
                best_mass = mass;
                target_category = cat.label;
            }
        }
        for (const auto& e : uncovered) {
            if (e.category == target_category) {
                hint = e.surface;
                break;
            }
        }
    }

    std::string out = t.text;
    const auto replace_all = [&out](std::string_view token, const std::string& value) {
        for (auto pos = out.find(token); pos != std::string::npos;
             pos = out.find(token, pos + value.size())) {
            out.replace(pos, token.size(), value);
        }
    };
    if (t.slot == QuestionTemplate::Slot::hint) {
        replace_all("{hint}", hint);
    } else {
        replace_all("{category}", readable(target_category));
    }
    return out;
}

std::uint64_t TemplateBank::hash() const {
    std::uint64_t h = fnv1a("bank-v1", 7);
    for (const auto& t : templates_) {
        h = fnv1a(t.text.data(), t.text.size(), h);
        const char slot = static_cast<char>('0' + static_cast<int>(t.slot));
        h = fnv1a(&slot, 1, h);
        h = fnv1a(t.category.data(), t.category.size(), h);
        h = fnv1a("|", 1, h);
    }
    return h;
}

std::size_t feature_dim(const CategoryRegistry& registry) {
    return 2 * registry.size() + 3;
}

std::vector<double> compute_features(const StateContext& ctx,
                                     const CategoryRegistry& registry) {
    if (!ctx.kase || !ctx.coverage) {
        throw ContractViolation("compute_features: null case or coverage");
    }
    const auto& cats = registry.categories();
    std::vector<double> phi(feature_dim(registry), 0.0);

    for (std::size_t c = 0; c < cats.size(); ++c) {
        std::size_t total = 0, open = 0;
        for (const auto& e : ctx.kase->entities) {
            if (e.category != cats[c].label) continue;
            ++total;
            if (!ctx.coverage->is_covered(e.id)) ++open;
        }
        phi[c] = static_cast<double>(open) /
                 static_cast<double>(std::max<std::size_t>(1, total));
    }
    phi[cats.size()] = ctx.max_turns > 0
                           ? std::min(1.0, static_cast<double>(ctx.turn) /
                                               static_cast<double>(ctx.max_turns))
                           : 0.0;
    phi[cats.size() + 1] =
        static_cast<double>(ctx.coverage->covered_count()) /
        static_cast<double>(std::max<std::size_t>(1, ctx.kase->entities.size()));
    phi[cats.size() + 2] = ctx.last_informative ? 1.0 : 0.0;
    const auto chief_idx = registry.index(ctx.kase->entities.front().category);
    phi[cats.size() + 3 + chief_idx] = 1.0;
    return phi;
}

std::uint64_t feature_schema_hash(const CategoryRegistry& registry) {
    std::uint64_t h = fnv1a("features-v1:per_category_uncovered,turn_frac,"
                            "covered_frac,last_informative,chief_onehot",
                            92);
    for (const auto& c : registry.categories()) {
        h = fnv1a(c.label.data(), c.label.size(), h);
        h = fnv1a(";", 1, h);
    }
    return h;
}

PolicyParameters PolicyParameters::zeros(std::size_t m, std::size_t f) {
    PolicyParameters p;
    p.m = m;
    p.f = f;
    p.theta.assign(m * f, 0.0);
    p.bias.assign(m, 0.0);
    return p;
}

double& PolicyParameters::theta_at(std::size_t action, std::size_t feature) {
    return theta[action * f + feature];
}

double PolicyParameters::theta_at(std::size_t action, std::size_t feature) const {
    return theta[action * f + feature];
}

std::vector<double> action_distribution(const PolicyParameters& params,
                                        const std::vector<double>& features) {
    if (features.size() != params.f || params.theta.size() != params.m * params.f ||
        params.bias.size() != params.m || params.m == 0) {
        throw ContractViolation("action_distribution: parameter/feature shape mismatch");
    }
    std::vector<double> logits(params.m);
    for (std::size_t a = 0; a < params.m; ++a) {
        double z = params.bias[a];
        const double* row = params.theta.data() + a * params.f;
        for (std::size_t i = 0; i < params.f; ++i) z += row[i] * features[i];
        logits[a] = z;
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (auto& z : logits) {
        z = std::exp(z - zmax);
        sum += z;
    }
    for (auto& z : logits) z /= sum;
    return logits;
}

SoftmaxPolicy::SoftmaxPolicy(std::shared_ptr<const TemplateBank> bank,
                             CategoryRegistry registry)
    : SoftmaxPolicy(bank, registry,
                    PolicyParameters::zeros(bank ? bank->size() : 0,
                                            feature_dim(registry))) {}

SoftmaxPolicy::SoftmaxPolicy(std::shared_ptr<const TemplateBank> bank,
                             CategoryRegistry registry, PolicyParameters params)
    : bank_(std::move(bank)), registry_(std::move(registry)), params_(std::move(params)) {
    if (!bank_) throw ContractViolation("SoftmaxPolicy: null template bank");
    if (params_.m != bank_->size() || params_.f != feature_dim(registry_)) {
        throw ValidationError("policy parameters do not fit the bank/feature shape");
    }
}

std::vector<double> SoftmaxPolicy::distribution(const std::vector<double>& features) const {
    return action_distribution(params_, features);
}

namespace {

std::size_t draw_index(const std::vector<double>& dist, Rng& rng) {
    const double r = rng.next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        cum += dist[i];
        if (r < cum) return i;
    }
    return dist.size() - 1; // r landed in the rounding slack at the top
}

} // namespace

ProposedAction SoftmaxPolicy::propose(const StateContext& ctx, Rng& rng) {
    const auto phi = compute_features(ctx, registry_);
    const auto dist = distribution(phi);
    const auto idx = draw_index(dist, rng);
    return {bank_->render(idx, *ctx.kase, *ctx.coverage), static_cast<int>(idx),
            std::log(dist[idx])};
}

std::vector<QuestionCandidate> SoftmaxPolicy::sample_candidates(const StateContext& ctx,
                                                                std::size_t k,
                                                                Rng& rng) const {
    const auto phi = compute_features(ctx, registry_);
    const auto dist = distribution(phi);
    std::vector<QuestionCandidate> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto idx = draw_index(dist, rng);
        out.push_back({static_cast<int>(idx),
                       bank_->render(idx, *ctx.kase, *ctx.coverage),
                       std::log(dist[idx])});
    }
    return out;
}

ProposedAction OracleEntityPolicy::propose(const StateContext& ctx, Rng&) {
    if (!ctx.kase || !ctx.coverage) {
        throw ContractViolation("oracle policy: null case or coverage");
    }
    const auto uncovered = ctx.coverage->uncovered();
    if (uncovered.empty()) {
        return {"Is there anything else you think I should know?", -1, 0.0};
    }
    return {"Can you tell me about " + uncovered.front().surface + "?", -1, 0.0};
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    ordered_json j;
    j["format"] = "intake-checkpoint";
    j["version"] = ck.version;
    j["bank_hash"] = ck.bank_hash;
    j["feature_schema_hash"] = ck.feature_schema_hash;
    j["actions"] = ck.params.m;
    j["features"] = ck.params.f;
    j["theta"] = ck.params.theta;
    j["bias"] = ck.params.bias;
    j["adam_m_theta"] = ck.adam_m_theta;
    j["adam_v_theta"] = ck.adam_v_theta;
    j["adam_m_bias"] = ck.adam_m_bias;
    j["adam_v_bias"] = ck.adam_v_bias;
    j["adam_step"] = ck.adam_step;
    j["epochs_completed"] = ck.epochs_completed;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("checkpoint " + path + ": " + ex.what());
    }
    try {
        if (j.at("format").get<std::string>() != "intake-checkpoint") {
            throw ParseError("checkpoint " + path + ": unrecognized format tag");
        }
        Checkpoint ck;
        ck.version = j.at("version").get<int>();
        if (ck.version != 1) {
            throw ValidationError("checkpoint " + path + ": unsupported version " +
                                  std::to_string(ck.version));
        }
        ck.bank_hash = j.at("bank_hash").get<std::uint64_t>();
        ck.feature_schema_hash = j.at("feature_schema_hash").get<std::uint64_t>();
        ck.params.m = j.at("actions").get<std::size_t>();
        ck.params.f = j.at("features").get<std::size_t>();
        ck.params.theta = j.at("theta").get<std::vector<double>>();
        ck.params.bias = j.at("bias").get<std::vector<double>>();
        ck.adam_m_theta = j.at("adam_m_theta").get<std::vector<double>>();
        ck.adam_v_theta = j.at("adam_v_theta").get<std::vector<double>>();
        ck.adam_m_bias = j.at("adam_m_bias").get<std::vector<double>>();
        ck.adam_v_bias = j.at("adam_v_bias").get<std::vector<double>>();
        ck.adam_step = j.at("adam_step").get<std::int64_t>();
        ck.epochs_completed = j.at("epochs_completed").get<int>();
        if (ck.params.theta.size() != ck.params.m * ck.params.f ||
            ck.params.bias.size() != ck.params.m) {
            throw ValidationError("checkpoint " + path + ": parameter shapes disagree");
        }
        return ck;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("checkpoint " + path + ": " + ex.what());
    }
}

Checkpoint load_checkpoint_validated(const std::string& path,
                                     const TemplateBank& bank,
                                     const CategoryRegistry& registry) {
    auto ck = load_checkpoint(path);
    if (ck.bank_hash != bank.hash()) {
        throw ValidationError("checkpoint " + path +
                              " was trained against a different template bank; refusing to load");
    }
    if (ck.feature_schema_hash != feature_schema_hash(registry)) {
        throw ValidationError("checkpoint " + path +
                              " was trained with a different feature schema; refusing to load");
    }
    return ck;
}

} // namespace intake
