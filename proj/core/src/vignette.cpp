#include "intake/vignette.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "intake/errors.hpp"
#include "intake/rng.hpp"
#include "intake/text.hpp"

namespace intake {
namespace {

using ordered_json = nlohmann::ordered_json;

struct CategoryVocab {
    std::string_view category;
    std::string_view frame;  // "{}" replaced by the entity surface
    std::array<std::string_view, 6> surfaces;
};

// Surfaces are short, conjunction-free noun/predicate phrases chosen so each
// carries at least one important word and drops verbatim into both the HPI
// frame below and the patient answer templates. Pools are disjoint across
// categories, which keeps generated statements pairwise distinct.
constexpr std::array<CategoryVocab, 10> kVocab = {{
    {"symptom", "The patient reports {}.",
     {"chest pain", "shortness of breath", "persistent cough",
      "severe headache", "stomach cramps", "sore throat"}},
    {"temporal_pattern", "The symptoms have been {}.",
     {"present for two days", "worse in the morning", "constant since yesterday",
      "intermittent for a week", "recurring at night", "gradually worsening"}},
    {"severity", "The discomfort is {}.",
     {"quite severe", "fairly mild", "moderate in intensity",
      "nearly unbearable", "barely noticeable", "steadily intensifying"}},
    {"location", "The discomfort is felt {}.",
     {"on the left side", "in the upper abdomen", "behind the breastbone",
      "near the right shoulder", "across the lower back", "around the temples"}},
    {"quality_character", "The discomfort feels like {}.",
     {"a dull ache", "a stabbing sensation", "a tight pressure",
      "a tingling feeling", "a burning warmth", "a throbbing pulse"}},
    {"aggravating_factor", "The discomfort worsens {}.",
     {"after climbing stairs", "during physical exertion", "after heavy meals",
      "when lying flat", "during cold weather", "after prolonged sitting"}},
    {"alleviating_factor", "The discomfort eases {}.",
     {"with plenty of rest", "after taking antacids", "with an ice pack",
      "after gentle stretching", "with slow deep breaths", "in a warm bath"}},
    {"associated_symptom", "The patient also notes {}.",
     {"occasional dizziness", "mild nausea", "night sweats",
      "ringing in the ears", "swollen ankles", "blurred vision"}},
    {"medical_history", "The patient has a history of {}.",
     {"high blood pressure", "type two diabetes", "childhood asthma",
      "seasonal allergies", "a previous concussion", "chronic acid reflux"}},
    {"medication", "The patient takes {}.",
     {"daily aspirin", "a statin each evening", "an albuterol inhaler",
      "metformin twice daily", "a mild diuretic", "ibuprofen as needed"}},
}};

constexpr std::string_view kChiefFrame = "The patient presents with {}.";
constexpr std::string_view kGenericFrame = "The case includes {}.";

std::string fill(std::string_view frame, const std::string& value) {
    const auto pos = frame.find("{}");
    std::string out(frame);
    out.replace(pos, 2, value);
    return out;
}

const CategoryVocab* vocab_for(const std::string& category) {
    for (const auto& v : kVocab) {
        if (v.category == category) return &v;
    }
    return nullptr;
}

// A few surfaces carry an alternative phrasing so alias matching has real
// work to do in tests and demos.
std::vector<std::string> aliases_for(std::string_view surface) {
    if (surface == "chest pain") return {"pain in the chest"};
    if (surface == "shortness of breath") return {"trouble breathing"};
    if (surface == "high blood pressure") return {"hypertension"};
    if (surface == "stomach cramps") return {"abdominal cramping"};
    if (surface == "mild nausea") return {"slight queasiness"};
    return {};
}

} // namespace

std::string to_string(Sex s) {
    switch (s) {
        case Sex::female: return "female";
        case Sex::male: return "male";
        case Sex::other: return "other";
    }
    throw ContractViolation("unhandled Sex value");
}

Sex sex_from_string(const std::string& s) {
    if (s == "female") return Sex::female;
    if (s == "male") return Sex::male;
    if (s == "other") return Sex::other;
    throw ValidationError("unknown sex value \"" + s +
                          "\" (expected female, male, or other)");
}

CategoryRegistry::CategoryRegistry(std::vector<Category> categories)
    : categories_(std::move(categories)) {
    if (categories_.empty()) {
        throw ValidationError("category registry must contain at least one category");
    }
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        const auto& c = categories_[i];
        if (c.label.empty()) {
            throw ValidationError("category label must be non-empty");
        }
        if (!(c.weight > 0.0) || c.weight > 2.0) {
            throw ValidationError("category \"" + c.label +
                                  "\" weight must be in (0, 2], got " +
                                  std::to_string(c.weight));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (categories_[j].label == c.label) {
                throw ValidationError("duplicate category label \"" + c.label + "\"");
            }
        }
    }
}

CategoryRegistry CategoryRegistry::defaults() {
    return CategoryRegistry({
        {"symptom", 1.0},
        {"temporal_pattern", 0.9},
        {"severity", 0.8},
        {"location", 0.8},
        {"quality_character", 0.7},
        {"aggravating_factor", 0.7},
        {"alleviating_factor", 0.7},
        {"associated_symptom", 0.9},
        {"medical_history", 0.8},
        {"medication", 0.6},
    });
}

bool CategoryRegistry::contains(const std::string& label) const {
    return std::any_of(categories_.begin(), categories_.end(),
                       [&](const Category& c) { return c.label == label; });
}

double CategoryRegistry::weight(const std::string& label) const {
    return categories_[index(label)].weight;
}

std::size_t CategoryRegistry::index(const std::string& label) const {
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        if (categories_[i].label == label) return i;
    }
    throw ValidationError("unknown category label \"" + label + "\"");
}

void validate_case(const VignetteCase& c, const CategoryRegistry& registry) {
    if (c.case_id.empty()) {
        throw ValidationError("case_id must be non-empty");
    }
    if (c.entities.empty()) {
        throw ValidationError("case \"" + c.case_id + "\": entities must be non-empty");
    }
    for (std::size_t i = 0; i < c.entities.size(); ++i) {
        const auto& e = c.entities[i];
        const auto trimmed_begin = e.surface.find_first_not_of(" \t\r\n");
        if (trimmed_begin == std::string::npos) {
            throw ValidationError("case \"" + c.case_id + "\": entity \"" + e.id +
                                  "\" has an empty surface");
        }
        if (!registry.contains(e.category)) {
            throw ValidationError("case \"" + c.case_id + "\": entity \"" + e.id +
                                  "\" has unknown category \"" + e.category + "\"");
        }
        if (!(e.importance_weight > 0.0)) {
            throw ValidationError("case \"" + c.case_id + "\": entity \"" + e.id +
                                  "\" has nonpositive importance weight");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (c.entities[j].id == e.id) {
                throw ValidationError("case \"" + c.case_id +
                                      "\": duplicate entity id \"" + e.id + "\"");
            }
        }
    }
}

namespace {

VignetteCase case_from_json(const ordered_json& j, const CategoryRegistry& registry) {
    static const std::vector<std::string> known_case_keys = {
        "case_id", "age", "sex", "chief_complaint",
        "hpi_text", "entities", "ground_truth_statements"};
    std::string unknown;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known_case_keys.begin(), known_case_keys.end(), it.key()) ==
            known_case_keys.end()) {
            unknown += unknown.empty() ? "\"" + it.key() + "\"" : ", \"" + it.key() + "\"";
        }
    }
    if (!unknown.empty()) {
        throw ValidationError("unknown case keys: " + unknown);
    }

    VignetteCase c;
    c.case_id = j.at("case_id").get<std::string>();
    c.age = j.at("age").get<int>();
    c.sex = sex_from_string(j.at("sex").get<std::string>());
    c.chief_complaint = j.at("chief_complaint").get<std::string>();
    c.hpi_text = j.at("hpi_text").get<std::string>();
    for (const auto& je : j.at("entities")) {
        ClinicalEntity e;
        e.id = je.at("id").get<std::string>();
        e.surface = je.at("surface").get<std::string>();
        e.category = je.at("category").get<std::string>();
        if (je.contains("aliases")) {
            e.aliases = je.at("aliases").get<std::vector<std::string>>();
        }
        if (!registry.contains(e.category)) {
            throw ValidationError("entity \"" + e.id + "\" has unknown category \"" +
                                  e.category + "\"");
        }
        e.importance_weight = registry.weight(e.category);
        c.entities.push_back(std::move(e));
    }
    if (j.contains("ground_truth_statements")) {
        c.ground_truth_statements =
            j.at("ground_truth_statements").get<std::vector<std::string>>();
    }
    return c;
}

ordered_json case_to_json(const VignetteCase& c) {
    ordered_json j;
    j["case_id"] = c.case_id;
    j["age"] = c.age;
    j["sex"] = to_string(c.sex);
    j["chief_complaint"] = c.chief_complaint;
    j["hpi_text"] = c.hpi_text;
    j["entities"] = ordered_json::array();
    for (const auto& e : c.entities) {
        ordered_json je;
        je["id"] = e.id;
        je["surface"] = e.surface;
        je["aliases"] = e.aliases;
        je["category"] = e.category;
        j["entities"].push_back(std::move(je));
    }
    if (!c.ground_truth_statements.empty()) {
        j["ground_truth_statements"] = c.ground_truth_statements;
    }
    return j;
}

} // namespace

std::vector<VignetteCase> load_cases(const std::string& path,
                                     const CategoryRegistry& registry) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open case file: " + path);
    }
    std::vector<VignetteCase> cases;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + ex.what());
        }
        VignetteCase c;
        try {
            c = case_from_json(j, registry);
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + ex.what());
        } catch (const ValidationError& ex) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " +
                                  ex.what());
        }
        validate_case(c, registry);
        cases.push_back(std::move(c));
    }
    return cases;
}

void save_cases(const std::string& path, const std::vector<VignetteCase>& cases) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write case file: " + path);
    }
    for (const auto& c : cases) {
        out << case_to_json(c).dump() << '\n';
    }
    if (!out) {
        throw IoError("write failed for case file: " + path);
    }
}

std::string chief_statement(const std::string& chief_complaint) {
    return fill(kChiefFrame, chief_complaint);
}

std::string entity_statement(const ClinicalEntity& e) {
    const auto* vocab = vocab_for(e.category);
    return fill(vocab ? vocab->frame : kGenericFrame, e.surface);
}

std::vector<VignetteCase> generate_synthetic_cases(
    std::size_t n, std::uint64_t seed, const CategoryRegistry& registry,
    std::pair<std::size_t, std::size_t> entity_range) {
    if (entity_range.first < 1 || entity_range.second < entity_range.first) {
        throw ConfigError("entity range must satisfy 1 <= min <= max");
    }
    std::vector<VignetteCase> cases;
    cases.reserve(n);
    const auto& cats = registry.categories();

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(mix64(seed, 0xCA5EF11EULL, i));
        VignetteCase c;
        {
            std::ostringstream id;
            id << "case-";
            id.width(4);
            id.fill('0');
            id << (i + 1);
            c.case_id = id.str();
        }
        c.age = 18 + static_cast<int>(rng.next_below(73));
        const auto sex_draw = rng.next_below(16);
        c.sex = sex_draw < 7 ? Sex::female : (sex_draw < 14 ? Sex::male : Sex::other);

        const std::size_t span = entity_range.second - entity_range.first + 1;
        const std::size_t count = entity_range.first + rng.next_below(span);

        // Round-robin over the registry keeps every category represented
        // once count reaches the category count. Surfaces are drawn without
        // replacement within a category.
        std::vector<std::vector<std::size_t>> used(cats.size());
        for (std::size_t k = 0; k < count; ++k) {
            const auto& cat = cats[k % cats.size()];
            const auto* vocab = vocab_for(cat.label);
            const std::size_t pool =
                vocab ? vocab->surfaces.size() : static_cast<std::size_t>(6);
            auto& taken = used[k % cats.size()];
            if (taken.size() >= pool) {
                throw ContractViolation(
                    "generator vocabulary exhausted for category " + cat.label);
            }
            std::size_t pick = rng.next_below(pool);
            while (std::find(taken.begin(), taken.end(), pick) != taken.end()) {
                pick = (pick + 1) % pool;
            }
            taken.push_back(pick);

            ClinicalEntity e;
            {
                std::ostringstream id;
                id << "e";
                id.width(2);
                id.fill('0');
                id << (k + 1);
                e.id = id.str();
            }
            e.category = cat.label;
            e.importance_weight = cat.weight;
            if (vocab) {
                e.surface = std::string(vocab->surfaces[pick]);
                e.aliases = aliases_for(e.surface);
            } else {
                // Custom registries beyond the built-in ten get synthetic
                // but stable surfaces.
                e.surface = cat.label + " finding " + std::to_string(pick + 1);
            }
            c.entities.push_back(std::move(e));
        }

        c.chief_complaint = c.entities.front().surface;
        std::string hpi = chief_statement(c.chief_complaint);
        for (const auto& e : c.entities) {
            const auto statement = entity_statement(e);
            hpi += " " + statement;
            c.ground_truth_statements.push_back(statement);
        }
        c.hpi_text = std::move(hpi);
        validate_case(c, registry);
        cases.push_back(std::move(c));
    }
    return cases;
}

} // namespace intake
