#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace intake {

enum class Sex { female, male, other };

std::string to_string(Sex s);
Sex sex_from_string(const std::string& s);

// One atomic clinical fact pre-extracted from an HPI. importance_weight is
// the owning category's w_c copied onto the entity at load/generation time.
struct ClinicalEntity {
    std::string id;
    std::string surface;
    std::vector<std::string> aliases;
    std::string category;
    double importance_weight = 0.0;
};

struct Category {
    std::string label;
    double weight = 1.0;
};

// Ordered category set with per-category weights. Order matters: feature
// layout, round-robin generation, and tie-breaking all follow it.
class CategoryRegistry {
public:
    explicit CategoryRegistry(std::vector<Category> categories);

    // The ten standard HPI element categories with near-uniform weights.
    static CategoryRegistry defaults();

    const std::vector<Category>& categories() const { return categories_; }
    std::size_t size() const { return categories_.size(); }
    bool contains(const std::string& label) const;
    // Throw ValidationError naming the label when it is not registered.
    double weight(const std::string& label) const;
    std::size_t index(const std::string& label) const;

private:
    std::vector<Category> categories_;
};

struct VignetteCase {
    std::string case_id;
    int age = 0;
    Sex sex = Sex::other;
    std::string chief_complaint;
    std::string hpi_text;
    std::vector<ClinicalEntity> entities;
    std::vector<std::string> ground_truth_statements;
};

// Throws ValidationError on any invariant breach (empty surface, unknown
// category, duplicate entity id, nonpositive weight).
void validate_case(const VignetteCase& c, const CategoryRegistry& registry);

// Case files are UTF-8 JSON lines, one case per line; see docs/formats.md.
// Parse failures carry the 1-based line number. Entity weights are resolved
// from the registry, never read from the file.
std::vector<VignetteCase> load_cases(const std::string& path,
                                     const CategoryRegistry& registry);
void save_cases(const std::string& path,
                const std::vector<VignetteCase>& cases);

// Deterministic synthetic cases: entity categories assigned round-robin in
// registry order, surfaces drawn per category from a built-in vocabulary,
// hpi_text assembled from the shared sentence frames so every entity is
// recoverable verbatim, ground_truth_statements one per entity.
std::vector<VignetteCase> generate_synthetic_cases(
    std::size_t n, std::uint64_t seed, const CategoryRegistry& registry,
    std::pair<std::size_t, std::size_t> entity_range = {10, 15});

// Sentence frames shared by the generator and the HPI summarizer. Keeping
// them identical is what makes ground truth exactly recoverable from a
// fully covered conversation.
std::string chief_statement(const std::string& chief_complaint);
std::string entity_statement(const ClinicalEntity& e);

} // namespace intake
