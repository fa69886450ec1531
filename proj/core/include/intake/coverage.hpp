#pragma once

#include <string>
#include <vector>

#include "intake/embedding.hpp"
#include "intake/vignette.hpp"

namespace intake {

enum class MatchMethod { exact, multiword, semantic };

std::string to_string(MatchMethod m);

struct MatchResult {
    std::string entity_id;
    MatchMethod method = MatchMethod::exact;
    // 1.0 for exact and multiword hits; the cosine similarity for semantic.
    double score = 1.0;
};

struct CoveredEntry {
    std::string entity_id;
    int turn = 0;
    MatchMethod method = MatchMethod::exact;
};

// Partition of a case's entities into covered and uncovered. Covered only
// grows; the two sides always partition the full set.
class CoverageState {
public:
    explicit CoverageState(std::vector<ClinicalEntity> all_entities);

    const std::vector<ClinicalEntity>& all() const { return all_; }
    // In reveal order.
    const std::vector<CoveredEntry>& covered() const { return covered_; }
    // In original case order.
    std::vector<ClinicalEntity> uncovered() const;
    bool is_covered(const std::string& entity_id) const;
    std::size_t covered_count() const { return covered_.size(); }
    std::size_t uncovered_count() const { return all_.size() - covered_.size(); }
    const ClinicalEntity& entity(const std::string& entity_id) const;

    // Moves matched entities to covered with (turn, method) provenance.
    // A match naming an already-covered or unknown entity is a bug in the
    // caller and throws ContractViolation.
    void apply(const std::vector<MatchResult>& matches, int turn);

private:
    std::vector<ClinicalEntity> all_;
    std::vector<CoveredEntry> covered_;
};

// Value-style variant of CoverageState::apply.
CoverageState update_coverage(const CoverageState& state,
                              const std::vector<MatchResult>& matches, int turn);

// Which uncovered entities does this utterance reveal? Tries, per entity:
// exact phrase (word-boundary, case-insensitive, surface or alias), then
// all-important-words presence, then embedding cosine strictly above the
// threshold. First hit wins; unmatched entities are omitted.
std::vector<MatchResult> detect_revealed(const std::string& response,
                                         const std::vector<ClinicalEntity>& uncovered,
                                         const EmbeddingProvider& provider,
                                         double threshold = 0.85);

} // namespace intake
