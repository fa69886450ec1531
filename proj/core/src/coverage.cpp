#include "intake/coverage.hpp"

#include <algorithm>

#include "intake/errors.hpp"
#include "intake/text.hpp"

namespace intake {

std::string to_string(MatchMethod m) {
    switch (m) {
        case MatchMethod::exact: return "exact";
        case MatchMethod::multiword: return "multiword";
        case MatchMethod::semantic: return "semantic";
    }
    throw ContractViolation("unhandled MatchMethod value");
}

CoverageState::CoverageState(std::vector<ClinicalEntity> all_entities)
    : all_(std::move(all_entities)) {
    for (std::size_t i = 0; i < all_.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (all_[j].id == all_[i].id) {
                throw ContractViolation("duplicate entity id in coverage state: " +
                                        all_[i].id);
            }
        }
    }
}

std::vector<ClinicalEntity> CoverageState::uncovered() const {
    std::vector<ClinicalEntity> out;
    out.reserve(uncovered_count());
    for (const auto& e : all_) {
        if (!is_covered(e.id)) out.push_back(e);
    }
    return out;
}

bool CoverageState::is_covered(const std::string& entity_id) const {
    return std::any_of(covered_.begin(), covered_.end(),
                       [&](const CoveredEntry& c) { return c.entity_id == entity_id; });
}

const ClinicalEntity& CoverageState::entity(const std::string& entity_id) const {
    for (const auto& e : all_) {
        if (e.id == entity_id) return e;
    }
    throw ContractViolation("unknown entity id: " + entity_id);
}

void CoverageState::apply(const std::vector<MatchResult>& matches, int turn) {
    for (const auto& m : matches) {
        const bool known = std::any_of(all_.begin(), all_.end(),
                                       [&](const ClinicalEntity& e) {
                                           return e.id == m.entity_id;
                                       });
        if (!known) {
            throw ContractViolation("coverage update names unknown entity \"" +
                                    m.entity_id + "\"");
        }
        if (is_covered(m.entity_id)) {
            throw ContractViolation("coverage update names already-covered entity \"" +
                                    m.entity_id + "\"");
        }
        covered_.push_back({m.entity_id, turn, m.method});
    }
}

CoverageState update_coverage(const CoverageState& state,
                              const std::vector<MatchResult>& matches, int turn) {
    CoverageState next = state;
    next.apply(matches, turn);
    return next;
}

namespace {

bool exact_phrase_match(const std::vector<std::string>& response_tokens,
                        const ClinicalEntity& e) {
    if (text::contains_phrase(response_tokens, text::tokenize(e.surface))) {
        return true;
    }
    return std::any_of(e.aliases.begin(), e.aliases.end(),
                       [&](const std::string& alias) {
                           return text::contains_phrase(response_tokens,
                                                        text::tokenize(alias));
                       });
}

bool multiword_match(const std::vector<std::string>& response_tokens,
                     const ClinicalEntity& e) {
    const auto words = text::important_words(e.surface);
    if (words.empty()) return false;
    return std::all_of(words.begin(), words.end(), [&](const std::string& w) {
        return std::find(response_tokens.begin(), response_tokens.end(), w) !=
               response_tokens.end();
    });
}

} // namespace

std::vector<MatchResult> detect_revealed(const std::string& response,
                                         const std::vector<ClinicalEntity>& uncovered,
                                         const EmbeddingProvider& provider,
                                         double threshold) {
    if (!(threshold > 0.0) || threshold > 1.0) {
        throw ConfigError("semantic threshold must be in (0, 1]");
    }
    std::vector<MatchResult> results;
    const auto response_tokens = text::tokenize(response);
    if (response_tokens.empty()) return results;

    // The response embedding is only needed once the cheap matchers miss,
    // and not at all if they cover everything.
    std::vector<double> response_vec;
    for (const auto& e : uncovered) {
        if (exact_phrase_match(response_tokens, e)) {
            results.push_back({e.id, MatchMethod::exact, 1.0});
            continue;
        }
        if (multiword_match(response_tokens, e)) {
            results.push_back({e.id, MatchMethod::multiword, 1.0});
            continue;
        }
        if (response_vec.empty()) response_vec = provider.embed(response);
        const double sim = cosine(response_vec, provider.embed(e.surface));
        if (sim > threshold) {
            results.push_back({e.id, MatchMethod::semantic, sim});
        }
    }
    return results;
}

} // namespace intake
