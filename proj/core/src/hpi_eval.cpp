#include "intake/hpi_eval.hpp"

#include <algorithm>

#include "intake/errors.hpp"
#include "intake/text.hpp"

namespace intake {

std::string generate_hpi(const Trajectory& traj) {
    const auto& coverage = traj.final_coverage;
    if (coverage.covered().empty()) {
        return chief_statement(traj.chief_complaint);
    }
    // covered() is already in reveal order (insertion order by turn).
    std::string out;
    for (const auto& entry : coverage.covered()) {
        if (!out.empty()) out += " ";
        out += entity_statement(coverage.entity(entry.entity_id));
    }
    return out;
}

namespace {

bool has_important_word(std::string_view s) {
    return !text::important_words(s).empty();
}

std::string trim_segment(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n,");
    if (begin == std::string_view::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n,");
    return std::string(s.substr(begin, end - begin + 1));
}

// Earliest coordinating conjunction that leaves important content on both
// sides; npos when the sentence should stay whole. Returns the cut position
// and the length of the separator.
std::pair<std::size_t, std::size_t> find_split(const std::string& sentence) {
    static const std::string_view separators[] = {" and ", " but ", " or ", "; "};
    std::size_t best = std::string::npos;
    std::size_t best_len = 0;
    for (const auto sep : separators) {
        for (auto pos = sentence.find(sep); pos != std::string::npos;
             pos = sentence.find(sep, pos + 1)) {
            const auto left = trim_segment(std::string_view(sentence).substr(0, pos));
            const auto right =
                trim_segment(std::string_view(sentence).substr(pos + sep.size()));
            if (has_important_word(left) && has_important_word(right)) {
                if (pos < best) {
                    best = pos;
                    best_len = sep.size();
                }
                break; // earlier occurrences of this separator are done
            }
        }
    }
    return {best, best_len};
}

} // namespace

std::vector<AtomicStatement> extract_statements(const std::string& hpi,
                                                AtomicStatement::Source tag) {
    std::vector<AtomicStatement> out;
    for (const auto& sentence : text::split_sentences(hpi)) {
        std::string rest = sentence;
        while (true) {
            const auto [pos, len] = find_split(rest);
            if (pos == std::string::npos) break;
            const auto left = trim_segment(std::string_view(rest).substr(0, pos));
            if (!left.empty()) out.push_back({left, tag});
            rest = trim_segment(std::string_view(rest).substr(pos + len));
        }
        if (!trim_segment(rest).empty()) out.push_back({trim_segment(rest), tag});
    }
    return out;
}

EvalResult match_statements(const std::vector<AtomicStatement>& generated,
                            const std::vector<AtomicStatement>& truth,
                            const EmbeddingProvider& provider, double threshold) {
    if (!(threshold > 0.0) || threshold > 1.0) {
        throw ConfigError("match threshold must be in (0,1]");
    }
    std::vector<std::string> gen_norm(generated.size());
    std::vector<std::vector<double>> gen_vec(generated.size());
    for (std::size_t i = 0; i < generated.size(); ++i) {
        gen_norm[i] = text::normalize(generated[i].text);
        gen_vec[i] = provider.embed(generated[i].text);
    }

    EvalResult result;
    std::vector<bool> gen_used(generated.size(), false);
    std::vector<bool> truth_used(truth.size(), false);

    for (std::size_t t = 0; t < truth.size(); ++t) {
        const auto t_norm = text::normalize(truth[t].text);
        std::size_t pick = generated.size();
        // Exact normalized equality wins regardless of cosine.
        for (std::size_t g = 0; g < generated.size(); ++g) {
            if (!gen_used[g] && gen_norm[g] == t_norm) {
                pick = g;
                break;
            }
        }
        if (pick == generated.size()) {
            const auto t_vec = provider.embed(truth[t].text);
            double best = -1.0;
            std::size_t arg = generated.size();
            for (std::size_t g = 0; g < generated.size(); ++g) {
                if (gen_used[g]) continue;
                const double sim = cosine(gen_vec[g], t_vec);
                if (sim > best) { // ties keep the earliest statement
                    best = sim;
                    arg = g;
                }
            }
            if (arg < generated.size() && best >= threshold) pick = arg;
        }
        if (pick < generated.size()) {
            gen_used[pick] = true;
            truth_used[t] = true;
            result.matched.emplace_back(static_cast<int>(pick), static_cast<int>(t));
        }
    }

    for (std::size_t g = 0; g < generated.size(); ++g) {
        if (!gen_used[g]) result.unmatched_generated.push_back(static_cast<int>(g));
    }
    for (std::size_t t = 0; t < truth.size(); ++t) {
        if (!truth_used[t]) result.unmatched_truth.push_back(static_cast<int>(t));
    }

    const auto matched = static_cast<double>(result.matched.size());
    result.precision =
        generated.empty() ? 0.0 : matched / static_cast<double>(generated.size());
    result.recall = truth.empty() ? 0.0 : matched / static_cast<double>(truth.size());
    result.f1 = (result.precision + result.recall) > 0.0
                    ? 2.0 * result.precision * result.recall /
                          (result.precision + result.recall)
                    : 0.0;
    return result;
}

} // namespace intake
