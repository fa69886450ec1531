#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "intake/dialogue.hpp"
#include "intake/grpo.hpp"
#include "intake/remote.hpp"
#include "intake/signals.hpp"
#include "intake/vignette.hpp"

namespace intake {

// Which pieces talk to the remote endpoint. Everything defaults to the
// local deterministic implementation.
struct RemoteRoles {
    bool assessor = false;
    bool provider = false;
    bool patient = false;
    bool extractor = false;

    bool any() const { return assessor || provider || patient || extractor; }
};

struct GenConfig {
    int entity_min = 10;
    int entity_max = 15;
};

// Everything a run needs, loadable from a JSON document. Every field has a
// default, so {} is a valid config.
struct RunConfig {
    std::string cases_path = "data/cases.jsonl";
    std::string output_dir = "runs";
    std::string prompts_dir = "prompts"; // templates for the remote roles
    std::vector<std::uint64_t> eval_seeds = {0, 1, 2};
    int max_turns = 8;
    std::size_t embedding_dim = 256;
    int parallelism = 1;
    double lambda = 1.0;
    double semantic_threshold = 0.85; // entity detection in answers
    double match_threshold = 0.85;    // statement matching in eval

    CategoryRegistry registry = CategoryRegistry::defaults();
    MixtureWeights mix;
    ClipBounds clip;
    GrpoConfig grpo;
    PatientConfig patient;
    GenConfig gen;
    RemoteRoles remote_roles;
    RemoteSettings remote;

    // Reward knobs bundled the way the episode runner wants them; discount
    // is shared with the optimizer config.
    RewardConfig reward_config() const;

    // All problems at once, one human-readable line per offending key.
    std::vector<std::string> collect_issues() const;
    void validate() const; // throws ValidationError listing every issue
};

// Reads and validates a config document. Unknown keys anywhere in the tree
// are collected and rejected together with value problems, so one pass
// shows everything that needs fixing. IoError for unreadable files,
// ParseError for malformed JSON.
RunConfig load_run_config(const std::string& path);

// Parses from an in-memory document; `origin` labels error messages.
RunConfig parse_run_config(const std::string& text, const std::string& origin);

// Writes the fully resolved config (defaults included) as indented JSON.
void save_run_config(const RunConfig& config, const std::string& path);
std::string run_config_to_json(const RunConfig& config);

// INTAKE_REMOTE_ENDPOINT and INTAKE_REMOTE_TOKEN override the file values;
// nothing else is environment-sensitive. The lookup function is injectable
// for tests; the default reads the process environment.
void apply_env_overrides(RunConfig& config);
void apply_env_overrides(RunConfig& config,
                         const std::function<const char*(const char*)>& getenv_fn);

} // namespace intake
