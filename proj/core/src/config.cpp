#include "intake/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "intake/errors.hpp"

namespace intake {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

RewardConfig RunConfig::reward_config() const {
    RewardConfig r;
    r.mix = mix;
    r.clip = clip;
    r.lambda = lambda;
    r.discount = grpo.discount;
    r.semantic_threshold = semantic_threshold;
    return r;
}

std::vector<std::string> RunConfig::collect_issues() const {
    std::vector<std::string> issues;
    auto check = [&issues](const char* key, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            issues.push_back(std::string(key) + ": " + e.what());
        }
    };

    if (cases_path.empty()) issues.push_back("cases_path: must not be empty");
    if (output_dir.empty()) issues.push_back("output_dir: must not be empty");
    if (eval_seeds.empty()) issues.push_back("eval_seeds: need at least one seed");
    if (max_turns < 1) issues.push_back("max_turns: must be >= 1");
    if (embedding_dim < 64) issues.push_back("embedding_dim: must be >= 64");
    if (parallelism < 1) issues.push_back("parallelism: must be >= 1");
    if (lambda < 0.0) issues.push_back("lambda: must be >= 0");
    if (!(semantic_threshold > 0.0) || semantic_threshold > 1.0) {
        issues.push_back("semantic_threshold: must be in (0,1]");
    }
    if (!(match_threshold > 0.0) || match_threshold > 1.0) {
        issues.push_back("match_threshold: must be in (0,1]");
    }
    if (gen.entity_min < 1) issues.push_back("gen.entity_min: must be >= 1");
    if (gen.entity_max < gen.entity_min) {
        issues.push_back("gen.entity_max: must be >= gen.entity_min");
    }

    check("signal_weights", [&] { mix.validate(); });
    check("clip", [&] { clip.validate(); });
    check("grpo", [&] { grpo.validate(); });
    check("patient", [&] { patient.validate(); });
    if (remote_roles.any()) check("remote", [&] { remote.validate(); });
    if ((remote_roles.assessor || remote_roles.patient || remote_roles.extractor) &&
        prompts_dir.empty()) {
        issues.push_back("prompts_dir: required when a remote role needs a prompt");
    }
    return issues;
}

void RunConfig::validate() const {
    const auto issues = collect_issues();
    if (issues.empty()) return;
    std::string message = "invalid config:";
    for (const auto& issue : issues) message += "\n  - " + issue;
    throw ValidationError(message);
}

namespace {

// Field-by-field reader that records problems instead of throwing, so a
// bad config reports every offending key in one pass.
struct Reader {
    const json& obj;
    std::string prefix;
    std::vector<std::string>& issues;

    std::string path(const std::string& key) const {
        return prefix.empty() ? key : prefix + "." + key;
    }

    template <typename T, typename Pred>
    void get(const char* key, T& out, Pred pred, const char* expected) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (!pred(v)) {
            issues.push_back(path(key) + ": expected " + expected);
            return;
        }
        try {
            out = v.get<T>();
        } catch (const json::exception&) {
            issues.push_back(path(key) + ": expected " + expected);
        }
    }

    void number(const char* key, double& out) {
        get(key, out, [](const json& v) { return v.is_number(); }, "a number");
    }
    void integer(const char* key, int& out) {
        get(key, out, [](const json& v) { return v.is_number_integer(); },
            "an integer");
    }
    void size(const char* key, std::size_t& out) {
        get(key, out,
            [](const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); },
            "a non-negative integer");
    }
    void u64(const char* key, std::uint64_t& out) {
        get(key, out,
            [](const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); },
            "a non-negative integer");
    }
    void text(const char* key, std::string& out) {
        get(key, out, [](const json& v) { return v.is_string(); }, "a string");
    }
    void boolean(const char* key, bool& out) {
        get(key, out, [](const json& v) { return v.is_boolean(); }, "a boolean");
    }

    void reject_unknown(std::initializer_list<const char*> known) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool found = false;
            for (const char* k : known) {
                if (it.key() == k) {
                    found = true;
                    break;
                }
            }
            if (!found) issues.push_back("unknown key '" + path(it.key()) + "'");
        }
    }
};

void read_grpo(const json& obj, GrpoConfig& g, std::vector<std::string>& issues) {
    Reader r{obj, "grpo", issues};
    r.reject_unknown({"k", "tau", "learning_rate", "weight_decay", "batch_size",
                      "epochs", "steps_per_epoch", "discount", "seed",
                      "checkpoint_every", "beta1", "beta2", "epsilon"});
    r.integer("k", g.k);
    r.number("tau", g.tau);
    r.number("learning_rate", g.learning_rate);
    r.number("weight_decay", g.weight_decay);
    r.integer("batch_size", g.batch_size);
    r.integer("epochs", g.epochs);
    r.integer("steps_per_epoch", g.steps_per_epoch);
    r.number("discount", g.discount);
    r.u64("seed", g.seed);
    r.integer("checkpoint_every", g.checkpoint_every);
    r.number("beta1", g.beta1);
    r.number("beta2", g.beta2);
    r.number("epsilon", g.epsilon);
}

void read_patient(const json& obj, PatientConfig& p,
                  std::vector<std::string>& issues) {
    Reader r{obj, "patient", issues};
    r.reject_unknown({"disclosure_cap", "reveal_threshold", "seed"});
    r.integer("disclosure_cap", p.disclosure_cap);
    r.number("reveal_threshold", p.reveal_threshold);
    r.u64("seed", p.seed);
}

void read_remote(const json& obj, RemoteRoles& roles, RemoteSettings& s,
                 std::vector<std::string>& issues) {
    Reader r{obj, "remote", issues};
    r.reject_unknown({"assessor", "provider", "patient", "extractor", "endpoint",
                      "token", "model", "chat_path", "embed_path",
                      "connect_timeout_ms", "read_timeout_ms", "max_attempts",
                      "backoff_base_ms", "max_in_flight", "fallback_to_heuristic"});
    r.boolean("assessor", roles.assessor);
    r.boolean("provider", roles.provider);
    r.boolean("patient", roles.patient);
    r.boolean("extractor", roles.extractor);
    r.text("endpoint", s.endpoint);
    r.text("token", s.auth_token);
    r.text("model", s.model);
    r.text("chat_path", s.chat_path);
    r.text("embed_path", s.embed_path);
    r.integer("connect_timeout_ms", s.connect_timeout_ms);
    r.integer("read_timeout_ms", s.read_timeout_ms);
    r.integer("max_attempts", s.max_attempts);
    r.integer("backoff_base_ms", s.backoff_base_ms);
    r.integer("max_in_flight", s.max_in_flight);
    r.boolean("fallback_to_heuristic", s.fallback_to_heuristic);
}

void read_categories(const json& arr, RunConfig& c,
                     std::vector<std::string>& issues) {
    if (!arr.is_array() || arr.empty()) {
        issues.push_back("categories: expected a non-empty array");
        return;
    }
    std::vector<Category> cats;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& item = arr[i];
        const auto where = "categories[" + std::to_string(i) + "]";
        if (!item.is_object() || !item.contains("label") ||
            !item["label"].is_string()) {
            issues.push_back(where + ": expected {label, weight}");
            continue;
        }
        Category cat;
        cat.label = item["label"].get<std::string>();
        if (item.contains("weight")) {
            if (!item["weight"].is_number()) {
                issues.push_back(where + ".weight: expected a number");
                continue;
            }
            cat.weight = item["weight"].get<double>();
        }
        for (auto it = item.begin(); it != item.end(); ++it) {
            if (it.key() != "label" && it.key() != "weight") {
                issues.push_back("unknown key '" + where + "." + it.key() + "'");
            }
        }
        cats.push_back(std::move(cat));
    }
    if (cats.empty()) return;
    try {
        c.registry = CategoryRegistry(std::move(cats));
    } catch (const std::exception& e) {
        issues.push_back(std::string("categories: ") + e.what());
    }
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(origin + ": config root must be an object");

    RunConfig c;
    std::vector<std::string> issues;
    Reader r{doc, "", issues};
    r.reject_unknown({"cases_path", "output_dir", "prompts_dir", "eval_seeds",
                      "max_turns", "embedding_dim", "parallelism", "lambda",
                      "semantic_threshold", "match_threshold", "categories",
                      "signal_weights", "clip", "grpo", "patient", "gen",
                      "remote"});
    r.text("cases_path", c.cases_path);
    r.text("output_dir", c.output_dir);
    r.text("prompts_dir", c.prompts_dir);
    r.integer("max_turns", c.max_turns);
    r.size("embedding_dim", c.embedding_dim);
    r.integer("parallelism", c.parallelism);
    r.number("lambda", c.lambda);
    r.number("semantic_threshold", c.semantic_threshold);
    r.number("match_threshold", c.match_threshold);

    if (doc.contains("eval_seeds")) {
        const auto& seeds = doc["eval_seeds"];
        if (!seeds.is_array()) {
            issues.push_back("eval_seeds: expected an array of non-negative integers");
        } else {
            std::vector<std::uint64_t> parsed;
            bool ok = true;
            for (const auto& s : seeds) {
                if (!s.is_number_integer() && !s.is_number_unsigned()) {
                    ok = false;
                    break;
                }
                if (s.is_number_integer() && s.get<long long>() < 0) {
                    ok = false;
                    break;
                }
                parsed.push_back(s.get<std::uint64_t>());
            }
            if (ok) {
                c.eval_seeds = std::move(parsed);
            } else {
                issues.push_back(
                    "eval_seeds: expected an array of non-negative integers");
            }
        }
    }
    if (doc.contains("categories")) read_categories(doc["categories"], c, issues);
    if (doc.contains("signal_weights")) {
        const auto& sw = doc["signal_weights"];
        if (!sw.is_object()) {
            issues.push_back("signal_weights: expected an object");
        } else {
            Reader rw{sw, "signal_weights", issues};
            rw.reject_unknown({"alpha", "beta", "gamma"});
            rw.number("alpha", c.mix.alpha);
            rw.number("beta", c.mix.beta);
            rw.number("gamma", c.mix.gamma);
        }
    }
    if (doc.contains("clip")) {
        const auto& cl = doc["clip"];
        if (!cl.is_object()) {
            issues.push_back("clip: expected an object");
        } else {
            Reader rc{cl, "clip", issues};
            rc.reject_unknown({"p_min", "p_max"});
            rc.number("p_min", c.clip.p_min);
            rc.number("p_max", c.clip.p_max);
        }
    }
    if (doc.contains("grpo")) {
        if (!doc["grpo"].is_object()) {
            issues.push_back("grpo: expected an object");
        } else {
            read_grpo(doc["grpo"], c.grpo, issues);
        }
    }
    if (doc.contains("patient")) {
        if (!doc["patient"].is_object()) {
            issues.push_back("patient: expected an object");
        } else {
            read_patient(doc["patient"], c.patient, issues);
        }
    }
    if (doc.contains("gen")) {
        if (!doc["gen"].is_object()) {
            issues.push_back("gen: expected an object");
        } else {
            Reader rg{doc["gen"], "gen", issues};
            rg.reject_unknown({"entity_min", "entity_max"});
            rg.integer("entity_min", c.gen.entity_min);
            rg.integer("entity_max", c.gen.entity_max);
        }
    }
    if (doc.contains("remote")) {
        if (!doc["remote"].is_object()) {
            issues.push_back("remote: expected an object");
        } else {
            read_remote(doc["remote"], c.remote_roles, c.remote, issues);
        }
    }

    for (const auto& issue : c.collect_issues()) issues.push_back(issue);
    if (!issues.empty()) {
        std::string message = origin + ": invalid config:";
        for (const auto& issue : issues) message += "\n  - " + issue;
        throw ValidationError(message);
    }
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto config = parse_run_config(buffer.str(), path);
    apply_env_overrides(config);
    return config;
}

std::string run_config_to_json(const RunConfig& c) {
    ordered_json doc;
    doc["cases_path"] = c.cases_path;
    doc["output_dir"] = c.output_dir;
    doc["prompts_dir"] = c.prompts_dir;
    doc["eval_seeds"] = c.eval_seeds;
    doc["max_turns"] = c.max_turns;
    doc["embedding_dim"] = c.embedding_dim;
    doc["parallelism"] = c.parallelism;
    doc["lambda"] = c.lambda;
    doc["semantic_threshold"] = c.semantic_threshold;
    doc["match_threshold"] = c.match_threshold;
    doc["categories"] = ordered_json::array();
    for (const auto& cat : c.registry.categories()) {
        doc["categories"].push_back({{"label", cat.label}, {"weight", cat.weight}});
    }
    doc["signal_weights"] = {{"alpha", c.mix.alpha},
                             {"beta", c.mix.beta},
                             {"gamma", c.mix.gamma}};
    doc["clip"] = {{"p_min", c.clip.p_min}, {"p_max", c.clip.p_max}};
    doc["grpo"] = {{"k", c.grpo.k},
                   {"tau", c.grpo.tau},
                   {"learning_rate", c.grpo.learning_rate},
                   {"weight_decay", c.grpo.weight_decay},
                   {"batch_size", c.grpo.batch_size},
                   {"epochs", c.grpo.epochs},
                   {"steps_per_epoch", c.grpo.steps_per_epoch},
                   {"discount", c.grpo.discount},
                   {"seed", c.grpo.seed},
                   {"checkpoint_every", c.grpo.checkpoint_every},
                   {"beta1", c.grpo.beta1},
                   {"beta2", c.grpo.beta2},
                   {"epsilon", c.grpo.epsilon}};
    doc["patient"] = {{"disclosure_cap", c.patient.disclosure_cap},
                      {"reveal_threshold", c.patient.reveal_threshold},
                      {"seed", c.patient.seed}};
    doc["gen"] = {{"entity_min", c.gen.entity_min},
                  {"entity_max", c.gen.entity_max}};
    doc["remote"] = {{"assessor", c.remote_roles.assessor},
                     {"provider", c.remote_roles.provider},
                     {"patient", c.remote_roles.patient},
                     {"extractor", c.remote_roles.extractor},
                     {"endpoint", c.remote.endpoint},
                     {"token", c.remote.auth_token},
                     {"model", c.remote.model},
                     {"chat_path", c.remote.chat_path},
                     {"embed_path", c.remote.embed_path},
                     {"connect_timeout_ms", c.remote.connect_timeout_ms},
                     {"read_timeout_ms", c.remote.read_timeout_ms},
                     {"max_attempts", c.remote.max_attempts},
                     {"backoff_base_ms", c.remote.backoff_base_ms},
                     {"max_in_flight", c.remote.max_in_flight},
                     {"fallback_to_heuristic", c.remote.fallback_to_heuristic}};
    return doc.dump(2) + "\n";
}

void save_run_config(const RunConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write config file " + path);
    out << run_config_to_json(config);
    if (!out) throw IoError("failed writing config file " + path);
}

void apply_env_overrides(RunConfig& config,
                         const std::function<const char*(const char*)>& getenv_fn) {
    if (const char* endpoint = getenv_fn("INTAKE_REMOTE_ENDPOINT")) {
        if (*endpoint) config.remote.endpoint = endpoint;
    }
    if (const char* token = getenv_fn("INTAKE_REMOTE_TOKEN")) {
        if (*token) config.remote.auth_token = token;
    }
}

void apply_env_overrides(RunConfig& config) {
    apply_env_overrides(config,
                        [](const char* name) { return std::getenv(name); });
}

} // namespace intake
