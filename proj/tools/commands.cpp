#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include "json.hpp"

#include "intake/config.hpp"
#include "intake/dialogue.hpp"
#include "intake/embedding.hpp"
#include "intake/errors.hpp"
#include "intake/grpo.hpp"
#include "intake/hpi_eval.hpp"
#include "intake/infogain.hpp"
#include "intake/policy.hpp"
#include "intake/quality.hpp"
#include "intake/remote.hpp"
#include "intake/rng.hpp"
#include "intake/vignette.hpp"

namespace intake::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

RunConfig load_config_or_defaults(const std::string& path) {
    if (!path.empty()) return load_run_config(path);
    RunConfig config;
    apply_env_overrides(config);
    config.validate();
    return config;
}

// Shared wiring: provider, assessor, and the optional remote client, built
// once per command from the resolved config.
struct Runtime {
    RunConfig config;
    std::shared_ptr<const ChatClient> chat;
    std::shared_ptr<const EmbeddingProvider> provider;
    std::shared_ptr<const QualityAssessor> assessor;
    std::shared_ptr<const StatementExtractor> extractor;
};

std::string prompt_path(const RunConfig& config, const char* name) {
    return (fs::path(config.prompts_dir) / name).string();
}

Runtime make_runtime(const std::string& config_path) {
    Runtime rt;
    rt.config = load_config_or_defaults(config_path);
    const auto& roles = rt.config.remote_roles;

    if (roles.any()) {
        rt.chat = std::make_shared<ChatClient>(rt.config.remote);
    }
    std::shared_ptr<const EmbeddingProvider> base;
    if (roles.provider) {
        base = std::make_shared<RemoteEmbeddingProvider>(rt.chat,
                                                         rt.config.embedding_dim);
    } else {
        base = std::make_shared<LexicalEmbedder>(rt.config.embedding_dim);
    }
    rt.provider = std::make_shared<CachingProvider>(base);

    auto heuristic = std::make_shared<HeuristicAssessor>(rt.provider, rt.config.mix,
                                                         rt.config.clip);
    if (roles.assessor) {
        rt.assessor = std::make_shared<RemoteAssessor>(
            rt.chat, read_text_file(prompt_path(rt.config, "quality_assessor.txt")),
            heuristic);
    } else {
        rt.assessor = heuristic;
    }

    if (roles.extractor) {
        rt.extractor = std::make_shared<RemoteStatementExtractor>(
            rt.chat,
            read_text_file(prompt_path(rt.config, "statement_extractor.txt")));
    } else {
        rt.extractor = std::make_shared<DeterministicExtractor>();
    }
    return rt;
}

std::unique_ptr<Patient> make_patient(const Runtime& rt, const VignetteCase& kase) {
    if (rt.config.remote_roles.patient) {
        return std::make_unique<RemotePatient>(
            rt.chat, read_text_file(prompt_path(rt.config, "patient.txt")), kase);
    }
    return std::make_unique<SimulatedPatient>(kase, rt.config.patient, rt.provider);
}

std::vector<VignetteCase> load_cases_or_fail(const Runtime& rt,
                                             const std::string& override_path) {
    const auto& path = override_path.empty() ? rt.config.cases_path : override_path;
    auto cases = load_cases(path, rt.config.registry);
    if (cases.empty()) throw ValidationError("case file " + path + " holds no cases");
    return cases;
}

struct PolicyPick {
    std::unique_ptr<QuestionPolicy> policy;
    std::shared_ptr<const TemplateBank> bank;
    std::string description;
};

PolicyPick pick_policy(const Runtime& rt, const std::string& checkpoint, bool oracle,
                       bool uniform) {
    const int chosen = (checkpoint.empty() ? 0 : 1) + (oracle ? 1 : 0) +
                       (uniform ? 1 : 0);
    if (chosen > 1) {
        throw ConfigError("pick one of --checkpoint, --oracle, --uniform");
    }
    PolicyPick pick;
    if (oracle) {
        pick.policy = std::make_unique<OracleEntityPolicy>();
        pick.description = "oracle (asks for each entity by name)";
        return pick;
    }
    pick.bank = std::make_shared<TemplateBank>(
        TemplateBank::defaults(rt.config.registry));
    if (!checkpoint.empty()) {
        auto ck = load_checkpoint_validated(checkpoint, *pick.bank,
                                            rt.config.registry);
        pick.policy = std::make_unique<SoftmaxPolicy>(pick.bank, rt.config.registry,
                                                      ck.params);
        pick.description = "checkpoint " + checkpoint + " (" +
                           std::to_string(ck.epochs_completed) + " epochs)";
    } else {
        pick.policy = std::make_unique<SoftmaxPolicy>(pick.bank, rt.config.registry);
        pick.description = "uniform (untrained parameters)";
    }
    return pick;
}

Checkpoint snapshot_checkpoint(int epochs_completed, const PolicyParameters& params,
                               const AdamState& adam, const TemplateBank& bank,
                               const CategoryRegistry& registry) {
    Checkpoint ck;
    ck.bank_hash = bank.hash();
    ck.feature_schema_hash = feature_schema_hash(registry);
    ck.params = params;
    ck.adam_m_theta = adam.m_theta;
    ck.adam_v_theta = adam.v_theta;
    ck.adam_m_bias = adam.m_bias;
    ck.adam_v_bias = adam.v_bias;
    ck.adam_step = adam.step;
    ck.epochs_completed = epochs_completed;
    return ck;
}

std::string fresh_run_dir(const RunConfig& config) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    localtime_r(&tt, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    const auto base = fs::path(config.output_dir) / (std::string("run-") + stamp);
    auto candidate = base;
    for (int n = 2; fs::exists(candidate); ++n) {
        candidate = base;
        candidate += "-" + std::to_string(n);
    }
    return candidate.string();
}

} // namespace

void cmd_gen(const GenOptions& opts, std::ostream& out) {
    const auto config = load_config_or_defaults(opts.config_path);
    const auto cases = generate_synthetic_cases(
        opts.count, opts.seed, config.registry,
        {static_cast<std::size_t>(config.gen.entity_min),
         static_cast<std::size_t>(config.gen.entity_max)});
    const auto& path = opts.out_path.empty() ? config.cases_path : opts.out_path;
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    save_cases(path, cases);
    out << "wrote " << cases.size() << " cases to " << path << "\n";
}

void cmd_train(const TrainOptions& opts, std::ostream& out) {
    auto rt = make_runtime(opts.config_path);
    const auto& config = rt.config;
    const auto cases = load_cases_or_fail(rt, "");

    std::string run_dir = opts.run_dir;
    if (run_dir.empty()) {
        run_dir = fresh_run_dir(config);
    } else if (fs::exists(fs::path(run_dir) / "metrics.jsonl")) {
        throw IoError("run directory " + run_dir +
                      " already holds metrics; run artifacts are append-only");
    }
    fs::create_directories(run_dir);
    save_run_config(config, (fs::path(run_dir) / "config.json").string());

    auto bank = std::make_shared<TemplateBank>(TemplateBank::defaults(config.registry));
    SoftmaxPolicy policy(bank, config.registry);
    auto adam = AdamState::zeros(policy.params().m, policy.params().f);
    int start_epoch = 0;
    if (!opts.resume_from.empty()) {
        const auto ck = load_checkpoint_validated(opts.resume_from, *bank,
                                                  config.registry);
        policy.params() = ck.params;
        adam.m_theta = ck.adam_m_theta;
        adam.v_theta = ck.adam_v_theta;
        adam.m_bias = ck.adam_m_bias;
        adam.v_bias = ck.adam_v_bias;
        adam.step = ck.adam_step;
        start_epoch = ck.epochs_completed;
        out << "resuming from " << opts.resume_from << " at epoch " << start_epoch
            << "\n";
    }

    const auto metrics_path = (fs::path(run_dir) / "metrics.jsonl").string();
    const auto timings_path = (fs::path(run_dir) / "timings.jsonl").string();
    std::ofstream metrics(metrics_path, std::ios::trunc);
    std::ofstream timings(timings_path, std::ios::trunc);
    if (!metrics || !timings) {
        throw IoError("cannot open metrics/timings files under " + run_dir);
    }

    TrainHooks hooks;
    hooks.on_step_end = [&](const StepMetrics& m, double wall_ms) {
        ordered_json row{{"epoch", m.epoch},
                         {"step", m.step},
                         {"mean_reward", m.mean_reward},
                         {"loss", m.loss},
                         {"mean_episode_ig", m.mean_episode_ig}};
        metrics << row.dump() << "\n";
        metrics.flush();
        ordered_json timing{{"epoch", m.epoch}, {"step", m.step}, {"wall_ms", wall_ms}};
        timings << timing.dump() << "\n";
        timings.flush();
    };
    Checkpoint latest = snapshot_checkpoint(start_epoch, policy.params(), adam,
                                            *bank, config.registry);
    hooks.on_epoch_end = [&](int done, const PolicyParameters& params,
                             const AdamState& state) {
        latest = snapshot_checkpoint(done, params, state, *bank, config.registry);
        if (config.grpo.checkpoint_every > 0 &&
            done % config.grpo.checkpoint_every == 0) {
            char name[48];
            std::snprintf(name, sizeof name, "checkpoint-epoch-%04d.json", done);
            save_checkpoint((fs::path(run_dir) / name).string(), latest);
        }
    };

    const auto reward = config.reward_config();
    TrainResult result;
    try {
        result = train(cases, policy, config.patient, reward, config.grpo,
                       *rt.provider, *rt.assessor, config.max_turns, std::move(adam),
                       start_epoch, hooks);
    } catch (const RemoteError&) {
        // keep the newest whole-epoch state so the run can resume
        save_checkpoint((fs::path(run_dir) / "checkpoint-abort.json").string(),
                        latest);
        out << "remote failure; flushed checkpoint-abort.json at epoch "
            << latest.epochs_completed << "\n";
        throw;
    }

    const auto final_ck = snapshot_checkpoint(config.grpo.epochs, result.params,
                                              result.adam, *bank, config.registry);
    save_checkpoint((fs::path(run_dir) / "checkpoint-final.json").string(), final_ck);

    double total_wall = 0.0;
    for (const auto w : result.wall_ms) total_wall += w;
    out << "run dir: " << run_dir << "\n";
    out << "trained epochs " << start_epoch + 1 << ".." << config.grpo.epochs << " ("
        << result.history.size() << " steps, " << fmt(total_wall / 1000.0, 1)
        << " s)\n";
    if (!result.history.empty()) {
        const int last_epoch = result.history.back().epoch;
        double ig = 0.0;
        int n = 0;
        for (const auto& m : result.history) {
            if (m.epoch == last_epoch) {
                ig += m.mean_episode_ig;
                ++n;
            }
        }
        out << "last-epoch mean episode IG: " << fmt(ig / n, 4) << "\n";
    }
    out << "artifacts: config.json metrics.jsonl timings.jsonl checkpoint-final.json\n";
}

namespace {

struct CaseEval {
    std::uint64_t seed = 0;
    std::string case_id;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double episode_ig = 0.0;
    int turns = 0;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    for (const auto x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (const auto x : xs) ss += (x - r.mean) * (x - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return r;
}

std::vector<AtomicStatement> truth_statements(const Runtime& rt,
                                              const VignetteCase& kase) {
    if (!kase.ground_truth_statements.empty()) {
        std::vector<AtomicStatement> truth;
        truth.reserve(kase.ground_truth_statements.size());
        for (const auto& s : kase.ground_truth_statements) {
            truth.push_back({s, AtomicStatement::Source::ground_truth});
        }
        return truth;
    }
    return rt.extractor->extract(kase.hpi_text,
                                 AtomicStatement::Source::ground_truth);
}

} // namespace

void cmd_eval(const EvalOptions& opts, std::ostream& out) {
    auto rt = make_runtime(opts.config_path);
    const auto cases = load_cases_or_fail(rt, opts.cases_path);
    auto pick = pick_policy(rt, opts.checkpoint, opts.oracle, opts.uniform);
    const auto seeds = opts.seeds.empty() ? rt.config.eval_seeds : opts.seeds;
    const auto reward = rt.config.reward_config();

    std::ofstream report;
    if (!opts.out_path.empty()) {
        report.open(opts.out_path, std::ios::trunc);
        if (!report) throw IoError("cannot write eval report " + opts.out_path);
    }

    std::vector<CaseEval> rows;
    std::vector<double> seed_p, seed_r, seed_f1, seed_ig;
    for (const auto seed : seeds) {
        double sum_p = 0.0, sum_r = 0.0, sum_f1 = 0.0, sum_ig = 0.0;
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const auto& kase = cases[i];
            auto patient = make_patient(rt, kase);
            const auto traj = run_episode(*pick.policy, kase, *patient, *rt.provider,
                                          *rt.assessor, reward, rt.config.registry,
                                          rt.config.max_turns, mix64(seed, 0xE7A1, i));
            const auto generated = rt.extractor->extract(
                generate_hpi(traj), AtomicStatement::Source::generated);
            const auto truth = truth_statements(rt, kase);
            const auto result = match_statements(generated, truth, *rt.provider,
                                                 rt.config.match_threshold);
            CaseEval row{seed,           kase.case_id,
                         result.precision, result.recall,
                         result.f1,       traj.realized_weighted_ig,
                         static_cast<int>(traj.turns.size())};
            rows.push_back(row);
            sum_p += row.precision;
            sum_r += row.recall;
            sum_f1 += row.f1;
            sum_ig += row.episode_ig;
            if (report) {
                ordered_json j{{"record", "case"},
                               {"seed", row.seed},
                               {"case_id", row.case_id},
                               {"precision", row.precision},
                               {"recall", row.recall},
                               {"f1", row.f1},
                               {"episode_ig", row.episode_ig},
                               {"turns", row.turns}};
                report << j.dump() << "\n";
            }
        }
        const auto n = static_cast<double>(cases.size());
        seed_p.push_back(sum_p / n);
        seed_r.push_back(sum_r / n);
        seed_f1.push_back(sum_f1 / n);
        seed_ig.push_back(sum_ig / n);
        if (report) {
            ordered_json j{{"record", "seed_mean"},
                           {"seed", seed},
                           {"precision", seed_p.back()},
                           {"recall", seed_r.back()},
                           {"f1", seed_f1.back()},
                           {"episode_ig", seed_ig.back()}};
            report << j.dump() << "\n";
        }
    }

    const auto p = mean_std(seed_p);
    const auto r = mean_std(seed_r);
    const auto f1 = mean_std(seed_f1);
    const auto ig = mean_std(seed_ig);
    if (report) {
        ordered_json j{{"record", "overall"},
                       {"seeds", seeds},
                       {"precision_mean", p.mean},
                       {"precision_std", p.std},
                       {"recall_mean", r.mean},
                       {"recall_std", r.std},
                       {"f1_mean", f1.mean},
                       {"f1_std", f1.std},
                       {"episode_ig_mean", ig.mean},
                       {"episode_ig_std", ig.std}};
        report << j.dump() << "\n";
    }

    out << "policy: " << pick.description << "\n";
    out << "cases: " << cases.size() << ", seeds: " << seeds.size() << ", turns cap: "
        << rt.config.max_turns << "\n\n";
    out << "seed      precision    recall       f1           episode IG\n";
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        std::ostringstream line;
        line << std::left << std::setw(10) << seeds[s] << std::setw(13)
             << fmt(seed_p[s], 4) << std::setw(13) << fmt(seed_r[s], 4)
             << std::setw(13) << fmt(seed_f1[s], 4) << fmt(seed_ig[s], 4);
        out << line.str() << "\n";
    }
    out << "\nacross seeds (mean +/- std):\n";
    out << "precision " << fmt(p.mean, 4) << " +/- " << fmt(p.std, 4) << "\n";
    out << "recall    " << fmt(r.mean, 4) << " +/- " << fmt(r.std, 4) << "\n";
    out << "f1        " << fmt(f1.mean, 4) << " +/- " << fmt(f1.std, 4) << "\n";
    out << "episode IG " << fmt(ig.mean, 4) << " +/- " << fmt(ig.std, 4) << "\n";
    if (!opts.out_path.empty()) out << "\nwrote " << opts.out_path << "\n";
}

void cmd_simulate(const SimulateOptions& opts, std::ostream& out) {
    auto rt = make_runtime(opts.config_path);
    const auto cases = load_cases_or_fail(rt, opts.cases_path);
    const auto it = std::find_if(cases.begin(), cases.end(), [&](const auto& c) {
        return c.case_id == opts.case_id;
    });
    if (it == cases.end()) {
        std::string available;
        for (const auto& c : cases) {
            if (!available.empty()) available += ", ";
            available += c.case_id;
        }
        throw ValidationError("unknown case id '" + opts.case_id +
                              "'; available: " + available);
    }
    const auto& kase = *it;
    auto pick = pick_policy(rt, opts.checkpoint, opts.oracle, opts.uniform);
    auto patient = make_patient(rt, kase);
    const auto reward = rt.config.reward_config();
    const auto traj =
        run_episode(*pick.policy, kase, *patient, *rt.provider, *rt.assessor, reward,
                    rt.config.registry, rt.config.max_turns, mix64(opts.seed, 0x51ED));

    out << "case " << kase.case_id << ": age " << kase.age << ", sex "
        << to_string(kase.sex) << ", chief complaint \"" << kase.chief_complaint
        << "\", " << kase.entities.size() << " entities\n";
    out << "policy: " << pick.description << "\n";
    out << "seed: " << opts.seed << "\n";

    for (const auto& turn : traj.turns) {
        out << "\nturn " << turn.index + 1 << "/" << rt.config.max_turns << "\n";
        out << "  Q: " << turn.question;
        if (turn.template_index >= 0) {
            out << "   (template " << turn.template_index << ", log_prob "
                << fmt(turn.log_prob, 4) << ")";
        } else {
            out << "   (scripted)";
        }
        out << "\n";
        out << "  A: " << turn.answer << "\n";
        if (turn.revealed_ids.empty()) {
            out << "  revealed: nothing\n";
        } else {
            out << "  revealed:";
            for (const auto& id : turn.revealed_ids) out << " " << id;
            out << "\n";
        }
        out << "  expected IG: raw " << fmt(turn.gain.ig, 4) << " of prior "
            << fmt(turn.gain.prior_entropy, 1) << " bits, weighted "
            << fmt(turn.gain.weighted_ig, 4) << "; resolved "
            << fmt(turn.realized_weighted_ig, 4) << "\n";
        const auto& q = turn.quality;
        out << "  quality: aggregate " << fmt(q.aggregate, 4) << " (gathering "
            << fmt(q.information_gathering, 4) << ", specificity "
            << fmt(q.specificity, 4) << ", engagement " << fmt(q.patient_engagement, 4)
            << ", relevance " << fmt(q.clinical_relevance, 4) << ", comprehensiveness "
            << fmt(q.comprehensiveness, 4) << ")\n";
        out << "  reward: " << fmt(turn.reward.weighted_ig, 4) << " + "
            << fmt(turn.reward.lambda, 2) << " * " << fmt(q.aggregate, 4) << " = "
            << fmt(turn.reward.total, 4) << "\n";
    }

    out << "\ncovered " << traj.final_coverage.covered().size() << "/"
        << kase.entities.size() << " entities in " << traj.turns.size() << " turns\n";
    out << "total reward " << fmt(traj.total_reward, 4) << ", weighted IG resolved "
        << fmt(traj.realized_weighted_ig, 4) << " (expected sum "
        << fmt(traj.total_weighted_ig, 4) << ")\n";
    out << "generated HPI: " << generate_hpi(traj) << "\n";
}

namespace {

struct EpochStats {
    int epoch = 0;
    double mean_reward = 0.0;
    double mean_loss = 0.0;
    double mean_ig = 0.0;
    int steps = 0;
};

std::string line_chart_svg(const std::string& title, const std::string& y_label,
                           const std::vector<std::pair<double, double>>& points) {
    const double width = 720, height = 440;
    const double left = 70, right = 690, top = 50, bottom = 390;
    double x_min = points.front().first, x_max = points.front().first;
    double y_min = points.front().second, y_max = points.front().second;
    for (const auto& [x, y] : points) {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) {
        y_max += 1.0;
        y_min -= 1.0;
    } else {
        const double pad = 0.05 * (y_max - y_min);
        y_max += pad;
        y_min -= pad;
    }
    const auto sx = [&](double x) {
        return left + (x - x_min) / (x_max - x_min) * (right - left);
    };
    const auto sy = [&](double y) {
        return bottom - (y - y_min) / (y_max - y_min) * (bottom - top);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2
        << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">"
        << title << "</text>\n";

    for (int i = 0; i <= 4; ++i) {
        const double y = y_min + (y_max - y_min) * i / 4.0;
        const double py = sy(y);
        svg << "<line x1=\"" << left << "\" y1=\"" << fmt(py, 1) << "\" x2=\"" << right
            << "\" y2=\"" << fmt(py, 1) << "\" stroke=\"#ddd\"/>\n";
        char label[32];
        std::snprintf(label, sizeof label, "%.4g", y);
        svg << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py + 4, 1)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << label << "</text>\n";
    }
    const int x_ticks = std::min<std::size_t>(6, points.size());
    for (int i = 0; i < x_ticks; ++i) {
        const double x =
            x_min + (x_max - x_min) * i / std::max(1, x_ticks - 1);
        const double px = sx(x);
        char label[32];
        std::snprintf(label, sizeof label, "%.4g", x);
        svg << "<text x=\"" << fmt(px, 1) << "\" y=\"" << bottom + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << label << "</text>\n";
    }
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
           "epoch</text>\n";
    svg << "<text x=\"18\" y=\"" << (top + bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 "
        << (top + bottom) / 2 << ")\">" << y_label << "</text>\n";

    svg << "<polyline fill=\"none\" stroke=\"#2c6fbb\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : points) {
        svg << fmt(sx(x), 1) << "," << fmt(sy(y), 1) << " ";
    }
    svg << "\"/>\n";
    if (points.size() <= 60) {
        for (const auto& [x, y] : points) {
            svg << "<circle cx=\"" << fmt(sx(x), 1) << "\" cy=\"" << fmt(sy(y), 1)
                << "\" r=\"2.5\" fill=\"#2c6fbb\"/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("failed writing " + path);
}

} // namespace

void cmd_report(const ReportOptions& opts, std::ostream& out) {
    std::ifstream in(opts.metrics_path);
    if (!in) throw IoError("cannot read metrics file " + opts.metrics_path);

    std::map<int, EpochStats> by_epoch;
    std::string line;
    std::size_t line_no = 0;
    std::size_t records = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(opts.metrics_path + ":" + std::to_string(line_no) +
                             ": " + e.what());
        }
        for (const char* key :
             {"epoch", "step", "mean_reward", "loss", "mean_episode_ig"}) {
            if (!row.contains(key) || !row[key].is_number()) {
                throw ParseError(opts.metrics_path + ":" + std::to_string(line_no) +
                                 ": missing numeric field '" + key + "'");
            }
        }
        auto& e = by_epoch[row["epoch"].get<int>()];
        e.epoch = row["epoch"].get<int>();
        e.mean_reward += row["mean_reward"].get<double>();
        e.mean_loss += row["loss"].get<double>();
        e.mean_ig += row["mean_episode_ig"].get<double>();
        ++e.steps;
        ++records;
    }
    if (records == 0) {
        throw ValidationError("no data in metrics file " + opts.metrics_path);
    }

    std::vector<EpochStats> epochs;
    for (auto& [_, e] : by_epoch) {
        e.mean_reward /= e.steps;
        e.mean_loss /= e.steps;
        e.mean_ig /= e.steps;
        epochs.push_back(e);
    }

    const auto out_dir = opts.out_dir.empty()
                             ? fs::path(opts.metrics_path).parent_path()
                             : fs::path(opts.out_dir);
    if (!out_dir.empty()) fs::create_directories(out_dir);

    std::vector<std::pair<double, double>> reward_pts, ig_pts;
    for (const auto& e : epochs) {
        reward_pts.emplace_back(e.epoch, e.mean_reward);
        ig_pts.emplace_back(e.epoch, e.mean_ig);
    }
    const auto reward_svg = (out_dir / "reward_vs_epoch.svg").string();
    const auto ig_svg = (out_dir / "ig_vs_epoch.svg").string();
    write_file(reward_svg, line_chart_svg("mean candidate reward by epoch",
                                          "mean reward", reward_pts));
    write_file(ig_svg, line_chart_svg("mean episode information gain by epoch",
                                      "mean episode IG", ig_pts));

    const auto head = std::min<std::size_t>(5, epochs.size());
    double first5 = 0.0, last5 = 0.0;
    for (std::size_t i = 0; i < head; ++i) first5 += epochs[i].mean_ig;
    for (std::size_t i = epochs.size() - head; i < epochs.size(); ++i) {
        last5 += epochs[i].mean_ig;
    }
    first5 /= head;
    last5 /= head;
    const double rel_change =
        first5 != 0.0 ? (last5 - first5) / std::fabs(first5) * 100.0 : 0.0;

    std::ostringstream table;
    table << "metrics: " << opts.metrics_path << "\n";
    table << "records: " << records << " steps over " << epochs.size()
          << " epochs\n\n";
    table << "epoch  mean_reward  mean_loss    mean_episode_ig\n";
    for (const auto& e : epochs) {
        std::ostringstream row;
        row << std::right << std::setw(5) << e.epoch << "  " << std::left
            << std::setw(13) << fmt(e.mean_reward, 4) << std::setw(13)
            << fmt(e.mean_loss, 4) << fmt(e.mean_ig, 4);
        table << row.str() << "\n";
    }
    table << "\nfirst " << head << " epochs mean episode IG: " << fmt(first5, 4)
          << "\n";
    table << "last " << head << " epochs mean episode IG: " << fmt(last5, 4) << "\n";
    table << "relative change: " << (rel_change >= 0 ? "+" : "")
          << fmt(rel_change, 2) << "%\n";
    const auto summary_path = (out_dir / "summary.txt").string();
    write_file(summary_path, table.str());

    out << "wrote " << reward_svg << "\n";
    out << "wrote " << ig_svg << "\n";
    out << "wrote " << summary_path << "\n";
    out << "first " << head << " epochs mean episode IG " << fmt(first5, 4)
        << ", last " << head << " " << fmt(last5, 4) << " ("
        << (rel_change >= 0 ? "+" : "") << fmt(rel_change, 2) << "%)\n";
}

int run_guarded(const std::function<void()>& body, std::ostream& err) {
    try {
        body();
        return 0;
    } catch (const RemoteError& e) {
        err << "remote error: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace intake::cli
