#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace intake::cli {

struct GenOptions {
    std::string config_path; // empty = built-in defaults
    std::size_t count = 20;
    std::uint64_t seed = 0;
    std::string out_path; // empty = config.cases_path
};

struct TrainOptions {
    std::string config_path;
    std::string run_dir;     // empty = timestamped dir under output_dir
    std::string resume_from; // checkpoint path; empty = fresh start
};

struct EvalOptions {
    std::string config_path;
    std::string checkpoint;
    bool oracle = false;
    bool uniform = false;
    std::string cases_path;           // empty = config.cases_path
    std::vector<std::uint64_t> seeds; // empty = config.eval_seeds
    std::string out_path;             // optional JSONL report
};

struct SimulateOptions {
    std::string config_path;
    std::string checkpoint;
    bool oracle = false;
    bool uniform = false;
    std::string case_id;
    std::uint64_t seed = 0;
    std::string cases_path; // empty = config.cases_path
};

struct ReportOptions {
    std::string metrics_path;
    std::string out_dir; // empty = directory of metrics_path
};

// Each command writes its human-readable output to `out` and throws on
// failure (ConfigError family, IoError, RemoteError); the binary's main
// maps exception types to exit codes.
void cmd_gen(const GenOptions& opts, std::ostream& out);
void cmd_train(const TrainOptions& opts, std::ostream& out);
void cmd_eval(const EvalOptions& opts, std::ostream& out);
void cmd_simulate(const SimulateOptions& opts, std::ostream& out);
void cmd_report(const ReportOptions& opts, std::ostream& out);

// 0 success, 2 config/validation, 3 I/O, 4 remote dependency, 1 anything
// else. `err` receives the error message.
int run_guarded(const std::function<void()>& body, std::ostream& err);

} // namespace intake::cli
