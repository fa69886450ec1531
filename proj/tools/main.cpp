#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace intake::cli;

    CLI::App app{"information-gain interview trainer"};
    app.require_subcommand(1);

    GenOptions gen_opts;
    auto* gen = app.add_subcommand("gen", "generate synthetic vignette cases");
    gen->add_option("count", gen_opts.count, "number of cases")->required();
    gen->add_option("--seed", gen_opts.seed, "generation seed");
    gen->add_option("--config", gen_opts.config_path, "config file");
    gen->add_option("--out", gen_opts.out_path, "output path (default: config cases_path)");

    TrainOptions train_opts;
    auto* train = app.add_subcommand("train", "run GRPO self-play training");
    train->add_option("--config", train_opts.config_path, "config file");
    train->add_option("--run-dir", train_opts.run_dir,
                      "run directory (default: timestamped under output_dir)");
    train->add_option("--resume", train_opts.resume_from, "checkpoint to resume from");

    EvalOptions eval_opts;
    auto* eval = app.add_subcommand("eval", "score a policy with the HPI harness");
    eval->add_option("--config", eval_opts.config_path, "config file");
    auto* eval_ck = eval->add_option("--checkpoint", eval_opts.checkpoint,
                                     "checkpoint to evaluate");
    auto* eval_oracle = eval->add_flag("--oracle", eval_opts.oracle,
                                       "evaluate the oracle entity policy");
    auto* eval_uniform = eval->add_flag("--uniform", eval_opts.uniform,
                                        "evaluate untrained uniform parameters");
    eval_ck->excludes(eval_oracle)->excludes(eval_uniform);
    eval_oracle->excludes(eval_uniform);
    eval->add_option("--cases", eval_opts.cases_path, "case file override");
    eval->add_option("--seeds", eval_opts.seeds, "seed list override");
    eval->add_option("--out", eval_opts.out_path, "JSONL report path");

    SimulateOptions sim_opts;
    auto* sim = app.add_subcommand("simulate", "print one episode transcript");
    sim->add_option("--config", sim_opts.config_path, "config file");
    auto* sim_ck = sim->add_option("--checkpoint", sim_opts.checkpoint,
                                   "checkpoint to drive the policy");
    auto* sim_oracle = sim->add_flag("--oracle", sim_opts.oracle,
                                     "use the oracle entity policy");
    auto* sim_uniform = sim->add_flag("--uniform", sim_opts.uniform,
                                      "use untrained uniform parameters");
    sim_ck->excludes(sim_oracle)->excludes(sim_uniform);
    sim_oracle->excludes(sim_uniform);
    sim->add_option("--case", sim_opts.case_id, "case id")->required();
    sim->add_option("--seed", sim_opts.seed, "episode seed");
    sim->add_option("--cases", sim_opts.cases_path, "case file override");

    ReportOptions report_opts;
    auto* report = app.add_subcommand("report", "plots and tables from a metrics file");
    report->add_option("metrics", report_opts.metrics_path, "metrics.jsonl path")
        ->required();
    report->add_option("--out-dir", report_opts.out_dir,
                       "output directory (default: alongside metrics)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    return run_guarded(
        [&] {
            if (gen->parsed()) {
                cmd_gen(gen_opts, std::cout);
            } else if (train->parsed()) {
                cmd_train(train_opts, std::cout);
            } else if (eval->parsed()) {
                cmd_eval(eval_opts, std::cout);
            } else if (sim->parsed()) {
                cmd_simulate(sim_opts, std::cout);
            } else if (report->parsed()) {
                cmd_report(report_opts, std::cout);
            }
        },
        std::cerr);
}
