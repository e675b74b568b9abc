#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssdopt/ssdopt.h"

namespace {

void print_message(const char* msg, void*) { std::fprintf(stderr, "%s\n", msg); }

int report(ssdopt_status s) {
    if (s == SSDOPT_OK) return 0;
    std::fprintf(stderr, "ssdopt: %s: %s\n", ssdopt_status_name(s), ssdopt_last_error());
    return static_cast<int>(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation-based clinical trial design optimizer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ssdopt_version());

    std::string path;
    std::string out;
    std::uint64_t seed = 0;
    std::int64_t iterations = 0, n_per_eval = 0, n_verify = 100000, count = 50;
    double confidence = 0.975;
    int workers = 1;
    bool quiet = false;
    std::vector<std::string> nominal_args;

    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--workers", workers, "Threads for Monte Carlo replicates")->check(CLI::PositiveNumber);
        cmd->add_flag("--quiet", quiet, "Suppress progress messages");
    };

    auto* run = app.add_subcommand("run", "Optimize a design from a config file");
    run->add_option("config", path, "Problem config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory")->required();
    auto* run_seed = run->add_option("--seed", seed, "Master seed (overrides the config)");
    auto* run_iter = run->add_option("--iterations", iterations, "Iterations (overrides the config)");
    auto* run_n = run->add_option("--n-per-eval", n_per_eval, "MC samples per evaluation");
    run->add_option("--nominal", nominal_args, "Revised nominal bound, label=value (repeatable)");
    common(run);

    auto* resume = app.add_subcommand("resume", "Continue a run from its checkpoint");
    resume->add_option("checkpoint", path, "checkpoint.bin or its run directory")->required()->check(CLI::ExistingPath);
    resume->add_option("--out", out, "Output directory (default: the checkpoint's directory)");
    auto* res_iter = resume->add_option("--iterations", iterations, "Additional iterations (default 0)");
    auto* res_n = resume->add_option("--n-per-eval", n_per_eval, "MC samples per evaluation");
    resume->add_option("--nominal", nominal_args, "Revised nominal bound, label=value (repeatable)");
    common(resume);

    auto* baseline = app.add_subcommand("baseline", "Fixed Sobol design screened by MC confidence bounds");
    baseline->add_option("config", path, "Problem config (JSON)")->required()->check(CLI::ExistingFile);
    baseline->add_option("--out", out, "Output directory")->required();
    auto* base_seed = baseline->add_option("--seed", seed, "Master seed (overrides the config)");
    auto* base_n = baseline->add_option("--n-per-eval", n_per_eval, "MC samples per design");
    baseline->add_option("--count", count, "Number of Sobol designs")->check(CLI::PositiveNumber);
    baseline->add_option("--confidence", confidence, "One-sided confidence of the upper bound")
        ->check(CLI::Range(0.0, 1.0));
    baseline->add_option("--nominal", nominal_args, "Revised nominal bound, label=value (repeatable)");
    common(baseline);

    auto* verify = app.add_subcommand("verify", "Re-estimate the final solutions with a large MC budget");
    verify->add_option("run", path, "checkpoint.bin or its run directory")->required()->check(CLI::ExistingPath);
    verify->add_option("--n-verify", n_verify, "MC samples per solution")->check(CLI::PositiveNumber);
    verify->add_option("--out", out, "Output directory (default: the run directory)");
    common(verify);

    CLI11_PARSE(app, argc, argv);

    std::vector<std::string> labels;
    std::vector<double> values;
    for (const auto& arg : nominal_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::fprintf(stderr, "ssdopt: --nominal expects label=value, got '%s'\n", arg.c_str());
            return SSDOPT_INVALID_ARGUMENT;
        }
        try {
            values.push_back(std::stod(arg.substr(eq + 1)));
        } catch (const std::exception&) {
            std::fprintf(stderr, "ssdopt: --nominal value in '%s' is not a number\n", arg.c_str());
            return SSDOPT_INVALID_ARGUMENT;
        }
        labels.push_back(arg.substr(0, eq));
    }
    std::vector<const char*> label_ptrs;
    for (const auto& l : labels) label_ptrs.push_back(l.c_str());

    ssdopt_options opts;
    ssdopt_options_init(&opts);
    opts.workers = workers;
    opts.n_verify = n_verify;
    opts.baseline_count = count;
    opts.baseline_confidence = confidence;
    opts.out_dir = out.empty() ? nullptr : out.c_str();
    opts.nominal_labels = label_ptrs.data();
    opts.nominal_values = values.data();
    opts.n_nominals = labels.size();
    if (!quiet) opts.on_message = print_message;

    auto set_seed = [&](CLI::Option* o) {
        if (o->count()) {
            opts.has_seed = 1;
            opts.seed = seed;
        }
    };
    auto set_iter = [&](CLI::Option* o) {
        if (o->count()) {
            opts.has_iterations = 1;
            opts.iterations = iterations;
        }
    };
    auto set_n = [&](CLI::Option* o) {
        if (o->count()) {
            opts.has_n_per_eval = 1;
            opts.n_per_eval = n_per_eval;
        }
    };

    if (*run) {
        set_seed(run_seed);
        set_iter(run_iter);
        set_n(run_n);
        return report(ssdopt_cmd_run(path.c_str(), &opts));
    }
    if (*resume) {
        set_iter(res_iter);
        set_n(res_n);
        return report(ssdopt_cmd_resume(path.c_str(), &opts));
    }
    if (*baseline) {
        set_seed(base_seed);
        set_n(base_n);
        return report(ssdopt_cmd_baseline(path.c_str(), &opts));
    }
    return report(ssdopt_cmd_verify(path.c_str(), &opts));
}
