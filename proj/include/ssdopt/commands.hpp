#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace ssdopt {

struct CommandOptions {
    std::optional<std::uint64_t> seed;
    /// run: total iterations; resume: additional iterations.
    std::optional<std::int64_t> iterations;
    std::optional<std::int64_t> n_per_eval;
    std::int64_t n_verify = 100000;
    std::int64_t baseline_count = 50;
    /// One-sided upper bound level for the baseline screen; 0.975 matches a two-sided 95% interval.
    double baseline_confidence = 0.975;
    std::map<std::string, double> nominals;
    int workers = 1;
    /// Output directory; resume and verify default to the checkpoint's directory.
    std::string out_dir;
    std::function<void(const std::string&)> on_message;
};

/// Runs the optimizer. Writes config.normalized, evals.log, checkpoint.bin, pareto.csv,
/// trajectory.csv and report.txt into options.out_dir.
void cmd_run(const std::string& config_path, const CommandOptions& options);

/// Continues from a checkpoint, optionally with revised nominal bounds.
void cmd_resume(const std::string& checkpoint_path, const CommandOptions& options);

/// Fixed Sobol design screened by MC confidence bounds: baseline_pareto.csv,
/// baseline_evals.log and baseline_report.txt.
void cmd_baseline(const std::string& config_path, const CommandOptions& options);

/// Re-estimates every constraint at every approximation-set row of a run (checkpoint
/// file or run directory) with n_verify samples: verify.csv.
void cmd_verify(const std::string& run_path, const CommandOptions& options);

}  // namespace ssdopt
