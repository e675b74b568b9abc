#include "ssdopt/commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "ssdopt/config.hpp"
#include "ssdopt/engine.hpp"
#include "ssdopt/errors.hpp"

namespace fs = std::filesystem;

namespace ssdopt {

namespace {

constexpr std::uint64_t kVerifySalt = 0x7665726966790001ULL;

class DirLock {
   public:
    explicit DirLock(const fs::path& dir) : path_(dir / "ssdopt.lock") {
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) throw LockError("run directory " + dir.string() + " is locked (" + path_.string() + " exists)");
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] auto n = ::write(fd_, pid.data(), pid.size());
    }
    ~DirLock() {
        ::close(fd_);
        ::unlink(path_.c_str());
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

   private:
    fs::path path_;
    int fd_ = -1;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::trunc) {
    std::ofstream out(p, std::ios::out | mode);
    if (!out) throw IoError("cannot write " + p.string());
    out << std::setprecision(12);
    return out;
}

void write_text(const fs::path& p, const std::string& text) {
    auto out = open_out(p);
    out << text;
}

std::string record_line(const Problem& problem, const EvaluationRecord& r) {
    nlohmann::ordered_json j;
    j["eval_index"] = r.eval_index;
    j["iteration"] = r.iteration;
    j["hypothesis"] = r.hypothesis;
    nlohmann::ordered_json point;
    for (std::size_t i = 0; i < r.point.size(); ++i) point[problem.space.dims()[i].name] = r.point[i];
    j["point"] = point;
    j["n"] = r.n_samples;
    j["successes"] = r.successes;
    j["estimate"] = r.estimate;
    j["mc_variance"] = r.mc_variance;
    j["seed"] = r.seed;
    return j.dump();
}

class EvalLog {
   public:
    EvalLog(const fs::path& p, const Problem& problem, bool append)
        : out_(open_out(p, append ? std::ios::app : std::ios::trunc)), problem_(problem) {}
    void write(const EvaluationRecord& r) {
        out_ << record_line(problem_, r) << '\n';
        out_.flush();
        if (!out_) throw IoError("failed writing evaluation log");
    }

   private:
    std::ofstream out_;
    const Problem& problem_;
};

std::string csv_header(const Problem& problem) {
    std::string h;
    for (const auto& d : problem.space.dims()) h += d.name + ",";
    for (const auto& l : problem.objectives.labels) h += l + ",";
    return h;
}

void write_pareto(const fs::path& p, const RunState& state) {
    const auto& problem = state.problem;
    auto out = open_out(p);
    out << csv_header(problem);
    for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
        const auto& l = problem.constraints[c].label;
        out << "quantile_" << l << ",estimate_" << l << ",n_" << l << (c + 1 < problem.constraints.size() ? "," : "");
    }
    out << '\n';
    for (const auto& row : set_report(state)) {
        for (double v : row.point) out << v << ',';
        for (double v : row.objectives) out << v << ',';
        for (std::size_t c = 0; c < row.quantiles.size(); ++c)
            out << row.quantiles[c] << ',' << row.estimates[c] << ',' << row.samples[c]
                << (c + 1 < row.quantiles.size() ? "," : "");
        out << '\n';
    }
}

void write_trajectory(const fs::path& p, const RunState& state) {
    auto out = open_out(p);
    out << "iteration,hypervolume\n";
    for (std::size_t i = 0; i < state.trajectory.size(); ++i) out << i << ',' << state.trajectory[i] << '\n';
}

void write_report(const fs::path& p, const RunState& state, const std::string& config_text, double seconds,
                  const std::vector<std::string>& warnings) {
    const auto& problem = state.problem;
    auto out = open_out(p);
    out << "ssdopt run report\n";
    out << "config hash      " << std::hex << fnv1a(config_text) << std::dec << '\n';
    out << "seed             " << state.seed << '\n';
    out << "iterations       " << state.iteration << '\n';
    out << "evaluations      " << state.records.size() << '\n';
    out << "total samples    " << state.total_samples << '\n';
    out << "wall time (s)    " << std::fixed << std::setprecision(2) << seconds << std::defaultfloat
        << std::setprecision(12) << '\n';
    out << "hypervolume      " << (state.trajectory.empty() ? 0.0 : state.trajectory.back()) << '\n';
    out << "current set H    " << hypervolume(state.set) << '\n';
    out << "\nconstraints\n";
    for (const auto& c : problem.constraints)
        out << "  " << c.label << ": " << (c.rate == ErrorRate::type_i ? "type I" : "type II") << " error under '"
            << c.hypothesis << "' <= " << c.nominal << " at confidence " << c.confidence << '\n';
    out << "\napproximation set (" << state.set.members.size() << " solutions)\n";
    for (const auto& row : set_report(state)) {
        out << " ";
        for (std::size_t i = 0; i < row.point.size(); ++i)
            out << ' ' << problem.space.dims()[i].name << '=' << row.point[i];
        out << "  |";
        for (std::size_t i = 0; i < row.objectives.size(); ++i)
            out << ' ' << problem.objectives.labels[i] << '=' << row.objectives[i];
        out << "  |";
        for (std::size_t c = 0; c < row.quantiles.size(); ++c)
            out << ' ' << problem.constraints[c].label << ": q=" << row.quantiles[c] << " est=" << row.estimates[c]
                << " (N=" << row.samples[c] << ")";
        out << '\n';
    }
    out << "\nhypervolume trajectory\n";
    for (std::size_t i = 0; i < state.trajectory.size(); ++i) out << "  " << i << "  " << state.trajectory[i] << '\n';
    out << "\nmodel-fit warnings: " << warnings.size() << '\n';
    for (const auto& w : warnings) out << "  " << w << '\n';
}

void write_outputs(const fs::path& dir, const RunState& state, const std::string& config_text, double seconds,
                   const std::vector<std::string>& warnings) {
    write_pareto(dir / "pareto.csv", state);
    write_trajectory(dir / "trajectory.csv", state);
    write_report(dir / "report.txt", state, config_text, seconds, warnings);
}

EngineOptions engine_options(const ProblemConfig& cfg, const CommandOptions& opts) {
    EngineOptions eo;
    eo.budget = cfg.budget;
    eo.pso = cfg.pso;
    eo.seed = cfg.seed;
    eo.workers = opts.workers;
    return eo;
}

// Runs iterations, checkpointing after each so a failure leaves a resumable file.
void drive(RunState& state, const BoundProblem& bound, EngineOptions& eo, const fs::path& dir,
           const std::string& config_text, std::int64_t target, const CommandOptions& opts,
           std::vector<std::string>& warnings) {
    const auto started = std::chrono::steady_clock::now();
    eo.on_warning = [&](const std::string& w) {
        warnings.push_back(w);
        if (opts.on_message) opts.on_message("warning: " + w);
    };
    write_checkpoint(snapshot(state, config_text), (dir / "checkpoint.bin").string());
    while (state.iteration < target) {
        if (!step(state, bound.simulators, eo)) {
            if (opts.on_message) opts.on_message("sample cap reached after " + std::to_string(state.iteration) + " iterations");
            break;
        }
        write_checkpoint(snapshot(state, config_text), (dir / "checkpoint.bin").string());
        if (opts.on_message)
            opts.on_message("iteration " + std::to_string(state.iteration) + ": H = " +
                            std::to_string(state.trajectory.back()) + ", set size " +
                            std::to_string(state.set.members.size()));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_outputs(dir, state, config_text, seconds, warnings);
}

fs::path checkpoint_file(const std::string& path) {
    fs::path p(path);
    if (fs::is_directory(p)) p /= "checkpoint.bin";
    return p;
}

}  // namespace

void cmd_run(const std::string& config_path, const CommandOptions& opts) {
    if (opts.out_dir.empty()) throw PreconditionError("run needs an output directory (--out)");
    auto cfg = load_config(config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.iterations) cfg.budget.iterations = *opts.iterations;
    if (opts.n_per_eval) cfg.budget.n_per_eval = *opts.n_per_eval;
    if (!opts.nominals.empty()) apply_nominals(cfg, opts.nominals);
    const auto bound = bind(cfg);
    const std::string text = serialize(cfg);

    const fs::path dir(opts.out_dir);
    ensure_dir(dir);
    DirLock lock(dir);
    write_text(dir / "config.normalized", text);

    EvalLog log(dir / "evals.log", bound.problem, false);
    auto eo = engine_options(cfg, opts);
    eo.on_record = [&](const EvaluationRecord& r) { log.write(r); };
    std::vector<std::string> warnings;
    auto state = initialize(bound.problem, bound.simulators, eo);
    if (opts.on_message)
        opts.on_message("initial design: " + std::to_string(state.records.size()) + " evaluations, H = " +
                        std::to_string(state.trajectory.back()));
    drive(state, bound, eo, dir, text, cfg.budget.iterations, opts, warnings);
}

void cmd_resume(const std::string& checkpoint_path, const CommandOptions& opts) {
    const fs::path cpfile = checkpoint_file(checkpoint_path);
    const auto cp = read_checkpoint(cpfile.string());
    auto cfg = parse_config(cp.config);
    if (opts.n_per_eval) cfg.budget.n_per_eval = *opts.n_per_eval;
    if (!opts.nominals.empty()) apply_nominals(cfg, opts.nominals);
    const std::int64_t extra = opts.iterations.value_or(0);
    if (extra < 0) throw PreconditionError("resume iterations must be >= 0");
    cfg.budget.iterations = cp.iteration + extra;
    const auto bound = bind(cfg);
    const std::string text = serialize(cfg);

    const fs::path dir = opts.out_dir.empty() ? cpfile.parent_path() : fs::path(opts.out_dir);
    ensure_dir(dir.empty() ? fs::path(".") : dir);
    DirLock lock(dir.empty() ? fs::path(".") : dir);
    write_text(dir / "config.normalized", text);

    auto eo = engine_options(cfg, opts);
    eo.seed = cp.seed;
    auto state = restore(bound.problem, cp, eo);
    {
        EvalLog rewrite(dir / "evals.log", bound.problem, false);
        for (const auto& r : state.records) rewrite.write(r);
    }
    EvalLog log(dir / "evals.log", bound.problem, true);
    eo.on_record = [&](const EvaluationRecord& r) { log.write(r); };
    std::vector<std::string> warnings;
    drive(state, bound, eo, dir, text, cfg.budget.iterations, opts, warnings);
}

void cmd_baseline(const std::string& config_path, const CommandOptions& opts) {
    if (opts.out_dir.empty()) throw PreconditionError("baseline needs an output directory (--out)");
    auto cfg = load_config(config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.n_per_eval) cfg.budget.n_per_eval = *opts.n_per_eval;
    if (!opts.nominals.empty()) apply_nominals(cfg, opts.nominals);
    const auto bound = bind(cfg);
    const auto& problem = bound.problem;

    const fs::path dir(opts.out_dir);
    ensure_dir(dir);
    DirLock lock(dir);
    std::vector<EvaluationRecord> records;
    const auto set = fixed_design_search(problem, bound.simulators, opts.baseline_count, cfg.budget.n_per_eval,
                                         opts.baseline_confidence, cfg.seed, opts.workers, &records);
    {
        EvalLog log(dir / "baseline_evals.log", problem, false);
        for (const auto& r : records) log.write(r);
    }
    {
        auto out = open_out(dir / "baseline_pareto.csv");
        std::string header = csv_header(problem);
        header.pop_back();
        out << header << '\n';
        for (const auto& m : set.members) {
            std::string sep;
            for (double v : m.point) out << std::exchange(sep, ",") << v;
            for (double v : m.objectives) out << std::exchange(sep, ",") << v;
            out << '\n';
        }
    }
    const double h = hypervolume(set);
    auto rep = open_out(dir / "baseline_report.txt");
    rep << "fixed design search\n";
    rep << "points           " << opts.baseline_count << '\n';
    rep << "samples / point  " << cfg.budget.n_per_eval << '\n';
    rep << "confidence       " << opts.baseline_confidence << '\n';
    rep << "seed             " << cfg.seed << '\n';
    rep << "survivors        " << set.members.size() << '\n';
    rep << "hypervolume      " << h << '\n';
    if (opts.on_message)
        opts.on_message("baseline: " + std::to_string(set.members.size()) + " solutions, H = " + std::to_string(h));
}

void cmd_verify(const std::string& run_path, const CommandOptions& opts) {
    if (opts.n_verify < 1) throw PreconditionError("n_verify must be positive");
    const fs::path cpfile = checkpoint_file(run_path);
    const auto cp = read_checkpoint(cpfile.string());
    const auto cfg = parse_config(cp.config);
    const auto bound = bind(cfg);
    auto eo = engine_options(cfg, opts);
    const auto state = restore(bound.problem, cp, eo);
    const auto& problem = state.problem;

    const fs::path dir = opts.out_dir.empty() ? cpfile.parent_path() : fs::path(opts.out_dir);
    ensure_dir(dir.empty() ? fs::path(".") : dir);
    auto out = open_out(dir / "verify.csv");
    out << csv_header(problem);
    for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
        const auto& l = problem.constraints[c].label;
        out << "quantile_" << l << ",estimate_" << l << ",n_verify_" << l << ",precise_" << l << ",ci_low_" << l
            << ",ci_high_" << l << ",oracle_" << l << (c + 1 < problem.constraints.size() ? "," : "");
    }
    out << '\n';
    const std::uint64_t seed = cp.seed ^ kVerifySalt;
    std::uint64_t eval_index = 0;
    for (const auto& row : set_report(state)) {
        for (double v : row.point) out << v << ',';
        for (double v : row.objectives) out << v << ',';
        for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
            const auto& con = problem.constraints[c];
            const auto& hyp = problem.hypothesis(con.hypothesis);
            const auto est = mc_estimate(bound.simulators.at(con.hypothesis), row.point, hyp, opts.n_verify, seed,
                                         eval_index++, opts.workers);
            const double p = bounded_rate(est.mean, con);
            const double half = 1.959963984540054 * std::sqrt(p * (1.0 - p) / static_cast<double>(opts.n_verify));
            double oracle = std::nan("");
            if (bound.scenario.oracle) {
                try {
                    oracle = bounded_rate(bound.scenario.oracle(row.point, hyp), con);
                } catch (const Error&) {
                }
            }
            out << row.quantiles[c] << ',' << row.estimates[c] << ',' << opts.n_verify << ',' << p << ','
                << p - half << ',' << p + half << ',' << oracle << (c + 1 < problem.constraints.size() ? "," : "");
        }
        out << '\n';
    }
    if (opts.on_message)
        opts.on_message("verified " + std::to_string(state.set.members.size()) + " solutions with N = " +
                        std::to_string(opts.n_verify));
}

}  // namespace ssdopt
