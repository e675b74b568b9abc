#include "ssdopt/engine.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "ssdopt/errors.hpp"
#include "ssdopt/sobol.hpp"
#include "ssdopt/stats.hpp"

namespace ssdopt {

namespace {

constexpr std::uint64_t kPsoSalt = 0x5bd1e9955bd1e995ULL;

const TrialSimulator& simulator_for(const SimulatorMap& sims, const std::string& hypothesis) {
    auto it = sims.find(hypothesis);
    if (it == sims.end() || !it->second)
        throw ConfigError({"no simulator registered for hypothesis '" + hypothesis + "'"});
    return it->second;
}

struct Evaluator {
    const Problem& problem;
    const SimulatorMap& sims;
    std::uint64_t seed;
    std::int64_t n_samples;
    int workers;

    // Evaluates one point under every constrained hypothesis.
    std::vector<EvaluationRecord> operator()(const DesignPoint& x, std::uint64_t& eval_index,
                                             std::int64_t iteration) const {
        std::vector<EvaluationRecord> out;
        for (const auto& name : problem.constrained_hypotheses()) {
            const auto est = mc_estimate(simulator_for(sims, name), x, problem.hypothesis(name), n_samples, seed,
                                         eval_index, workers);
            out.push_back(make_record(x, name, est.n_samples, est.successes, seed, eval_index, iteration));
            ++eval_index;
        }
        return out;
    }
};

using Models = std::vector<std::shared_ptr<const gp::GpModel>>;

std::shared_ptr<const gp::GpModel> build_model(const ConstraintData& d, const gp::KernelParams& params) {
    return std::make_shared<const gp::GpModel>(d.inputs, d.targets, d.noise, params);
}

std::shared_ptr<const gp::GpModel> fit_model(const ConstraintData& d, gp::FitOptions fit,
                                             std::optional<gp::KernelParams> warm) {
    fit.warm_start = warm;
    const auto result = gp::fit_hyperparameters(d.inputs, d.targets, d.noise, fit);
    try {
        return build_model(d, result.params);
    } catch (const ConditioningError&) {
        if (!warm) throw;
        return build_model(d, *warm);
    }
}

Models fit_all(const Problem& problem, const std::vector<EvaluationRecord>& records, const gp::FitOptions& fit,
               const Models* previous) {
    Models models;
    for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
        std::optional<gp::KernelParams> warm;
        if (previous && (*previous)[c]) warm = (*previous)[c]->params();
        models.push_back(fit_model(constraint_data(problem, records, c), fit, warm));
    }
    return models;
}

bool is_feasible(const Problem& problem, const Models& models, const DesignPoint& x) {
    const auto u = problem.space.to_unit(x);
    for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
        const auto pred = models[c]->predict(u);
        if (feasibility_quantile(pred.mean, pred.variance, problem.constraints[c].confidence) > 0.0) return false;
    }
    return true;
}

ApproximationSet feasible_set(const Problem& problem, const std::vector<EvaluationRecord>& records,
                              const Models& models) {
    std::vector<ParetoMember> candidates;
    for (const auto& x : evaluated_points(records))
        if (is_feasible(problem, models, x)) candidates.push_back({x, problem.objectives.evaluate(x)});
    return {pareto_filter(candidates), problem.reference};
}

std::int64_t samples_per_point(const Problem& problem, std::int64_t n) {
    return static_cast<std::int64_t>(problem.constrained_hypotheses().size()) * n;
}

}  // namespace

void validate(const BudgetConfig& budget, const Problem& problem) {
    std::vector<std::string> problems;
    const auto e = budget.initial_points_for(problem.space.size());
    if (e < 2) problems.push_back("budget.initial_points must be >= 2");
    if (budget.n_per_eval < 1) problems.push_back("budget.n_per_eval must be positive");
    if (budget.iterations < 0) problems.push_back("budget.iterations must be >= 0");
    if (budget.max_total_samples) {
        if (*budget.max_total_samples < 1)
            problems.push_back("budget.max_total_samples must be positive");
        else if (*budget.max_total_samples < e * samples_per_point(problem, budget.n_per_eval))
            problems.push_back("budget.max_total_samples is smaller than the initial design");
    }
    if (!problems.empty()) throw ConfigError(problems);
}

ConstraintData constraint_data(const Problem& problem, const std::vector<EvaluationRecord>& records,
                               std::size_t c) {
    const auto& con = problem.constraints.at(c);
    ConstraintData d;
    for (const auto& r : records) {
        if (r.hypothesis != con.hypothesis) continue;
        d.inputs.push_back(problem.space.to_unit(r.point));
        d.targets.push_back(constraint_value(bounded_rate(r.estimate, con), con));
        d.noise.push_back(r.mc_variance);
    }
    return d;
}

std::vector<DesignPoint> evaluated_points(const std::vector<EvaluationRecord>& records) {
    std::vector<DesignPoint> out;
    std::set<DesignPoint> seen;
    for (const auto& r : records)
        if (seen.insert(r.point).second) out.push_back(r.point);
    return out;
}

ApproximationSet recompute_feasible_set(const RunState& state) {
    return feasible_set(state.problem, state.records, state.models);
}

RunState initialize(const Problem& problem, const SimulatorMap& sims, const EngineOptions& options) {
    const auto report = validate_problem(problem);
    if (!report.ok()) throw ConfigError(report.violations);
    validate(options.budget, problem);
    validate(options.pso);

    RunState state;
    state.problem = problem;
    state.seed = options.seed;
    const Evaluator evaluate{problem, sims, options.seed, options.budget.n_per_eval, options.workers};
    const auto e = options.budget.initial_points_for(problem.space.size());
    for (const auto& u : sobol_points(static_cast<int>(problem.space.size()), e)) {
        const auto x = problem.space.snap(problem.space.from_unit(u));
        for (auto& rec : evaluate(x, state.next_eval_index, 0)) {
            if (options.on_record) options.on_record(rec);
            state.total_samples += rec.n_samples;
            state.records.push_back(std::move(rec));
        }
    }
    state.models = fit_all(problem, state.records, options.fit, nullptr);
    state.set = recompute_feasible_set(state);
    state.trajectory.push_back(hypervolume(state.set));
    return state;
}

bool step(RunState& state, const SimulatorMap& sims, const EngineOptions& options) {
    const auto& problem = state.problem;
    const auto n = options.budget.n_per_eval;
    if (options.budget.max_total_samples &&
        state.total_samples + samples_per_point(problem, n) > *options.budget.max_total_samples)
        return false;

    const std::int64_t iteration = state.iteration + 1;
    std::vector<ConstraintSurrogate> surrogates;
    for (std::size_t c = 0; c < problem.constraints.size(); ++c)
        surrogates.push_back({state.models[c].get(), problem.constraints[c]});

    PsoConfig pso = options.pso;
    pso.seed = derive_replicate_seed(state.seed ^ kPsoSalt, static_cast<std::uint64_t>(iteration), 0);
    const auto ei = [&](const DesignPoint& x) {
        return expected_improvement(problem.space.snap(x), problem.space, surrogates, state.set, problem.objectives, n);
    };
    const auto x = problem.space.snap(pso_maximize(ei, problem.space, pso).argmax);

    std::vector<FeasibilityState> predicted;
    for (const auto& s : surrogates) predicted.push_back(feasibility_state(x, problem.space, s, n));

    std::uint64_t eval_index = state.next_eval_index;
    const Evaluator evaluate{problem, sims, state.seed, n, options.workers};
    auto fresh = evaluate(x, eval_index, iteration);

    std::vector<Diagnostic> diagnostics;
    for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
        const auto& con = problem.constraints[c];
        for (const auto& rec : fresh) {
            if (rec.hypothesis != con.hypothesis) continue;
            Diagnostic d;
            d.iteration = iteration;
            d.constraint = con.label;
            d.predicted_mean = predicted[c].mean;
            d.predicted_sd = std::sqrt(predicted[c].variance);
            d.realized = constraint_value(bounded_rate(rec.estimate, con), con);
            d.z = (d.realized - d.predicted_mean) / std::sqrt(predicted[c].variance + rec.mc_variance);
            diagnostics.push_back(d);
        }
    }

    auto records = state.records;
    records.insert(records.end(), fresh.begin(), fresh.end());
    auto models = fit_all(problem, records, options.fit, &state.models);
    auto set = feasible_set(problem, records, models);

    for (const auto& rec : fresh)
        if (options.on_record) options.on_record(rec);
    for (const auto& d : diagnostics) {
        if (std::abs(d.z) > options.discrepancy_threshold && options.on_warning) {
            std::ostringstream msg;
            msg << "iteration " << d.iteration << ", constraint '" << d.constraint
                << "': realized value " << d.realized << " vs predicted " << d.predicted_mean << " (sd "
                << d.predicted_sd << ", z = " << d.z << ")";
            options.on_warning(msg.str());
        }
    }

    for (const auto& rec : fresh) state.total_samples += rec.n_samples;
    state.records = std::move(records);
    state.models = std::move(models);
    state.set = std::move(set);
    state.trajectory.push_back(hypervolume(state.set));
    state.diagnostics.insert(state.diagnostics.end(), diagnostics.begin(), diagnostics.end());
    state.next_eval_index = eval_index;
    state.iteration = iteration;
    return true;
}

void advance(RunState& state, const SimulatorMap& sims, const EngineOptions& options,
             std::int64_t target_iterations) {
    while (state.iteration < target_iterations)
        if (!step(state, sims, options)) break;
}

RunState run(const Problem& problem, const SimulatorMap& sims, const EngineOptions& options) {
    auto state = initialize(problem, sims, options);
    advance(state, sims, options, options.budget.iterations);
    return state;
}

ApproximationSet fixed_design_search(const Problem& problem, const SimulatorMap& sims, std::int64_t count,
                                     std::int64_t n_samples, double confidence, std::uint64_t seed, int workers,
                                     std::vector<EvaluationRecord>* records) {
    if (count < 1) throw PreconditionError("fixed_design_search needs count >= 1");
    if (n_samples < 1) throw PreconditionError("fixed_design_search needs n_samples >= 1");
    if (!(confidence > 0.0 && confidence < 1.0)) throw PreconditionError("confidence must lie in (0,1)");
    const double z = stats::normal_quantile(confidence);
    const Evaluator evaluate{problem, sims, seed, n_samples, workers};
    std::uint64_t eval_index = 0;
    std::vector<ParetoMember> survivors;
    for (const auto& u : sobol_points(static_cast<int>(problem.space.size()), count)) {
        const auto x = problem.space.snap(problem.space.from_unit(u));
        const auto recs = evaluate(x, eval_index, 0);
        bool keep = true;
        for (const auto& con : problem.constraints) {
            for (const auto& r : recs) {
                if (r.hypothesis != con.hypothesis) continue;
                const double rate = bounded_rate(r.estimate, con);
                const double upper = rate + z * std::sqrt(rate * (1.0 - rate) / static_cast<double>(r.n_samples));
                if (!(upper < con.nominal)) keep = false;
            }
        }
        if (records) records->insert(records->end(), recs.begin(), recs.end());
        if (keep) survivors.push_back({x, problem.objectives.evaluate(x)});
    }
    return {pareto_filter(survivors), problem.reference};
}

std::vector<SetRow> set_report(const RunState& state) {
    const auto& problem = state.problem;
    std::vector<SetRow> rows;
    for (const auto& m : state.set.members) {
        SetRow row;
        row.point = m.point;
        row.objectives = m.objectives;
        const auto u = problem.space.to_unit(m.point);
        for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
            const auto& con = problem.constraints[c];
            const auto pred = state.models[c]->predict(u);
            row.quantiles.push_back(feasibility_quantile(pred.mean, pred.variance, con.confidence));
            std::int64_t n = 0, s = 0;
            for (const auto& r : state.records) {
                if (r.hypothesis == con.hypothesis && r.point == m.point) {
                    n += r.n_samples;
                    s += r.successes;
                }
            }
            row.samples.push_back(n);
            row.estimates.push_back(n > 0 ? bounded_rate(static_cast<double>(s) / n, con) : std::nan(""));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'S', 'S', 'D', 'O', 'C', 'K', 'P', 'T'};

class Writer {
   public:
    template <class T>
    void pod(const T& v) {
        const char* p = reinterpret_cast<const char*>(&v);
        buf_.append(p, sizeof(T));
    }
    void str(const std::string& s) {
        pod<std::uint64_t>(s.size());
        buf_ += s;
    }
    void doubles(const std::vector<double>& v) {
        pod<std::uint64_t>(v.size());
        for (double x : v) pod(x);
    }
    std::string& buffer() { return buf_; }

   private:
    std::string buf_;
};

class Reader {
   public:
    explicit Reader(const std::string& buf, std::size_t end) : buf_(buf), end_(end) {}
    template <class T>
    T pod() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string str() {
        const auto n = pod<std::uint64_t>();
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::vector<double> doubles() {
        const auto n = pod<std::uint64_t>();
        need(n * sizeof(double));
        std::vector<double> v(n);
        for (auto& x : v) x = pod<double>();
        return v;
    }
    bool done() const { return pos_ == end_; }

   private:
    void need(std::uint64_t n) const {
        if (n > end_ - pos_) throw CheckpointError("checkpoint is truncated");
    }
    const std::string& buf_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Checkpoint snapshot(const RunState& state, const std::string& config) {
    Checkpoint cp;
    cp.config = config;
    cp.config_hash = fnv1a(config);
    cp.seed = state.seed;
    cp.iteration = state.iteration;
    cp.next_eval_index = state.next_eval_index;
    cp.total_samples = state.total_samples;
    cp.trajectory = state.trajectory;
    for (std::size_t c = 0; c < state.problem.constraints.size(); ++c) {
        const auto& con = state.problem.constraints[c];
        cp.constraints.push_back({con.label, con.nominal, con.confidence, con.rate, state.models[c]->params()});
    }
    cp.records = state.records;
    return cp;
}

void write_checkpoint(const Checkpoint& cp, const std::string& path) {
    Writer w;
    w.buffer().append(kMagic, sizeof(kMagic));
    w.pod(kCheckpointVersion);
    w.str(cp.config);
    w.pod(cp.config_hash);
    w.pod(cp.seed);
    w.pod(cp.iteration);
    w.pod(cp.next_eval_index);
    w.pod(cp.total_samples);
    w.doubles(cp.trajectory);
    w.pod<std::uint64_t>(cp.constraints.size());
    for (const auto& c : cp.constraints) {
        w.str(c.label);
        w.pod(c.nominal);
        w.pod(c.confidence);
        w.pod<std::uint8_t>(c.rate == ErrorRate::type_i ? 1 : 0);
        w.pod(c.params.sigma);
        w.doubles(c.params.lengthscales);
    }
    w.pod<std::uint64_t>(cp.records.size());
    for (const auto& r : cp.records) {
        w.doubles(r.point);
        w.str(r.hypothesis);
        w.pod(r.n_samples);
        w.pod(r.successes);
        w.pod(r.seed);
        w.pod(r.eval_index);
        w.pod(r.iteration);
    }
    w.pod(fnv1a(w.buffer()));

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write checkpoint " + tmp);
        out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
        if (!out) throw IoError("failed writing checkpoint " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot move checkpoint into place at " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t) ||
        std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError(path + " is not a checkpoint file");
    const std::size_t body = buf.size() - sizeof(std::uint64_t);
    std::uint64_t stored;
    std::memcpy(&stored, buf.data() + body, sizeof(stored));

    Reader r(buf, body);
    for (std::size_t i = 0; i < sizeof(kMagic); ++i) r.pod<char>();
    const auto version = r.pod<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");
    if (fnv1a(buf.substr(0, body)) != stored) throw CheckpointError("checkpoint checksum mismatch: file is corrupt");

    Checkpoint cp;
    cp.config = r.str();
    cp.config_hash = r.pod<std::uint64_t>();
    if (cp.config_hash != fnv1a(cp.config)) throw CheckpointError("checkpoint config hash mismatch");
    cp.seed = r.pod<std::uint64_t>();
    cp.iteration = r.pod<std::int64_t>();
    cp.next_eval_index = r.pod<std::uint64_t>();
    cp.total_samples = r.pod<std::int64_t>();
    cp.trajectory = r.doubles();
    const auto nc = r.pod<std::uint64_t>();
    for (std::uint64_t i = 0; i < nc; ++i) {
        ConstraintCheckpoint c;
        c.label = r.str();
        c.nominal = r.pod<double>();
        c.confidence = r.pod<double>();
        c.rate = r.pod<std::uint8_t>() ? ErrorRate::type_i : ErrorRate::type_ii;
        c.params.sigma = r.pod<double>();
        c.params.lengthscales = r.doubles();
        cp.constraints.push_back(std::move(c));
    }
    const auto nr = r.pod<std::uint64_t>();
    for (std::uint64_t i = 0; i < nr; ++i) {
        auto point = r.doubles();
        auto hyp = r.str();
        const auto n = r.pod<std::int64_t>();
        const auto s = r.pod<std::int64_t>();
        const auto seed = r.pod<std::uint64_t>();
        const auto idx = r.pod<std::uint64_t>();
        const auto it = r.pod<std::int64_t>();
        if (n < 1 || s < 0 || s > n) throw CheckpointError("checkpoint record " + std::to_string(i) + " is invalid");
        cp.records.push_back(make_record(std::move(point), std::move(hyp), n, s, seed, idx, it));
    }
    if (!r.done()) throw CheckpointError("checkpoint has trailing data");
    return cp;
}

RunState restore(const Problem& problem, const Checkpoint& cp, const EngineOptions& options) {
    const auto report = validate_problem(problem);
    if (!report.ok()) throw ConfigError(report.violations);
    RunState state;
    state.problem = problem;
    state.records = cp.records;
    state.trajectory = cp.trajectory;
    state.seed = cp.seed;
    state.iteration = cp.iteration;
    state.next_eval_index = cp.next_eval_index;
    state.total_samples = cp.total_samples;
    for (const auto& r : state.records)
        if (r.point.size() != problem.space.size())
            throw CheckpointError("checkpoint records do not match the design space");

    for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
        const auto& con = problem.constraints[c];
        const auto data = constraint_data(problem, state.records, c);
        const ConstraintCheckpoint* stored = nullptr;
        for (const auto& s : cp.constraints)
            if (s.label == con.label && s.params.lengthscales.size() == problem.space.size()) stored = &s;
        if (!stored) {
            state.models.push_back(fit_model(data, options.fit, std::nullopt));
        } else if (stored->nominal == con.nominal && stored->rate == con.rate) {
            try {
                state.models.push_back(build_model(data, stored->params));
            } catch (const ConditioningError&) {
                state.models.push_back(fit_model(data, options.fit, stored->params));
            }
        } else {
            state.models.push_back(fit_model(data, options.fit, stored->params));
        }
    }
    state.set = recompute_feasible_set(state);
    return state;
}

}  // namespace ssdopt
