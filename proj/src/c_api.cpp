#include "ssdopt/ssdopt.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <string>

#include "ssdopt/commands.hpp"
#include "ssdopt/config.hpp"
#include "ssdopt/engine.hpp"
#include "ssdopt/errors.hpp"
#include "ssdopt/pareto.hpp"
#include "ssdopt/sobol.hpp"

struct ssdopt_run {
    ssdopt::ProblemConfig config;
    ssdopt::BoundProblem bound;
    ssdopt::EngineOptions options;
    ssdopt::RunState state;
    std::string text;
};

namespace {

thread_local std::string last_error;

ssdopt_status fail(ssdopt_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

// Maps exceptions to status codes.
template <class F>
ssdopt_status guarded(F&& f) {
    try {
        f();
        last_error.clear();
        return SSDOPT_OK;
    } catch (const ssdopt::ConfigError& e) {
        std::string msg = "invalid config:";
        for (const auto& p : e.problems()) msg += "\n  - " + p;
        return fail(SSDOPT_CONFIG, msg);
    } catch (const ssdopt::LockError& e) {
        return fail(SSDOPT_LOCKED, e.what());
    } catch (const ssdopt::IoError& e) {
        return fail(SSDOPT_IO, e.what());
    } catch (const ssdopt::SimulationError& e) {
        return fail(SSDOPT_SIMULATION, std::string(e.what()) + " (replicate " + std::to_string(e.replicate()) +
                                           ", seed " + std::to_string(e.replicate_seed()) + ")");
    } catch (const ssdopt::ConditioningError& e) {
        return fail(SSDOPT_CONDITIONING, e.what());
    } catch (const ssdopt::CheckpointError& e) {
        return fail(SSDOPT_CHECKPOINT, e.what());
    } catch (const ssdopt::UnsupportedDimensionError& e) {
        return fail(SSDOPT_UNSUPPORTED, e.what());
    } catch (const ssdopt::PreconditionError& e) {
        return fail(SSDOPT_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(SSDOPT_INTERNAL, e.what());
    } catch (...) {
        return fail(SSDOPT_INTERNAL, "unknown error");
    }
}

ssdopt::CommandOptions convert(const ssdopt_options* o) {
    ssdopt::CommandOptions c;
    if (!o) return c;
    if (o->has_seed) c.seed = o->seed;
    if (o->has_iterations) c.iterations = o->iterations;
    if (o->has_n_per_eval) c.n_per_eval = o->n_per_eval;
    c.n_verify = o->n_verify;
    c.baseline_count = o->baseline_count;
    c.baseline_confidence = o->baseline_confidence;
    c.workers = std::max(1, o->workers);
    if (o->out_dir) c.out_dir = o->out_dir;
    for (std::size_t i = 0; i < o->n_nominals; ++i) {
        if (!o->nominal_labels || !o->nominal_labels[i] || !o->nominal_values)
            throw ssdopt::PreconditionError("nominal override arrays are incomplete");
        c.nominals[o->nominal_labels[i]] = o->nominal_values[i];
    }
    if (o->on_message) {
        auto fn = o->on_message;
        void* ud = o->user_data;
        c.on_message = [fn, ud](const std::string& m) { fn(m.c_str(), ud); };
    }
    return c;
}

void require(bool ok, const char* what) {
    if (!ok) throw ssdopt::PreconditionError(what);
}

ssdopt::EngineOptions engine_options(const ssdopt::ProblemConfig& cfg) {
    ssdopt::EngineOptions eo;
    eo.budget = cfg.budget;
    eo.pso = cfg.pso;
    eo.seed = cfg.seed;
    return eo;
}

}  // namespace

extern "C" {

const char* ssdopt_last_error(void) { return last_error.c_str(); }

const char* ssdopt_status_name(ssdopt_status status) {
    switch (status) {
        case SSDOPT_OK: return "ok";
        case SSDOPT_INVALID_ARGUMENT: return "invalid argument";
        case SSDOPT_CONFIG: return "config error";
        case SSDOPT_IO: return "i/o error";
        case SSDOPT_SIMULATION: return "simulation error";
        case SSDOPT_CONDITIONING: return "conditioning error";
        case SSDOPT_CHECKPOINT: return "checkpoint error";
        case SSDOPT_UNSUPPORTED: return "unsupported";
        case SSDOPT_LOCKED: return "locked";
        case SSDOPT_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* ssdopt_version(void) { return "0.1.0"; }

void ssdopt_options_init(ssdopt_options* o) {
    if (!o) return;
    *o = ssdopt_options{};
    o->n_verify = 100000;
    o->baseline_count = 50;
    o->baseline_confidence = 0.975;
    o->workers = 1;
}

ssdopt_status ssdopt_cmd_run(const char* config_path, const ssdopt_options* options) {
    return guarded([&] {
        require(config_path, "config path is null");
        ssdopt::cmd_run(config_path, convert(options));
    });
}

ssdopt_status ssdopt_cmd_resume(const char* checkpoint_path, const ssdopt_options* options) {
    return guarded([&] {
        require(checkpoint_path, "checkpoint path is null");
        ssdopt::cmd_resume(checkpoint_path, convert(options));
    });
}

ssdopt_status ssdopt_cmd_baseline(const char* config_path, const ssdopt_options* options) {
    return guarded([&] {
        require(config_path, "config path is null");
        ssdopt::cmd_baseline(config_path, convert(options));
    });
}

ssdopt_status ssdopt_cmd_verify(const char* run_path, const ssdopt_options* options) {
    return guarded([&] {
        require(run_path, "run path is null");
        ssdopt::cmd_verify(run_path, convert(options));
    });
}

ssdopt_status ssdopt_run_create(const char* config_json, ssdopt_run** out) {
    return guarded([&] {
        require(config_json && out, "null argument");
        auto run = std::make_unique<ssdopt_run>();
        run->config = ssdopt::parse_config(config_json);
        run->bound = ssdopt::bind(run->config);
        run->options = engine_options(run->config);
        run->text = ssdopt::serialize(run->config);
        run->state = ssdopt::initialize(run->bound.problem, run->bound.simulators, run->options);
        *out = run.release();
    });
}

ssdopt_status ssdopt_run_step(ssdopt_run* run, int* advanced) {
    return guarded([&] {
        require(run, "null run");
        const bool moved = ssdopt::step(run->state, run->bound.simulators, run->options);
        if (advanced) *advanced = moved ? 1 : 0;
    });
}

ssdopt_status ssdopt_run_checkpoint(const ssdopt_run* run, const char* path) {
    return guarded([&] {
        require(run && path, "null argument");
        ssdopt::write_checkpoint(ssdopt::snapshot(run->state, run->text), path);
    });
}

ssdopt_status ssdopt_run_resume(const char* checkpoint_path, ssdopt_run** out) {
    return guarded([&] {
        require(checkpoint_path && out, "null argument");
        const auto cp = ssdopt::read_checkpoint(checkpoint_path);
        auto run = std::make_unique<ssdopt_run>();
        run->config = ssdopt::parse_config(cp.config);
        run->bound = ssdopt::bind(run->config);
        run->options = engine_options(run->config);
        run->options.seed = cp.seed;
        run->text = cp.config;
        run->state = ssdopt::restore(run->bound.problem, cp, run->options);
        *out = run.release();
    });
}

void ssdopt_run_destroy(ssdopt_run* run) { delete run; }

ssdopt_status ssdopt_run_iteration(const ssdopt_run* run, int64_t* iteration) {
    return guarded([&] {
        require(run && iteration, "null argument");
        *iteration = run->state.iteration;
    });
}

ssdopt_status ssdopt_run_dimensions(const ssdopt_run* run, size_t* design_dims, size_t* objectives) {
    return guarded([&] {
        require(run, "null run");
        if (design_dims) *design_dims = run->state.problem.space.size();
        if (objectives) *objectives = run->state.problem.objectives.labels.size();
    });
}

ssdopt_status ssdopt_run_trajectory(const ssdopt_run* run, double* values, size_t capacity, size_t* length) {
    return guarded([&] {
        require(run, "null run");
        const auto& t = run->state.trajectory;
        if (length) *length = t.size();
        if (values) std::copy_n(t.begin(), std::min(capacity, t.size()), values);
    });
}

ssdopt_status ssdopt_run_set_size(const ssdopt_run* run, size_t* size) {
    return guarded([&] {
        require(run && size, "null argument");
        *size = run->state.set.members.size();
    });
}

ssdopt_status ssdopt_run_set_member(const ssdopt_run* run, size_t index, double* point, double* objectives) {
    return guarded([&] {
        require(run, "null run");
        const auto& members = run->state.set.members;
        require(index < members.size(), "set index out of range");
        if (point) std::copy(members[index].point.begin(), members[index].point.end(), point);
        if (objectives) std::copy(members[index].objectives.begin(), members[index].objectives.end(), objectives);
    });
}

ssdopt_status ssdopt_hypervolume(const double* points, size_t count, size_t dim, const double* reference,
                                 double* out) {
    return guarded([&] {
        require(out && reference && (points || count == 0), "null argument");
        std::vector<ssdopt::ObjectiveVector> pts;
        for (size_t i = 0; i < count; ++i) pts.emplace_back(points + i * dim, points + (i + 1) * dim);
        *out = ssdopt::hypervolume(pts, ssdopt::ObjectiveVector(reference, reference + dim));
    });
}

ssdopt_status ssdopt_sobol(int dim, int64_t count, double* out) {
    return guarded([&] {
        require(out, "null output");
        require(count >= 1, "count must be >= 1");
        const auto pts = ssdopt::sobol_points(dim, count);
        for (std::size_t i = 0; i < pts.size(); ++i) std::copy(pts[i].begin(), pts[i].end(), out + i * dim);
    });
}

}  // extern "C"
