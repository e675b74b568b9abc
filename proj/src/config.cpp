#include "ssdopt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ssdopt/errors.hpp"

namespace ssdopt {

using json = nlohmann::ordered_json;

namespace {

const std::set<std::string> kOptionalParams = {"alpha", "sigma", "rho_w", "rho_t", "rho_d"};

// Reads fields while collecting every problem rather than stopping at the first.
class Collector {
   public:
    std::vector<std::string> problems;

    void fail(const std::string& where, const std::string& what) { problems.push_back(where + ": " + what); }

    const json* field(const json& obj, const std::string& key, const std::string& where, bool required) {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(where, "missing required key '" + key + "'");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, const std::string& key, const std::string& where,
                                 bool required) {
        const json* v = field(obj, key, where, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            fail(where, "'" + key + "' must be a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<std::int64_t> integer(const json& obj, const std::string& key, const std::string& where,
                                        bool required) {
        const json* v = field(obj, key, where, required);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) {
            fail(where, "'" + key + "' must be an integer");
            return std::nullopt;
        }
        return v->get<std::int64_t>();
    }

    std::optional<std::string> string(const json& obj, const std::string& key, const std::string& where,
                                      bool required) {
        const json* v = field(obj, key, where, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail(where, "'" + key + "' must be a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    void unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
        if (!obj.is_object()) return;
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
    }

    const json* array(const json& obj, const std::string& key, const std::string& where, bool required) {
        const json* v = field(obj, key, where, required);
        if (v && !v->is_array()) {
            fail(where, "'" + key + "' must be a list");
            return nullptr;
        }
        return v;
    }
};

}  // namespace

ProblemConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    if (!root.is_object()) throw ConfigError({"config must be a JSON object"});

    Collector col;
    ProblemConfig cfg;
    col.unknown_keys(root,
                     {"scenario", "design_space", "hypotheses", "constraints", "objectives", "reference_point",
                      "budget", "pso", "seed"},
                     "config");

    if (auto s = col.string(root, "scenario", "config", true)) cfg.scenario = *s;

    if (const json* dims = col.array(root, "design_space", "config", true)) {
        for (std::size_t i = 0; i < dims->size(); ++i) {
            const auto& d = (*dims)[i];
            const std::string where = "design_space[" + std::to_string(i) + "]";
            if (!d.is_object()) {
                col.fail(where, "must be an object");
                continue;
            }
            col.unknown_keys(d, {"name", "low", "up", "kind"}, where);
            Dimension dim;
            if (auto v = col.string(d, "name", where, true)) dim.name = *v;
            if (auto v = col.number(d, "low", where, true)) dim.lower = *v;
            if (auto v = col.number(d, "up", where, true)) dim.upper = *v;
            if (auto v = col.string(d, "kind", where, false)) {
                if (*v == "integer")
                    dim.kind = DimKind::integer;
                else if (*v == "continuous")
                    dim.kind = DimKind::continuous;
                else
                    col.fail(where, "kind must be 'integer' or 'continuous', got '" + *v + "'");
            }
            cfg.design_space.push_back(dim);
        }
    }

    if (const json* hyps = col.array(root, "hypotheses", "config", true)) {
        for (std::size_t i = 0; i < hyps->size(); ++i) {
            const auto& h = (*hyps)[i];
            const std::string where = "hypotheses[" + std::to_string(i) + "]";
            if (!h.is_object()) {
                col.fail(where, "must be an object");
                continue;
            }
            col.unknown_keys(h, {"name", "params"}, where);
            Hypothesis hyp;
            if (auto v = col.string(h, "name", where, true)) hyp.name = *v;
            if (const json* p = col.field(h, "params", where, true)) {
                if (!p->is_object()) {
                    col.fail(where, "'params' must be an object of numbers");
                } else {
                    for (auto it = p->begin(); it != p->end(); ++it) {
                        if (it->is_number())
                            hyp.params[it.key()] = it->get<double>();
                        else
                            col.fail(where, "param '" + it.key() + "' must be a number");
                    }
                }
            }
            cfg.hypotheses.push_back(hyp);
        }
    }

    if (const json* cons = col.array(root, "constraints", "config", true)) {
        for (std::size_t i = 0; i < cons->size(); ++i) {
            const auto& c = (*cons)[i];
            const std::string where = "constraints[" + std::to_string(i) + "]";
            if (!c.is_object()) {
                col.fail(where, "must be an object");
                continue;
            }
            col.unknown_keys(c, {"label", "hypothesis", "nominal", "confidence", "rate"}, where);
            Constraint con;
            if (auto v = col.string(c, "label", where, true)) con.label = *v;
            if (auto v = col.string(c, "hypothesis", where, true)) con.hypothesis = *v;
            if (auto v = col.number(c, "nominal", where, false)) con.nominal = *v;
            if (auto v = col.number(c, "confidence", where, false)) con.confidence = *v;
            if (auto v = col.string(c, "rate", where, false)) {
                if (*v == "type_ii")
                    con.rate = ErrorRate::type_ii;
                else if (*v == "type_i")
                    con.rate = ErrorRate::type_i;
                else
                    col.fail(where, "rate must be 'type_ii' or 'type_i', got '" + *v + "'");
            }
            cfg.constraints.push_back(con);
        }
    }

    if (const json* objs = col.array(root, "objectives", "config", true)) {
        for (std::size_t i = 0; i < objs->size(); ++i) {
            const auto& o = (*objs)[i];
            const std::string where = "objectives[" + std::to_string(i) + "]";
            if (!o.is_object()) {
                col.fail(where, "must be an object");
                continue;
            }
            col.unknown_keys(o, {"label", "linear", "formula"}, where);
            ObjectiveConfig obj;
            if (auto v = col.string(o, "label", where, true)) obj.label = *v;
            if (auto v = col.string(o, "formula", where, false)) obj.formula = *v;
            if (const json* lin = col.field(o, "linear", where, false)) {
                if (!lin->is_object()) {
                    col.fail(where, "'linear' must map dimension names to coefficients");
                } else {
                    for (auto it = lin->begin(); it != lin->end(); ++it) {
                        if (it->is_number())
                            obj.linear[it.key()] = it->get<double>();
                        else
                            col.fail(where, "linear coefficient '" + it.key() + "' must be a number");
                    }
                }
            }
            if (obj.formula.empty() == obj.linear.empty())
                col.fail(where, "give exactly one of 'linear' or 'formula'");
            cfg.objectives.push_back(obj);
        }
    }

    if (const json* ref = col.array(root, "reference_point", "config", true)) {
        for (const auto& v : *ref) {
            if (v.is_number())
                cfg.reference_point.push_back(v.get<double>());
            else
                col.fail("reference_point", "entries must be numbers");
        }
    }

    if (const json* b = col.field(root, "budget", "config", false)) {
        const std::string where = "budget";
        col.unknown_keys(*b, {"initial_points", "n_per_eval", "iterations", "max_total_samples"}, where);
        if (auto v = col.integer(*b, "initial_points", where, false)) cfg.budget.initial_points = *v;
        if (auto v = col.integer(*b, "n_per_eval", where, false)) cfg.budget.n_per_eval = *v;
        if (auto v = col.integer(*b, "iterations", where, false)) cfg.budget.iterations = *v;
        if (const json* m = col.field(*b, "max_total_samples", where, false); m && !m->is_null()) {
            if (m->is_number_integer())
                cfg.budget.max_total_samples = m->get<std::int64_t>();
            else
                col.fail(where, "'max_total_samples' must be an integer or null");
        }
    }

    if (const json* p = col.field(root, "pso", "config", false)) {
        const std::string where = "pso";
        col.unknown_keys(*p, {"swarm_size", "iterations", "inertia", "cognitive", "social", "velocity_clamp"},
                         where);
        if (auto v = col.integer(*p, "swarm_size", where, false)) cfg.pso.swarm_size = static_cast<int>(*v);
        if (auto v = col.integer(*p, "iterations", where, false)) cfg.pso.iterations = static_cast<int>(*v);
        if (auto v = col.number(*p, "inertia", where, false)) cfg.pso.inertia = *v;
        if (auto v = col.number(*p, "cognitive", where, false)) cfg.pso.cognitive = *v;
        if (auto v = col.number(*p, "social", where, false)) cfg.pso.social = *v;
        if (auto v = col.number(*p, "velocity_clamp", where, false)) cfg.pso.velocity_clamp = *v;
    }

    if (const json* s = col.field(root, "seed", "config", false)) {
        if (s->is_number_unsigned())
            cfg.seed = s->get<std::uint64_t>();
        else
            col.fail("config", "'seed' must be a non-negative integer");
    }

    // Semantic checks need the scenario; binding reports them all at once, alongside any
    // structural problems already found.
    if (!cfg.scenario.empty()) {
        try {
            bind(cfg);
        } catch (const ConfigError& e) {
            col.problems.insert(col.problems.end(), e.problems().begin(), e.problems().end());
        } catch (const Error& e) {
            if (col.problems.empty()) throw;
        }
    }
    if (!col.problems.empty()) throw ConfigError(col.problems);
    if (cfg.budget.initial_points <= 0) cfg.budget.initial_points = cfg.budget.initial_points_for(cfg.design_space.size());
    return cfg;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize(const ProblemConfig& c) {
    json root;
    root["scenario"] = c.scenario;
    root["design_space"] = json::array();
    for (const auto& d : c.design_space)
        root["design_space"].push_back({{"name", d.name},
                                        {"low", d.lower},
                                        {"up", d.upper},
                                        {"kind", d.kind == DimKind::integer ? "integer" : "continuous"}});
    root["hypotheses"] = json::array();
    for (const auto& h : c.hypotheses) {
        json params = json::object();
        for (const auto& [k, v] : h.params) params[k] = v;
        root["hypotheses"].push_back({{"name", h.name}, {"params", params}});
    }
    root["constraints"] = json::array();
    for (const auto& con : c.constraints)
        root["constraints"].push_back({{"label", con.label},
                                       {"hypothesis", con.hypothesis},
                                       {"nominal", con.nominal},
                                       {"confidence", con.confidence},
                                       {"rate", con.rate == ErrorRate::type_i ? "type_i" : "type_ii"}});
    root["objectives"] = json::array();
    for (const auto& o : c.objectives) {
        json obj;
        obj["label"] = o.label;
        if (!o.formula.empty()) {
            obj["formula"] = o.formula;
        } else {
            json lin = json::object();
            for (const auto& [k, v] : o.linear) lin[k] = v;
            obj["linear"] = lin;
        }
        root["objectives"].push_back(obj);
    }
    root["reference_point"] = c.reference_point;
    json budget;
    budget["initial_points"] = c.budget.initial_points_for(c.design_space.size());
    budget["n_per_eval"] = c.budget.n_per_eval;
    budget["iterations"] = c.budget.iterations;
    budget["max_total_samples"] = c.budget.max_total_samples ? json(*c.budget.max_total_samples) : json(nullptr);
    root["budget"] = budget;
    root["pso"] = {{"swarm_size", c.pso.swarm_size},   {"iterations", c.pso.iterations},
                   {"inertia", c.pso.inertia},         {"cognitive", c.pso.cognitive},
                   {"social", c.pso.social},           {"velocity_clamp", c.pso.velocity_clamp}};
    root["seed"] = c.seed;
    return root.dump(2) + "\n";
}

BoundProblem bind(const ProblemConfig& c) {
    std::vector<std::string> problems;
    BoundProblem out;
    out.problem.space = DesignSpace(c.design_space);
    out.problem.hypotheses = c.hypotheses;
    out.problem.constraints = c.constraints;
    out.problem.reference = c.reference_point;
    for (const auto& o : c.objectives) out.problem.objectives.labels.push_back(o.label);

    bool have_scenario = false;
    if (!simlib::has_scenario(c.scenario)) {
        std::string known;
        for (const auto& n : simlib::scenario_names()) known += (known.empty() ? "" : ", ") + n;
        problems.push_back("unknown scenario '" + c.scenario + "' (known: " + known + ")");
    } else {
        try {
            out.scenario = simlib::make_scenario(c.scenario, out.problem.space);
            have_scenario = true;
        } catch (const ConfigError& e) {
            problems.insert(problems.end(), e.problems().begin(), e.problems().end());
        }
    }

    std::vector<std::function<double(const DesignPoint&)>> parts;
    for (const auto& o : c.objectives) {
        if (!o.formula.empty()) {
            if (!have_scenario) continue;
            auto it = out.scenario.formulas.find(o.formula);
            if (it == out.scenario.formulas.end()) {
                problems.push_back("objective '" + o.label + "': scenario '" + c.scenario + "' has no formula '" +
                                   o.formula + "'");
                continue;
            }
            parts.push_back(it->second);
        } else {
            std::vector<std::pair<std::size_t, double>> terms;
            for (const auto& [name, coef] : o.linear) {
                if (auto i = out.problem.space.index_of(name))
                    terms.emplace_back(*i, coef);
                else
                    problems.push_back("objective '" + o.label + "' references unknown dimension '" + name + "'");
            }
            parts.push_back([terms](const DesignPoint& x) {
                double v = 0.0;
                for (const auto& [i, coef] : terms) v += coef * x[i];
                return v;
            });
        }
    }
    out.problem.objectives.evaluate = [parts](const DesignPoint& x) {
        ObjectiveVector v;
        v.reserve(parts.size());
        for (const auto& f : parts) v.push_back(f(x));
        return v;
    };

    if (have_scenario) {
        for (const auto& h : c.hypotheses) {
            for (const auto& key : out.scenario.hypothesis_params)
                if (!h.params.count(key) && !kOptionalParams.count(key))
                    problems.push_back("hypothesis '" + h.name + "' is missing parameter '" + key + "'");
            for (const auto& [key, _] : h.params)
                if (std::find(out.scenario.hypothesis_params.begin(), out.scenario.hypothesis_params.end(), key) ==
                    out.scenario.hypothesis_params.end())
                    problems.push_back("hypothesis '" + h.name + "' has unknown parameter '" + key +
                                       "' for scenario '" + c.scenario + "'");
        }
        for (const auto& h : c.hypotheses) out.simulators[h.name] = out.scenario.simulate;
    }

    const auto report = validate_problem(out.problem);
    problems.insert(problems.end(), report.violations.begin(), report.violations.end());
    try {
        validate(c.budget, out.problem);
    } catch (const ConfigError& e) {
        problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
    try {
        validate(c.pso);
    } catch (const PreconditionError& e) {
        problems.push_back(e.what());
    }
    if (out.problem.objectives.labels.size() > 3) problems.push_back("at most 3 objectives are supported");
    for (double r : c.reference_point)
        if (!std::isfinite(r)) problems.push_back("reference_point entries must be finite");
    if (!problems.empty()) throw ConfigError(problems);
    return out;
}

void apply_nominals(ProblemConfig& config, const std::map<std::string, double>& nominals) {
    std::vector<std::string> problems;
    for (const auto& [label, value] : nominals) {
        bool found = false;
        for (auto& c : config.constraints) {
            if (c.label == label) {
                c.nominal = value;
                found = true;
            }
        }
        if (!found) problems.push_back("no constraint labelled '" + label + "'");
    }
    if (!problems.empty()) throw ConfigError(problems);
    bind(config);
}

}  // namespace ssdopt
