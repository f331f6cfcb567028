#include "instab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "instab/models/registry.hpp"

namespace instab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

void check_object_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) fail(path + "." + item.key(), "unknown key");
    }
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

long get_integer(const json& j, const std::string& path) {
    const double v = get_number(j, path);
    const long n = static_cast<long>(v);
    if (static_cast<double>(n) != v) fail(path, "expected an integer");
    return n;
}

/// Scalar applies to every coordinate; an array must match the dimension.
std::vector<double> get_point(const json& j, const std::string& path, int dim) {
    std::vector<double> out;
    if (j.is_number()) {
        out.assign(static_cast<std::size_t>(dim), j.get<double>());
        return out;
    }
    if (!j.is_array() || static_cast<int>(j.size()) != dim) {
        fail(path, "expected a number or an array of " + std::to_string(dim) +
                       " numbers");
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

/// Largest legal parameter value per model (probabilities cap at one).
std::optional<double> model_param_cap(const std::string& id) {
    if (id == "simple-queue" || id == "parallel" || id == "switch") return 1.0;
    return std::nullopt;
}

void check_bounds_legal(const std::string& model_id,
                        const std::vector<double>& lower,
                        const std::vector<double>& upper,
                        const std::string& path) {
    const auto cap = model_param_cap(model_id);
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const std::string at = "[" + std::to_string(i) + "]";
        if (lower[i] < 0.0) {
            fail(path + ".lower" + at, "negative value for model " + model_id);
        }
        if (cap && upper[i] > *cap) {
            fail(path + ".upper" + at, "value exceeds " + std::to_string(*cap) +
                                           " for model " + model_id);
        }
        if (upper[i] < lower[i]) {
            fail(path + ".upper" + at, "upper bound below lower bound");
        }
    }
}

std::string sweep_label(const json& value) {
    std::string s = value.dump();
    std::replace(s.begin(), s.end(), ',', ';');
    return s;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::vector<ExperimentInstance> ExperimentConfig::instances() const {
    std::vector<ExperimentInstance> out;
    if (sweep_key == SweepKey::none) {
        out.push_back({"base", set, engine, dom});
        return out;
    }
    for (std::size_t i = 0; i < sweep_values.size(); ++i) {
        const json& v = sweep_values[i];
        const std::string path = "sweep.values[" + std::to_string(i) + "]";
        ExperimentInstance inst{sweep_label(v), set, engine, dom};
        switch (sweep_key) {
        case SweepKey::upper:
            inst.set.upper = get_point(v, path, set.dim());
            break;
        case SweepKey::bounds: {
            if (!v.is_array() || v.size() != 2) {
                fail(path, "expected [lower, upper]");
            }
            inst.set.lower = get_point(v[0], path + "[0]", set.dim());
            inst.set.upper = get_point(v[1], path + "[1]", set.dim());
            break;
        }
        case SweepKey::delta:
            inst.dom.delta = get_number(v, path);
            if (!(inst.dom.delta > 0.0)) fail(path, "delta must be positive");
            break;
        case SweepKey::k_star:
            inst.engine.k_star = get_integer(v, path);
            if (inst.engine.k_star < 1) fail(path, "k_star must be >= 1");
            break;
        case SweepKey::none:
            break;
        }
        check_bounds_legal(model_id, inst.set.lower, inst.set.upper, path);
        try {
            inst.set.validate();
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
        out.push_back(std::move(inst));
    }
    return out;
}

nlohmann::json ExperimentConfig::normalized() const {
    json j;
    j["model"]["id"] = model_id;
    if (!model_overrides.empty()) j["model"]["overrides"] = model_overrides;
    json& s = j["set"];
    s["kind"] = set.kind == ParameterSet::Kind::box ? "box" : "grid";
    s["lower"] = set.lower;
    s["upper"] = set.upper;
    if (set.kind == ParameterSet::Kind::grid) {
        s["h"] = set.h;
        s["r_nbhd"] = set.r_nbhd;
    }
    json& e = j["engine"];
    e["eta"] = engine.eta;
    e["c"] = engine.tau.c;
    e["d"] = engine.tau.d;
    e["k_star"] = engine.k_star;
    e["algorithm"] = engine.algorithm == Algorithm::global ? "global" : "local";
    e["seed"] = engine.seed;
    json& d = j["dominating"];
    d["delta"] = dom.delta;
    d["sigma"] = dom.sigma;
    d["kappa"] = dom.kappa;
    d["phi"] = dom.phi;
    d["alpha"] = dom.alpha;
    d["n_reps"] = n_reps;
    j["replications"] = replications;
    if (sweep_key != SweepKey::none) {
        const char* key = sweep_key == SweepKey::upper    ? "upper"
                          : sweep_key == SweepKey::bounds ? "bounds"
                          : sweep_key == SweepKey::delta  ? "delta"
                                                          : "k_star";
        j["sweep"]["key"] = key;
        j["sweep"]["values"] = sweep_values;
    }
    return j;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") +
                                    e.what());
    }
    check_object_keys(j, "(root)",
                      {"model", "set", "engine", "dominating", "replications",
                       "sweep"});

    ExperimentConfig cfg;

    if (!j.contains("model")) fail("model", "missing section");
    const json& jm = j["model"];
    check_object_keys(jm, "model", {"id", "overrides"});
    if (!jm.contains("id") || !jm["id"].is_string()) {
        fail("model.id", "missing model id");
    }
    cfg.model_id = jm["id"].get<std::string>();
    cfg.model_overrides = jm.value("overrides", json::object());

    std::unique_ptr<ChainModel> model;
    try {
        model = models::make_model(cfg.model_id, cfg.model_overrides);
    } catch (const std::invalid_argument& e) {
        fail("model", e.what());
    }
    const int dim = model->param_dim();

    if (!j.contains("set")) fail("set", "missing section");
    const json& js = j["set"];
    check_object_keys(js, "set", {"kind", "lower", "upper", "h", "r_nbhd"});
    const std::string kind = js.value("kind", std::string("box"));
    if (kind != "box" && kind != "grid") {
        fail("set.kind", "expected \"box\" or \"grid\"");
    }
    if (!js.contains("lower")) fail("set.lower", "missing");
    if (!js.contains("upper")) fail("set.upper", "missing");
    std::vector<double> lower = get_point(js["lower"], "set.lower", dim);
    std::vector<double> upper = get_point(js["upper"], "set.upper", dim);
    check_bounds_legal(cfg.model_id, lower, upper, "set");
    if (kind == "box") {
        if (js.contains("h") || js.contains("r_nbhd")) {
            fail("set.h", "grid-only keys on a box set");
        }
        cfg.set = ParameterSet::box(std::move(lower), std::move(upper));
    } else {
        if (!js.contains("h")) fail("set.h", "grid resolution required");
        const double h = get_number(js["h"], "set.h");
        int r_nbhd = 1;
        if (js.contains("r_nbhd")) {
            r_nbhd = static_cast<int>(get_integer(js["r_nbhd"], "set.r_nbhd"));
        }
        cfg.set = ParameterSet::grid(std::move(lower), std::move(upper), h,
                                     r_nbhd);
    }
    try {
        cfg.set.validate();
    } catch (const std::invalid_argument& e) {
        fail("set", e.what());
    }

    if (!j.contains("engine")) fail("engine", "missing section");
    const json& je = j["engine"];
    check_object_keys(je, "engine",
                      {"eta", "c", "d", "k_star", "algorithm", "seed"});
    cfg.engine.eta = je.contains("eta") ? get_number(je["eta"], "engine.eta")
                                        : 1.0;
    cfg.engine.tau.c = je.contains("c") ? get_number(je["c"], "engine.c") : 0.5;
    cfg.engine.tau.d = je.contains("d") ? get_number(je["d"], "engine.d") : 1.0;
    if (!je.contains("k_star")) fail("engine.k_star", "missing");
    cfg.engine.k_star = get_integer(je["k_star"], "engine.k_star");
    const std::string algo = je.value("algorithm", std::string("global"));
    if (algo == "global") {
        cfg.engine.algorithm = Algorithm::global;
    } else if (algo == "local") {
        cfg.engine.algorithm = Algorithm::local;
    } else {
        fail("engine.algorithm", "expected \"global\" or \"local\"");
    }
    if (cfg.engine.algorithm == Algorithm::local &&
        cfg.set.kind != ParameterSet::Kind::grid) {
        fail("engine.algorithm", "local search requires a grid set");
    }
    if (je.contains("seed")) {
        if (!je["seed"].is_number_unsigned() && !je["seed"].is_number_integer()) {
            fail("engine.seed", "expected a nonnegative integer");
        }
        cfg.engine.seed = je["seed"].get<std::uint64_t>();
    }
    try {
        cfg.engine.validate();
    } catch (const std::invalid_argument& e) {
        fail("engine", e.what());
    }

    const json jd = j.value("dominating", json::object());
    check_object_keys(jd, "dominating",
                      {"delta", "sigma", "kappa", "phi", "alpha", "n_reps"});
    cfg.dom.tau = cfg.engine.tau;
    cfg.dom.delta = jd.contains("delta")
                        ? get_number(jd["delta"], "dominating.delta")
                        : 0.05;
    cfg.dom.sigma = jd.contains("sigma")
                        ? get_integer(jd["sigma"], "dominating.sigma")
                        : 1;
    cfg.dom.kappa = jd.contains("kappa")
                        ? get_number(jd["kappa"], "dominating.kappa")
                        : 1.0;
    cfg.dom.phi = jd.contains("phi") ? get_number(jd["phi"], "dominating.phi")
                                     : model->phi_f();
    cfg.dom.alpha = jd.contains("alpha")
                        ? get_number(jd["alpha"], "dominating.alpha")
                        : 0.05;
    if (jd.contains("n_reps")) {
        cfg.n_reps = get_integer(jd["n_reps"], "dominating.n_reps");
        if (cfg.n_reps < 100) fail("dominating.n_reps", "must be >= 100");
    }
    try {
        cfg.dom.validate();
    } catch (const std::invalid_argument& e) {
        fail("dominating", e.what());
    }

    if (j.contains("replications")) {
        cfg.replications = get_integer(j["replications"], "replications");
        if (cfg.replications < 1) fail("replications", "must be >= 1");
    }

    if (j.contains("sweep")) {
        const json& jw = j["sweep"];
        check_object_keys(jw, "sweep", {"key", "values"});
        if (!jw.contains("key") || !jw["key"].is_string()) {
            fail("sweep.key", "missing");
        }
        const std::string key = jw["key"].get<std::string>();
        if (key == "upper") {
            cfg.sweep_key = ExperimentConfig::SweepKey::upper;
        } else if (key == "bounds") {
            cfg.sweep_key = ExperimentConfig::SweepKey::bounds;
        } else if (key == "delta") {
            cfg.sweep_key = ExperimentConfig::SweepKey::delta;
        } else if (key == "k_star") {
            cfg.sweep_key = ExperimentConfig::SweepKey::k_star;
        } else {
            fail("sweep.key",
                 "expected one of upper, bounds, delta, k_star");
        }
        if (!jw.contains("values") || !jw["values"].is_array()) {
            fail("sweep.values", "expected an array");
        }
        for (const auto& v : jw["values"]) cfg.sweep_values.push_back(v);
    }

    cfg.instances();  // validates every sweep value
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot read file " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunResult run_replications(const ExperimentConfig& cfg,
                           const RunOptions& options) {
    const auto model = models::make_model(cfg.model_id, cfg.model_overrides);
    const std::uint64_t root =
        options.seed.value_or(cfg.engine.seed);
    const auto insts = cfg.instances();
    const int workers = std::max(1, options.workers);
    const long reps = cfg.replications;

    RunResult result;
    result.summary.reserve(insts.size());
    result.verdicts.resize(insts.size());

    for (std::size_t s = 0; s < insts.size(); ++s) {
        const ExperimentInstance& inst = insts[s];
        const auto t0 = std::chrono::steady_clock::now();

        // All replications start from the model's initial state, so one
        // quantile table covers the whole instance; build it up front with
        // every worker instead of racing on the cache inside the pool.
        const double w0 = model->f(model->initial_state());
        const bool double_inc = inst.engine.algorithm == Algorithm::local;
        QuantileCache::instance().get(inst.dom, w0, double_inc, cfg.n_reps,
                                      inst.engine.k_star, workers);

        auto& verdicts = result.verdicts[s];
        verdicts.assign(static_cast<std::size_t>(reps), std::nullopt);

        auto run_rep = [&](long r) {
            EngineConfig e = inst.engine;
            e.seed = derive_seed(root, {static_cast<std::uint64_t>(s),
                                        static_cast<std::uint64_t>(r)});
            TestOptions to;
            to.n_reps = cfg.n_reps;
            to.workers = 1;
            Trajectory traj;
            Trajectory* traj_ptr =
                options.trajectory_dir ? &traj : nullptr;
            try {
                Verdict v = instability_test(*model, inst.set, e, inst.dom, to,
                                             traj_ptr);
                verdicts[static_cast<std::size_t>(r)] = v;
            } catch (const std::exception&) {
                return;  // recorded as a failed replication
            }
            if (options.trajectory_dir) {
                const long index = static_cast<long>(s) * reps + r;
                std::ofstream out(*options.trajectory_dir + "/trajectory_" +
                                  std::to_string(index) + ".csv");
                write_trajectory_csv(out, traj);
            }
        };

        if (workers == 1) {
            for (long r = 0; r < reps; ++r) run_rep(r);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(workers));
            for (int t = 0; t < workers; ++t) {
                pool.emplace_back([&, t]() {
                    for (long r = t; r < reps; r += workers) run_rep(r);
                });
            }
            for (auto& th : pool) th.join();
        }

        SummaryRecord rec;
        rec.sweep_label = inst.label;
        rec.replications = reps;
        double drift_sum = 0.0;
        long drift_n = 0;
        for (const auto& v : verdicts) {
            if (!v) {
                ++rec.n_failed;
                continue;
            }
            if (v->unstable) ++rec.n_unstable;
            if (v->t > 0) {
                drift_sum += v->f_value / static_cast<double>(v->t);
                ++drift_n;
            }
        }
        rec.proportion =
            static_cast<double>(rec.n_unstable) / static_cast<double>(reps);
        rec.mean_drift = drift_n > 0 ? drift_sum / static_cast<double>(drift_n)
                                     : 0.0;
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        result.summary.push_back(std::move(rec));
    }
    return result;
}

void write_summary_csv(std::ostream& os,
                       const std::vector<SummaryRecord>& rs) {
    os << "sweep_value,R,n_unstable,proportion,mean_drift,n_failed\n";
    for (const auto& r : rs) {
        os << r.sweep_label << ',' << r.replications << ',' << r.n_unstable
           << ',' << format_double(r.proportion) << ','
           << format_double(r.mean_drift) << ',' << r.n_failed << '\n';
    }
}

void write_timing_csv(std::ostream& os, const std::vector<SummaryRecord>& rs) {
    os << "sweep_value,wall_seconds\n";
    for (const auto& r : rs) {
        os << r.sweep_label << ',' << format_double(r.wall_seconds) << '\n';
    }
}

void emit_outputs(const ExperimentConfig& cfg, const RunResult& result,
                  const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream os(out_dir + "/summary.csv");
        if (!os) throw std::runtime_error("cannot write " + out_dir +
                                          "/summary.csv");
        write_summary_csv(os, result.summary);
    }
    {
        std::ofstream os(out_dir + "/timing.csv");
        write_timing_csv(os, result.summary);
    }
    {
        std::ofstream os(out_dir + "/manifest.json");
        os << cfg.normalized().dump(2) << '\n';
    }
}

} // namespace instab
