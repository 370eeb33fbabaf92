#pragma once

// Experiment configuration: strict JSON in, effective JSON echo out.
//
// Parsing is strict — any key not in the schema is rejected with its field
// path, so a typo'd knob fails loudly instead of silently running defaults.
// Every field has a default; the effective (fully filled) config is what
// gets echoed into run manifests, and `load` accepts either a plain config
// or a previously written manifest (it unwraps the embedded "config" echo),
// so any manifest can be re-run as-is.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "shelab/params.hpp"
#include "shelab/shapes.hpp"

namespace shelab {

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "noise-check",  "she-mean",           "pde-convergence", "sampler-check",
        "duality-gap",  "moments-martingale", "gronwall"};
    return names;
}

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::string& path,
                                std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(path + it.key() + ": unknown key");
    }
}

inline const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline double get_number(const json& obj, const std::string& path, const char* key,
                         double fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(path + key + ": expected a number");
    return v->get<double>();
}

inline long get_integer(const json& obj, const std::string& path, const char* key,
                        long fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer() && !v->is_number_unsigned())
        throw ConfigError(path + key + ": expected an integer");
    return v->get<long>();
}

inline std::uint64_t get_seed(const json& obj, const std::string& path, const char* key,
                              std::uint64_t fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<long long>() >= 0)
        return static_cast<std::uint64_t>(v->get<long long>());
    throw ConfigError(path + key + ": expected a nonnegative integer");
}

inline std::string get_string(const json& obj, const std::string& path, const char* key,
                              std::string fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(path + key + ": expected a string");
    return v->get<std::string>();
}

inline std::vector<double> get_number_array(const json& obj, const std::string& path,
                                            const char* key, std::vector<double> fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(path + key + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(path + key + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline GaussianBump parse_shape(const json& obj, const std::string& path,
                                const char* key, const GaussianBump& fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    const std::string sub = path + key + ".";
    if (!v->is_object()) throw ConfigError(path + key + ": expected a shape object");
    reject_unknown_keys(*v, sub, {"shape", "center", "width", "mass"});
    const std::string kind = get_string(*v, sub, "shape", "gaussian");
    if (kind != "gaussian")
        throw ConfigError(sub + "shape: unknown shape '" + kind + "' (only 'gaussian')");
    GaussianBump b;
    b.center = get_number(*v, sub, "center", fallback.center);
    b.width = get_number(*v, sub, "width", fallback.width);
    b.mass = get_number(*v, sub, "mass", fallback.mass);
    return b;
}

}  // namespace detail

struct ExperimentConfig {
    std::string experiment = "duality-gap";
    std::uint64_t seed = 1;
    long replicas = 2000;
    int workers = 0;  // 0 = one per hardware thread
    std::string out = "out";
    ModelParams model{};
    GaussianBump phi{0.0, 1.0, 1.0};   // initial condition of the forward field
    GaussianBump psi{0.0, 1.5, 1.0};   // dual test function / initial dual field

    // noise-check
    std::vector<double> lambdas{0.25, 0.5, 1.0};
    double noise_t = 0.25;
    double noise_area = 1.0;

    // she-mean / moments-martingale output times
    std::vector<double> times{0.05, 0.1, 0.15, 0.25};
    double mean_allowance = 0.01;

    // sampler-check
    long draws = 100000;
    long trajectories = 200;
    double sampler_t = 0.5;

    // duality-gap
    std::vector<double> n_list{4.0, 16.0, 64.0};
    double gap_t = 0.25;
    double gap_allowance = 0.02;

    // moments-martingale
    double q = 1.3;

    // gronwall
    std::vector<double> gammas{0.3, 0.6, 0.9};
    std::vector<double> cs{0.5, 1.0, 2.0};
    double gronwall_T = 1.0;
    int gronwall_points = 100;

    bool uses_lattice_times() const {
        return experiment == "she-mean" || experiment == "moments-martingale";
    }

    void validate() const {
        bool known = false;
        for (const auto& name : experiment_names()) known = known || name == experiment;
        if (!known) throw ConfigError("experiment: unknown experiment '" + experiment + "'");
        try {
            model.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("model: ") + e.what());
        }
        try {
            phi.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("phi: ") + e.what());
        }
        try {
            psi.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("psi: ") + e.what());
        }
        if (replicas < 2) throw ConfigError("replicas: need at least 2");
        if (workers < 0) throw ConfigError("workers: must be >= 0");
        if (out.empty()) throw ConfigError("out: must be a nonempty path");
        for (double l : lambdas)
            if (!(l > 0.0)) throw ConfigError("lambdas: entries must be > 0");
        if (lambdas.empty()) throw ConfigError("lambdas: need at least one value");
        if (!(noise_t > 0.0)) throw ConfigError("noise_t: must be > 0");
        if (!(noise_area > 0.0)) throw ConfigError("noise_area: must be > 0");
        if (times.empty()) throw ConfigError("times: need at least one value");
        for (double t : times) {
            if (!(t > 0.0)) throw ConfigError("times: entries must be > 0");
            if (uses_lattice_times() && !on_step_lattice(t))
                throw ConfigError("times: entries must be integer multiples of model.dt");
        }
        if (!(mean_allowance >= 0.0)) throw ConfigError("mean_allowance: must be >= 0");
        if (draws < 10) throw ConfigError("draws: need at least 10");
        if (trajectories < 1) throw ConfigError("trajectories: need at least 1");
        if (!(sampler_t > 0.0)) throw ConfigError("sampler_t: must be > 0");
        if (n_list.empty()) throw ConfigError("n_list: need at least one level");
        for (double n : n_list)
            if (!(n >= 1.0)) throw ConfigError("n_list: entries must be >= 1");
        if (!(gap_t > 0.0)) throw ConfigError("gap_t: must be > 0");
        if (experiment == "duality-gap" && !on_step_lattice(gap_t))
            throw ConfigError("gap_t: must be an integer multiple of model.dt");
        if (!(gap_allowance >= 0.0)) throw ConfigError("gap_allowance: must be >= 0");
        if (experiment == "moments-martingale" && !(q > 1.0 && q < model.alpha))
            throw ConfigError("q: need 1 < q < model.alpha");
        if (gammas.empty()) throw ConfigError("gammas: need at least one value");
        for (double g : gammas)
            if (!(g > 0.0 && g < 1.0)) throw ConfigError("gammas: entries must be in (0,1)");
        if (cs.empty()) throw ConfigError("cs: need at least one value");
        for (double c : cs)
            if (!(c > 0.0)) throw ConfigError("cs: entries must be > 0");
        if (!(gronwall_T > 0.0)) throw ConfigError("gronwall_T: must be > 0");
        if (gronwall_points < 2) throw ConfigError("gronwall_points: need at least 2");
    }

    bool on_step_lattice(double t) const {
        const double k = std::round(t / model.dt);
        return std::fabs(t - k * model.dt) <= 1e-9;
    }

    static ExperimentConfig from_json(const json& j) {
        if (!j.is_object()) throw ConfigError("config: expected a JSON object");
        detail::reject_unknown_keys(
            j, "",
            {"experiment", "seed", "replicas", "workers", "out", "model", "phi", "psi",
             "lambdas", "noise_t", "noise_area", "times", "mean_allowance", "draws",
             "trajectories", "sampler_t", "n_list", "gap_t", "gap_allowance", "q",
             "gammas", "cs", "gronwall_T", "gronwall_points"});
        ExperimentConfig c;
        c.experiment = detail::get_string(j, "", "experiment", c.experiment);
        c.seed = detail::get_seed(j, "", "seed", c.seed);
        c.replicas = detail::get_integer(j, "", "replicas", c.replicas);
        c.workers = static_cast<int>(detail::get_integer(j, "", "workers", c.workers));
        c.out = detail::get_string(j, "", "out", c.out);
        if (const json* m = detail::find(j, "model")) {
            if (!m->is_object()) throw ConfigError("model: expected an object");
            detail::reject_unknown_keys(*m, "model.",
                                        {"alpha", "beta", "n", "eps_jump", "dt", "horizon",
                                         "sink_factor", "grid"});
            c.model.alpha = detail::get_number(*m, "model.", "alpha", c.model.alpha);
            c.model.beta = detail::get_number(*m, "model.", "beta", c.model.beta);
            c.model.n = detail::get_number(*m, "model.", "n", c.model.n);
            c.model.eps_jump = detail::get_number(*m, "model.", "eps_jump", c.model.eps_jump);
            c.model.dt = detail::get_number(*m, "model.", "dt", c.model.dt);
            c.model.horizon = detail::get_number(*m, "model.", "horizon", c.model.horizon);
            c.model.sink_factor =
                detail::get_number(*m, "model.", "sink_factor", c.model.sink_factor);
            if (const json* g = detail::find(*m, "grid")) {
                if (!g->is_object()) throw ConfigError("model.grid: expected an object");
                detail::reject_unknown_keys(*g, "model.grid.", {"left", "right", "cells"});
                c.model.grid.left = detail::get_number(*g, "model.grid.", "left", c.model.grid.left);
                c.model.grid.right =
                    detail::get_number(*g, "model.grid.", "right", c.model.grid.right);
                c.model.grid.cells = static_cast<int>(
                    detail::get_integer(*g, "model.grid.", "cells", c.model.grid.cells));
            }
        }
        c.phi = detail::parse_shape(j, "", "phi", c.phi);
        c.psi = detail::parse_shape(j, "", "psi", c.psi);
        c.lambdas = detail::get_number_array(j, "", "lambdas", c.lambdas);
        c.noise_t = detail::get_number(j, "", "noise_t", c.noise_t);
        c.noise_area = detail::get_number(j, "", "noise_area", c.noise_area);
        c.times = detail::get_number_array(j, "", "times", c.times);
        c.mean_allowance = detail::get_number(j, "", "mean_allowance", c.mean_allowance);
        c.draws = detail::get_integer(j, "", "draws", c.draws);
        c.trajectories = detail::get_integer(j, "", "trajectories", c.trajectories);
        c.sampler_t = detail::get_number(j, "", "sampler_t", c.sampler_t);
        c.n_list = detail::get_number_array(j, "", "n_list", c.n_list);
        c.gap_t = detail::get_number(j, "", "gap_t", c.gap_t);
        c.gap_allowance = detail::get_number(j, "", "gap_allowance", c.gap_allowance);
        c.q = detail::get_number(j, "", "q", c.q);
        c.gammas = detail::get_number_array(j, "", "gammas", c.gammas);
        c.cs = detail::get_number_array(j, "", "cs", c.cs);
        c.gronwall_T = detail::get_number(j, "", "gronwall_T", c.gronwall_T);
        c.gronwall_points =
            static_cast<int>(detail::get_integer(j, "", "gronwall_points", c.gronwall_points));
        c.validate();
        return c;
    }

    json to_json() const {
        json j;
        j["experiment"] = experiment;
        j["seed"] = seed;
        j["replicas"] = replicas;
        j["workers"] = workers;
        j["out"] = out;
        j["model"] = {{"alpha", model.alpha},
                      {"beta", model.beta},
                      {"n", model.n},
                      {"eps_jump", model.eps_jump},
                      {"dt", model.dt},
                      {"horizon", model.horizon},
                      {"sink_factor", model.sink_factor},
                      {"grid",
                       {{"left", model.grid.left},
                        {"right", model.grid.right},
                        {"cells", model.grid.cells}}}};
        j["phi"] = {{"shape", "gaussian"},
                    {"center", phi.center},
                    {"width", phi.width},
                    {"mass", phi.mass}};
        j["psi"] = {{"shape", "gaussian"},
                    {"center", psi.center},
                    {"width", psi.width},
                    {"mass", psi.mass}};
        j["lambdas"] = lambdas;
        j["noise_t"] = noise_t;
        j["noise_area"] = noise_area;
        j["times"] = times;
        j["mean_allowance"] = mean_allowance;
        j["draws"] = draws;
        j["trajectories"] = trajectories;
        j["sampler_t"] = sampler_t;
        j["n_list"] = n_list;
        j["gap_t"] = gap_t;
        j["gap_allowance"] = gap_allowance;
        j["q"] = q;
        j["gammas"] = gammas;
        j["cs"] = cs;
        j["gronwall_T"] = gronwall_T;
        j["gronwall_points"] = gronwall_points;
        return j;
    }

    static ExperimentConfig parse_text(const std::string& text) {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config: malformed JSON: ") + e.what());
        }
        // A run manifest is accepted in place of a config: re-running a
        // manifest re-runs the config it echoes.  "config" is never a valid
        // config key, so its presence alone identifies a manifest.
        if (j.is_object() && j.contains("config") && j["config"].is_object())
            j = j["config"];
        return from_json(j);
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str());
    }
};

}  // namespace shelab
