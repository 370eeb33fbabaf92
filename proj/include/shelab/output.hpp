#pragma once

// Artifact serialization: fixed-schema CSV per experiment, JSON for reports,
// and the run manifest.  CSV numbers are printed with %.17g so identical
// runs produce identical bytes and values survive a parse round trip; CSV
// content never includes timing or anything else that varies between
// identical runs.

#include <cstdio>
#include <sstream>
#include <string>

#include "shelab/config.hpp"
#include "shelab/harness.hpp"
#include "shelab/version.hpp"

namespace shelab {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline const char* csv_bool(bool b) { return b ? "true" : "false"; }

// --- JSON serialization (ADL hooks for nlohmann) ---------------------------

inline void to_json(json& j, const MCSummary& s) {
    j = json{{"estimate", s.estimate},
             {"std_error", s.std_error},
             {"replicas", s.replicas},
             {"aborted", s.aborted},
             {"seed", s.seed}};
}
inline void from_json(const json& j, MCSummary& s) {
    j.at("estimate").get_to(s.estimate);
    j.at("std_error").get_to(s.std_error);
    j.at("replicas").get_to(s.replicas);
    j.at("aborted").get_to(s.aborted);
    j.at("seed").get_to(s.seed);
}

inline void to_json(json& j, const CheckLine& c) {
    j = json{{"name", c.name},
             {"value", c.value},
             {"threshold", c.threshold},
             {"pass", c.pass},
             {"detail", c.detail}};
}
inline void from_json(const json& j, CheckLine& c) {
    j.at("name").get_to(c.name);
    j.at("value").get_to(c.value);
    j.at("threshold").get_to(c.threshold);
    j.at("pass").get_to(c.pass);
    j.at("detail").get_to(c.detail);
}

inline void to_json(json& j, const NoiseCheckRow& r) {
    j = json{{"lambda", r.lambda},   {"empirical", r.empirical},
             {"target", r.target},   {"se", r.se},
             {"bias_bound", r.bias_bound}, {"pass", r.pass}};
}
inline void from_json(const json& j, NoiseCheckRow& r) {
    j.at("lambda").get_to(r.lambda);
    j.at("empirical").get_to(r.empirical);
    j.at("target").get_to(r.target);
    j.at("se").get_to(r.se);
    j.at("bias_bound").get_to(r.bias_bound);
    j.at("pass").get_to(r.pass);
}
inline void to_json(json& j, const NoiseCheckReport& r) {
    j = json{{"rows", r.rows}, {"replicas", r.replicas}, {"pass", r.pass}};
}
inline void from_json(const json& j, NoiseCheckReport& r) {
    j.at("rows").get_to(r.rows);
    j.at("replicas").get_to(r.replicas);
    j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const MeanFieldRow& r) {
    j = json{{"time", r.time},
             {"sup_abs_dev", r.sup_abs_dev},
             {"max_se", r.max_se},
             {"worst_x", r.worst_x},
             {"violations", r.violations},
             {"pass", r.pass}};
}
inline void from_json(const json& j, MeanFieldRow& r) {
    j.at("time").get_to(r.time);
    j.at("sup_abs_dev").get_to(r.sup_abs_dev);
    j.at("max_se").get_to(r.max_se);
    j.at("worst_x").get_to(r.worst_x);
    j.at("violations").get_to(r.violations);
    j.at("pass").get_to(r.pass);
}
inline void to_json(json& j, const MeanFieldReport& r) {
    j = json{{"rows", r.rows},
             {"replicas", r.replicas},
             {"aborted", r.aborted},
             {"max_clamp_fraction", r.max_clamp_fraction},
             {"pass", r.pass}};
}
inline void from_json(const json& j, MeanFieldReport& r) {
    j.at("rows").get_to(r.rows);
    j.at("replicas").get_to(r.replicas);
    j.at("aborted").get_to(r.aborted);
    j.at("max_clamp_fraction").get_to(r.max_clamp_fraction);
    j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const PdeConvergenceReport& r) {
    j = json{{"checks", r.checks}, {"pass", r.pass}};
}
inline void from_json(const json& j, PdeConvergenceReport& r) {
    j.at("checks").get_to(r.checks);
    j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const SamplerCheckReport& r) {
    j = json{{"checks", r.checks}, {"pass", r.pass}};
}
inline void from_json(const json& j, SamplerCheckReport& r) {
    j.at("checks").get_to(r.checks);
    j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const GapRow& r) {
    j = json{{"n", r.n},
             {"y_estimate", r.y_estimate},
             {"y_se", r.y_se},
             {"z_estimate", r.z_estimate},
             {"z_se", r.z_se},
             {"gap", r.gap},
             {"combined_se", r.combined_se},
             {"theory_scale", r.theory_scale},
             {"pass", r.pass}};
}
inline void from_json(const json& j, GapRow& r) {
    j.at("n").get_to(r.n);
    j.at("y_estimate").get_to(r.y_estimate);
    j.at("y_se").get_to(r.y_se);
    j.at("z_estimate").get_to(r.z_estimate);
    j.at("z_se").get_to(r.z_se);
    j.at("gap").get_to(r.gap);
    j.at("combined_se").get_to(r.combined_se);
    j.at("theory_scale").get_to(r.theory_scale);
    j.at("pass").get_to(r.pass);
}
inline void to_json(json& j, const GapExperimentReport& r) {
    j = json{{"rows", r.rows},
             {"y_summary", r.y_summary},
             {"y_aborted", r.y_aborted},
             {"monotone_within_ci", r.monotone_within_ci},
             {"pass", r.pass}};
}
inline void from_json(const json& j, GapExperimentReport& r) {
    j.at("rows").get_to(r.rows);
    j.at("y_summary").get_to(r.y_summary);
    j.at("y_aborted").get_to(r.y_aborted);
    j.at("monotone_within_ci").get_to(r.monotone_within_ci);
    j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const MartingaleRow& r) {
    j = json{{"time", r.time},
             {"residual_mean", r.residual_mean},
             {"residual_se", r.residual_se},
             {"zscore", r.zscore},
             {"qmoment_max", r.qmoment_max},
             {"envelope", r.envelope},
             {"pass", r.pass}};
}
inline void from_json(const json& j, MartingaleRow& r) {
    j.at("time").get_to(r.time);
    j.at("residual_mean").get_to(r.residual_mean);
    j.at("residual_se").get_to(r.residual_se);
    j.at("zscore").get_to(r.zscore);
    j.at("qmoment_max").get_to(r.qmoment_max);
    j.at("envelope").get_to(r.envelope);
    j.at("pass").get_to(r.pass);
}
inline void to_json(json& j, const MomentMartingaleReport& r) {
    j = json{{"rows", r.rows},
             {"envelope_c1", r.envelope_c1},
             {"envelope_c2", r.envelope_c2},
             {"t0_qmoment_error", r.t0_qmoment_error},
             {"replicas", r.replicas},
             {"aborted", r.aborted},
             {"pass", r.pass}};
}
inline void from_json(const json& j, MomentMartingaleReport& r) {
    j.at("rows").get_to(r.rows);
    j.at("envelope_c1").get_to(r.envelope_c1);
    j.at("envelope_c2").get_to(r.envelope_c2);
    j.at("t0_qmoment_error").get_to(r.t0_qmoment_error);
    j.at("replicas").get_to(r.replicas);
    j.at("aborted").get_to(r.aborted);
    j.at("pass").get_to(r.pass);
}

inline void to_json(json& j, const GronwallRow& r) {
    j = json{{"gamma", r.gamma},
             {"c", r.c},
             {"depth", r.depth},
             {"min_log_margin", r.min_log_margin},
             {"pass", r.pass}};
}
inline void from_json(const json& j, GronwallRow& r) {
    j.at("gamma").get_to(r.gamma);
    j.at("c").get_to(r.c);
    j.at("depth").get_to(r.depth);
    j.at("min_log_margin").get_to(r.min_log_margin);
    j.at("pass").get_to(r.pass);
}
inline void to_json(json& j, const GronwallReport& r) {
    j = json{{"rows", r.rows}, {"pass", r.pass}};
}
inline void from_json(const json& j, GronwallReport& r) {
    j.at("rows").get_to(r.rows);
    j.at("pass").get_to(r.pass);
}

// --- CSV writers -----------------------------------------------------------

inline std::string to_csv(const NoiseCheckReport& r) {
    std::ostringstream s;
    s << "lambda,empirical,target,se,bias_bound,pass\n";
    for (const auto& row : r.rows)
        s << fmt17(row.lambda) << ',' << fmt17(row.empirical) << ',' << fmt17(row.target)
          << ',' << fmt17(row.se) << ',' << fmt17(row.bias_bound) << ','
          << csv_bool(row.pass) << '\n';
    return s.str();
}

inline std::string to_csv(const MeanFieldReport& r) {
    std::ostringstream s;
    s << "time,sup_abs_dev,max_se,worst_x,violations,pass\n";
    for (const auto& row : r.rows)
        s << fmt17(row.time) << ',' << fmt17(row.sup_abs_dev) << ',' << fmt17(row.max_se)
          << ',' << fmt17(row.worst_x) << ',' << row.violations << ','
          << csv_bool(row.pass) << '\n';
    return s.str();
}

inline std::string checks_csv(const std::vector<CheckLine>& checks) {
    std::ostringstream s;
    s << "name,value,threshold,pass\n";
    for (const auto& c : checks)
        s << c.name << ',' << fmt17(c.value) << ',' << fmt17(c.threshold) << ','
          << csv_bool(c.pass) << '\n';
    return s.str();
}

inline std::string to_csv(const PdeConvergenceReport& r) { return checks_csv(r.checks); }
inline std::string to_csv(const SamplerCheckReport& r) { return checks_csv(r.checks); }

inline std::string to_csv(const GapExperimentReport& r) {
    std::ostringstream s;
    s << "n,y_estimate,y_se,z_estimate,z_se,gap,combined_se,theory_scale,pass\n";
    for (const auto& row : r.rows)
        s << fmt17(row.n) << ',' << fmt17(row.y_estimate) << ',' << fmt17(row.y_se) << ','
          << fmt17(row.z_estimate) << ',' << fmt17(row.z_se) << ',' << fmt17(row.gap) << ','
          << fmt17(row.combined_se) << ',' << fmt17(row.theory_scale) << ','
          << csv_bool(row.pass) << '\n';
    return s.str();
}

inline std::string to_csv(const MomentMartingaleReport& r) {
    std::ostringstream s;
    s << "time,residual_mean,residual_se,zscore,qmoment_max,envelope,pass\n";
    for (const auto& row : r.rows)
        s << fmt17(row.time) << ',' << fmt17(row.residual_mean) << ','
          << fmt17(row.residual_se) << ',' << fmt17(row.zscore) << ','
          << fmt17(row.qmoment_max) << ',' << fmt17(row.envelope) << ','
          << csv_bool(row.pass) << '\n';
    return s.str();
}

inline std::string to_csv(const GronwallReport& r) {
    std::ostringstream s;
    s << "gamma,c,depth,min_log_margin,pass\n";
    for (const auto& row : r.rows)
        s << fmt17(row.gamma) << ',' << fmt17(row.c) << ',' << row.depth << ','
          << fmt17(row.min_log_margin) << ',' << csv_bool(row.pass) << '\n';
    return s.str();
}

// --- Run manifest ----------------------------------------------------------

inline json make_manifest(const ExperimentConfig& cfg, const json& results, bool pass,
                          double wall_seconds) {
    json m;
    m["version"] = version;
    m["experiment"] = cfg.experiment;
    m["seed"] = cfg.seed;
    m["config"] = cfg.to_json();
    m["pass"] = pass;
    m["wall_time_seconds"] = wall_seconds;
    m["results"] = results;
    return m;
}

}  // namespace shelab
