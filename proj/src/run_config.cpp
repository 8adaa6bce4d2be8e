#include "oomcraft/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "oomcraft/io_formats.hpp"

namespace oomcraft {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"sim",
         {"system", "beta", "dt", "n_steps", "n_traj", "substeps", "seed", "init_lo", "init_hi",
          "burn_in"}},
        {"learner",
         {"mode", "L", "m", "D1", "D2", "svd_floor", "seed", "bandwidth_scale", "window_stride",
          "center_pool", "bins", "box_lo", "box_hi"}},
        {"plan",
         {"figure", "budget", "repeats", "T_grid", "estimators", "seed", "threads", "tica_lag",
          "oracle_steps", "coarse_bins"}},
    };
    return keys;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : value) {
        if (c == ',') {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(strip(cur));
    return out;
}

} // namespace

void RunConfig::validate_key(const std::string& section, const std::string& key) {
    auto sec = known_keys().find(section);
    if (sec == known_keys().end())
        throw InvalidInputError("unknown config section [" + section + "]");
    if (sec->second.find(key) == sec->second.end())
        throw InvalidInputError("unknown config key '" + key + "' in section [" + section + "]");
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    RunConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string text = strip(line);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw InvalidInputError(path.string() + ":" + std::to_string(lineno) +
                                        ": malformed section header");
            section = strip(text.substr(1, text.size() - 2));
            if (known_keys().find(section) == known_keys().end())
                throw InvalidInputError(path.string() + ":" + std::to_string(lineno) +
                                        ": unknown config section [" + section + "]");
            continue;
        }
        std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw InvalidInputError(path.string() + ":" + std::to_string(lineno) +
                                    ": expected key = value");
        if (section.empty())
            throw InvalidInputError(path.string() + ":" + std::to_string(lineno) +
                                    ": key outside any section");
        cfg.set(section, strip(text.substr(0, eq)), strip(text.substr(eq + 1)));
    }
    return cfg;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    validate_key(section, key);
    values_[section][key] = value;
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
    auto sec = values_.find(section);
    return sec != values_.end() && sec->second.find(key) != sec->second.end();
}

std::string RunConfig::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    auto sec = values_.find(section);
    if (sec == values_.end()) return fallback;
    auto it = sec->second.find(key);
    return it == sec->second.end() ? fallback : it->second;
}

double RunConfig::get_real(const std::string& section, const std::string& key,
                           double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_real(get_string(section, key, ""), "config " + section + "." + key);
}

long RunConfig::get_long(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_string(section, key, "");
    try {
        std::size_t used = 0;
        long out = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw InvalidInputError("config " + section + "." + key + ": bad integer '" + v + "'");
    }
}

SystemId system_from_name(const std::string& name) {
    if (name == "1d") return SystemId::Wells1D;
    if (name == "2d") return SystemId::Mixture2D;
    throw InvalidInputError("unknown system '" + name + "' (expected 1d or 2d)");
}

SimConfig build_sim_config(const RunConfig& cfg, SystemId system) {
    SimConfig sim;
    if (system == SystemId::Wells1D) {
        sim.beta = cfg.get_real("sim", "beta", 0.3);
        sim.dt = cfg.get_real("sim", "dt", 0.002);
        sim.init_lo = Vector::Constant(1, cfg.get_real("sim", "init_lo", 0.0));
        sim.init_hi = Vector::Constant(1, cfg.get_real("sim", "init_hi", 0.2));
    } else {
        sim.beta = cfg.get_real("sim", "beta", 2.0);
        sim.dt = cfg.get_real("sim", "dt", 0.01);
        auto los = split_list(cfg.get_string("sim", "init_lo", "-2,-2"));
        auto his = split_list(cfg.get_string("sim", "init_hi", "0,0"));
        if (los.size() != 2 || his.size() != 2)
            throw InvalidInputError("config sim.init_lo/init_hi need 2 components for system 2d");
        sim.init_lo = Vector(2);
        sim.init_hi = Vector(2);
        for (int j = 0; j < 2; ++j) {
            sim.init_lo(j) = parse_real(los[static_cast<std::size_t>(j)], "config sim.init_lo");
            sim.init_hi(j) = parse_real(his[static_cast<std::size_t>(j)], "config sim.init_hi");
        }
    }
    sim.n_steps = cfg.get_long("sim", "n_steps", 1000);
    sim.n_traj = static_cast<int>(cfg.get_long("sim", "n_traj", 100));
    sim.substeps = static_cast<int>(cfg.get_long("sim", "substeps", 1));
    sim.burn_in = cfg.get_long("sim", "burn_in", 0);
    sim.seed = static_cast<std::uint64_t>(cfg.get_long("sim", "seed", 0));
    return sim;
}

LearnerConfig build_learner_config(const RunConfig& cfg) {
    LearnerConfig l;
    l.order = static_cast<int>(cfg.get_long("learner", "L", 3));
    l.m = static_cast<int>(cfg.get_long("learner", "m", 10));
    l.d1 = static_cast<int>(cfg.get_long("learner", "D1", 100));
    l.d2 = static_cast<int>(cfg.get_long("learner", "D2", 100));
    l.svd_floor = cfg.get_real("learner", "svd_floor", 1e-10);
    l.seed = static_cast<std::uint64_t>(cfg.get_long("learner", "seed", 0));
    l.bandwidth_scale = cfg.get_real("learner", "bandwidth_scale", 1.0);
    l.window_stride = cfg.get_long("learner", "window_stride", 1);
    l.center_pool = cfg.get_long("learner", "center_pool", 4096);
    return l;
}

ExperimentPlan build_plan(const RunConfig& cfg, const std::string& figure) {
    ExperimentPlan plan;
    plan.budget = cfg.get_long("plan", "budget", 100000);
    plan.repeats = static_cast<int>(cfg.get_long("plan", "repeats", 30));
    plan.seed = static_cast<std::uint64_t>(cfg.get_long("plan", "seed", 0));
    plan.threads = static_cast<int>(cfg.get_long("plan", "threads", 0));
    plan.tica_lag = cfg.get_long("plan", "tica_lag", 100);
    plan.oracle_steps = cfg.get_long("plan", "oracle_steps", 10000000);
    plan.coarse_bins = static_cast<int>(cfg.get_long("plan", "coarse_bins", 100));
    plan.learner = build_learner_config(cfg);
    plan.discrete_learner = plan.learner;
    // a 2-symbol alphabet at L=3 caps the usable model dimension at K^L = 8
    plan.discrete_learner.m = std::min(plan.discrete_learner.m, 4);
    // benchmark-calibrated binless settings unless set explicitly: past
    // m ~ 7 the trailing singular directions of C12 are noise at these
    // data sizes, and slightly wider kernels stabilize the small-T fits
    if (!cfg.has("learner", "m")) plan.learner.m = 7;
    if (!cfg.has("learner", "bandwidth_scale")) plan.learner.bandwidth_scale = std::sqrt(2.5);

    std::string default_grid = "50,100,200,300,500,1000";
    if (figure == "2b") {
        plan.benchmark = BenchmarkId::Wells1D;
        plan.estimators = {EstimatorKind::PlainOom, EstimatorKind::EqOom, EstimatorKind::Empirical};
    } else if (figure == "2c") {
        plan.benchmark = BenchmarkId::Wells1D;
        plan.estimators = {EstimatorKind::Binless, EstimatorKind::Empirical};
    } else if (figure == "2d") {
        plan.benchmark = BenchmarkId::Wells1D;
        plan.estimators = {EstimatorKind::Binless, EstimatorKind::Empirical};
        default_grid = "50";
    } else if (figure == "3b") {
        plan.benchmark = BenchmarkId::Tica2D;
        plan.estimators = {EstimatorKind::Binless, EstimatorKind::Empirical};
        default_grid = "200,500,1000,2500";
    } else {
        throw InvalidInputError("unknown figure '" + figure + "' (expected 2b, 2c, 2d or 3b)");
    }

    plan.t_grid.clear();
    for (const std::string& tok : split_list(cfg.get_string("plan", "T_grid", default_grid))) {
        if (tok.empty()) continue;
        long t = 0;
        try {
            std::size_t used = 0;
            t = std::stol(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InvalidInputError("config plan.T_grid: bad entry '" + tok + "'");
        }
        plan.t_grid.push_back(t);
    }
    if (cfg.has("plan", "estimators")) {
        plan.estimators.clear();
        for (const std::string& name : split_list(cfg.get_string("plan", "estimators", "")))
            if (!name.empty()) plan.estimators.push_back(estimator_from_name(name));
    }
    return plan;
}

} // namespace oomcraft
