#include "hrv/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hrv {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

Vec2 parse_vec2(const json& j, const std::string& name) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(name + " must be a 2-element array");
    return {j[0].get<double>(), j[1].get<double>()};
}

Mat2 parse_mat2(const json& j, const std::string& name) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
        !j[1].is_array() || j[1].size() != 2)
        throw ConfigError(name + " must be a 2x2 array");
    return {j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(),
            j[1][1].get<double>()};
}

Blocks parse_blocks(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("blocks must hold two classes");
    Blocks blocks;
    blocks.first.clear();
    blocks.second.clear();
    for (const auto& v : j[0]) blocks.first.push_back(v.get<int>() - 1);  // config is 1-based
    for (const auto& v : j[1]) blocks.second.push_back(v.get<int>() - 1);
    return blocks;
}

ModelSpec parse_model(const json& root) {
    ModelSpec spec;
    const std::string family = root.at("family").get<std::string>();
    if (family == "log_gaussian") {
        require_keys(root, {"family", "m", "C", "blocks", "seed", "simulation", "renewal"},
                     "config");
        LogGaussianParams p;
        p.m = parse_vec2(root.at("m"), "m");
        p.C = parse_mat2(root.at("C"), "C");
        spec.family = Family::LogGaussian;
        spec.params = p;
    } else if (family == "ccc_garch") {
        require_keys(root, {"family", "a", "b", "c", "eta", "blocks", "seed", "simulation",
                            "renewal"},
                     "config");
        CccGarchParams p;
        p.a = parse_vec2(root.at("a"), "a");
        p.b = parse_vec2(root.at("b"), "b");
        p.c = parse_vec2(root.at("c"), "c");
        p.eta = root.at("eta").get<double>();
        spec.family = Family::CccGarch;
        spec.params = p;
    } else if (family == "bekk_diag") {
        require_keys(root, {"family", "lags", "Cov", "blocks", "seed", "simulation", "renewal"},
                     "config");
        BekkDiagParams p;
        for (const auto& lag : root.at("lags")) p.lags.push_back(parse_vec2(lag, "lags entry"));
        p.cov = parse_mat2(root.at("Cov"), "Cov");
        spec.family = Family::BekkDiag;
        spec.params = p;
    } else {
        throw ConfigError("unknown family '" + family + "'");
    }
    spec.dim = 2;
    if (root.contains("blocks")) spec.blocks = parse_blocks(root.at("blocks"));
    spec.validate();
    return spec;
}

RenewalConfig parse_renewal(const json& j) {
    require_keys(j, {"mean", "cov", "signs", "declared_group", "region", "offsets", "t_grid",
                     "n_paths"},
                 "renewal");
    RenewalConfig rc;
    rc.increments.mean = parse_vec2(j.at("mean"), "renewal.mean");
    rc.increments.cov = parse_mat2(j.at("cov"), "renewal.cov");
    if (j.contains("signs")) {
        for (const auto& s : j.at("signs")) {
            require_keys(s, {"pattern", "p"}, "renewal.signs entry");
            SignAtom atom;
            atom.pattern = {s.at("pattern")[0].get<int>(), s.at("pattern")[1].get<int>()};
            atom.prob = s.at("p").get<double>();
            rc.increments.sign_law.push_back(atom);
        }
    }
    if (j.contains("declared_group"))
        for (const auto& g : j.at("declared_group"))
            rc.increments.declared_group.push_back({g[0].get<int>(), g[1].get<int>()});
    if (j.contains("region")) {
        const auto& r = j.at("region");
        if (!r.is_array() || r.size() != 4)
            throw ConfigError("renewal.region must be [lo1, hi1, lo2, hi2]");
        rc.region = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                     r[3].get<double>()};
    }
    if (j.contains("offsets")) rc.offsets = j.at("offsets").get<std::vector<double>>();
    if (j.contains("t_grid")) rc.t_grid = j.at("t_grid").get<std::vector<double>>();
    if (j.contains("n_paths")) rc.n_paths = j.at("n_paths").get<std::uint64_t>();
    rc.increments.validate();
    return rc;
}

}  // namespace

AppConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    AppConfig cfg;
    if (root.contains("family")) {
        cfg.model = parse_model(root);
    } else {
        require_keys(root, {"seed", "simulation", "renewal"}, "config");
    }
    if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
    if (root.contains("simulation")) {
        const json& sim = root.at("simulation");
        require_keys(sim, {"burn_in", "thinning", "n_samples"}, "simulation");
        if (sim.contains("burn_in")) cfg.burn_in = sim.at("burn_in").get<std::int64_t>();
        if (sim.contains("thinning")) cfg.thinning = sim.at("thinning").get<std::int64_t>();
        if (sim.contains("n_samples")) cfg.n_samples = sim.at("n_samples").get<std::int64_t>();
    }
    if (root.contains("renewal")) cfg.renewal = parse_renewal(root.at("renewal"));
    return cfg;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace hrv
