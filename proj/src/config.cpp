#include "stab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stab/csv.hpp"

namespace stab {

namespace {

using nlohmann::json;

// Strict object walker: every key must be consumed, anything left over is a
// config typo and gets named in the error.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path, std::vector<std::string>* notes)
        : j_(j), path_(std::move(path)), notes_(notes) {
        if (!j_.is_object()) throw ConfigError(path_ + " must be a JSON object");
    }

    const json* find(const std::string& key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double fallback) {
        if (const json* v = find(key)) return as_number(*v, key);
        note(key, format_g9(fallback));
        return fallback;
    }

    double require_number(const std::string& key) {
        const json* v = find(key);
        if (!v) throw ConfigError(path_ + "." + key + " is required");
        return as_number(*v, key);
    }

    int integer(const std::string& key, int fallback) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer())
                throw ConfigError(path_ + "." + key + " must be an integer");
            return v->get<int>();
        }
        note(key, std::to_string(fallback));
        return fallback;
    }

    bool boolean(const std::string& key, bool fallback) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(path_ + "." + key + " must be a boolean");
            return v->get<bool>();
        }
        note(key, fallback ? "true" : "false");
        return fallback;
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(path_ + "." + key + " must be a string");
            return v->get<std::string>();
        }
        note(key, "\"" + fallback + "\"");
        return fallback;
    }

    std::pair<double, double> number_pair(const std::string& key,
                                          std::pair<double, double> fallback) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != 2)
                throw ConfigError(path_ + "." + key + " must be an array of two numbers");
            return {as_number((*v)[0], key), as_number((*v)[1], key)};
        }
        note(key, "[" + format_g9(fallback.first) + ", " + format_g9(fallback.second) + "]");
        return fallback;
    }

    std::pair<int, int> integer_pair(const std::string& key, std::pair<int, int> fallback) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() ||
                !(*v)[1].is_number_integer())
                throw ConfigError(path_ + "." + key + " must be an array of two integers");
            return {(*v)[0].get<int>(), (*v)[1].get<int>()};
        }
        note(key, "[" + std::to_string(fallback.first) + ", " +
                      std::to_string(fallback.second) + "]");
        return fallback;
    }

    std::array<double, 3> number_triple(const std::string& key,
                                        const std::array<double, 3>& fallback) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != 3)
                throw ConfigError(path_ + "." + key + " must be an array of three numbers");
            return {as_number((*v)[0], key), as_number((*v)[1], key), as_number((*v)[2], key)};
        }
        note(key, "[" + format_g9(fallback[0]) + ", " + format_g9(fallback[1]) + ", " +
                      format_g9(fallback[2]) + "]");
        return fallback;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            (void)value;
            if (!used_.count(key))
                throw ConfigError("unknown key '" + key + "' in " + path_ +
                                  " (keys are checked strictly; fix the typo or remove it)");
        }
    }

private:
    double as_number(const json& v, const std::string& key) const {
        if (!v.is_number()) throw ConfigError(path_ + "." + key + " must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(path_ + "." + key + " must be finite");
        return d;
    }

    void note(const std::string& key, const std::string& value) {
        if (notes_) notes_->push_back(path_ + "." + key + " = " + value + " (default)");
    }

    const json& j_;
    std::string path_;
    std::vector<std::string>* notes_;
    std::set<std::string> used_;
};

ReducedCoefficients parse_reduced(const json& j, const std::string& source,
                                  std::vector<std::string>* notes) {
    ObjectReader r(j, source + ".reduced", notes);
    ReducedCoefficients c;
    c.gravity_amplitude = r.require_number("gravity_amplitude");
    c.spring_const = r.require_number("spring_const");
    c.spring_cos_amp = r.require_number("spring_cos_amplitude");
    r.finish();
    return c;
}

MechanismGeometry parse_geometric(const json& j, const std::string& source,
                                  std::vector<std::string>* notes) {
    ObjectReader r(j, source + ".geometric", notes);
    MechanismGeometry g;
    g.r_f = r.number("r_f", g.r_f);
    g.base_angles = r.number_triple("base_angles", g.base_angles);
    g.platform_angles = r.number_triple("platform_angles", g.platform_angles);
    g.platform_offset = r.number("platform_offset", g.platform_offset);
    g.base_offset = r.number("base_offset", g.base_offset);
    g.h = r.number("h", g.h);
    g.cg_lever = r.number("cg_lever", g.cg_lever);
    g.w = r.number("w", g.w);
    g.l_o = r.number("l_o", g.l_o);
    g.tension_only = r.boolean("tension_only", g.tension_only);
    r.finish();
    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source + ".geometric: " + e.what());
    }
    return g;
}

ReducedCoefficients parse_fit_reference(const json& j, const std::string& source,
                                        std::vector<std::string>* notes) {
    ObjectReader r(j, source + ".fit_reference", notes);
    ReducedCoefficients ref;
    ref.gravity_amplitude = r.number("gravity_amplitude", ref.gravity_amplitude);
    ref.spring_const = r.number("spring_const", ref.spring_const);
    ref.spring_cos_amp = r.number("spring_cos_amplitude", ref.spring_cos_amp);
    r.finish();
    return ref;
}

void validate_range(std::pair<double, double> range, const std::string& name) {
    if (!(range.first < range.second))
        throw ConfigError(name + " must satisfy lo < hi");
}

}  // namespace

AnalysisConfig parse_config(const std::string& text, const std::string& source_name,
                            std::vector<std::string>* default_notes) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source_name + ": " + e.what());
    }

    AnalysisConfig cfg;
    ObjectReader r(j, source_name, default_notes);

    const json* reduced = r.find("reduced");
    const json* geometric = r.find("geometric");
    if (reduced && geometric)
        throw ConfigError(source_name +
                          ": both 'reduced' and 'geometric' present; exactly one backend "
                          "must be selected");
    if (!reduced && !geometric)
        throw ConfigError(source_name + ": select a backend with 'reduced' or 'geometric'");
    if (reduced) cfg.reduced = parse_reduced(*reduced, source_name, default_notes);
    if (geometric) cfg.geometric = parse_geometric(*geometric, source_name, default_notes);

    const json* k_single = r.find("k");
    const json* k_list = r.find("k_list");
    if (k_single && k_list)
        throw ConfigError(source_name + ": set 'k' or 'k_list', not both");
    if (!k_single && !k_list)
        throw ConfigError(source_name + ": a stiffness is required; set 'k' or 'k_list'");
    if (k_single) {
        if (!k_single->is_number()) throw ConfigError(source_name + ".k must be a number");
        cfg.k_list = {k_single->get<double>()};
    } else {
        if (!k_list->is_array() || k_list->empty())
            throw ConfigError(source_name + ".k_list must be a non-empty array of numbers");
        for (const json& v : *k_list) {
            if (!v.is_number())
                throw ConfigError(source_name + ".k_list must contain only numbers");
            cfg.k_list.push_back(v.get<double>());
        }
    }
    for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
        if (!std::isfinite(cfg.k_list[i]) || cfg.k_list[i] <= 0.0)
            throw ConfigError(source_name + ": k must be > 0 (entry " + std::to_string(i) +
                              " is " + format_g9(cfg.k_list[i]) + ")");
    }
    std::sort(cfg.k_list.begin(), cfg.k_list.end());
    if (std::adjacent_find(cfg.k_list.begin(), cfg.k_list.end()) != cfg.k_list.end())
        throw ConfigError(source_name + ": k_list contains duplicate values");

    cfg.beta_range = r.number_pair("beta_range", cfg.beta_range);
    validate_range(cfg.beta_range, source_name + ".beta_range");
    cfg.alpha_range = r.number_pair("alpha_range", cfg.alpha_range);
    validate_range(cfg.alpha_range, source_name + ".alpha_range");

    cfg.beta_max = r.number("beta_max", cfg.beta_max);
    if (cfg.beta_max <= 0.0) throw ConfigError(source_name + ".beta_max must be > 0");

    if (const json* tol = r.find("tolerances")) {
        ObjectReader tr(*tol, source_name + ".tolerances", default_notes);
        cfg.tolerances.grad_tol = tr.number("grad_tol", cfg.tolerances.grad_tol);
        cfg.tolerances.eig_tol = tr.number("eig_tol", cfg.tolerances.eig_tol);
        tr.finish();
    } else if (default_notes) {
        default_notes->push_back(source_name + ".tolerances = {grad_tol = 1e-09, eig_tol = 1e-09} (default)");
    }
    if (cfg.tolerances.grad_tol <= 0.0)
        throw ConfigError(source_name + ".tolerances.grad_tol must be > 0");
    if (cfg.tolerances.eig_tol <= 0.0)
        throw ConfigError(source_name + ".tolerances.eig_tol must be > 0");

    cfg.n_seeds = r.integer("n_seeds", cfg.n_seeds);
    if (cfg.n_seeds < 8) throw ConfigError(source_name + ".n_seeds must be >= 8");
    cfg.landscape_points = r.integer("landscape_points", cfg.landscape_points);
    if (cfg.landscape_points < 2)
        throw ConfigError(source_name + ".landscape_points must be >= 2");
    cfg.grid = r.integer_pair("grid", cfg.grid);
    if (cfg.grid.first < 8 || cfg.grid.second < 8)
        throw ConfigError(source_name + ".grid must be at least [8, 8]");

    cfg.beta_tol = r.number("beta_tol", cfg.beta_tol);
    if (cfg.beta_tol <= 0.0) throw ConfigError(source_name + ".beta_tol must be > 0");
    cfg.k_bracket = r.number_pair("k_bracket", cfg.k_bracket);
    if (!(0.0 < cfg.k_bracket.first && cfg.k_bracket.first < cfg.k_bracket.second))
        throw ConfigError(source_name + ".k_bracket must satisfy 0 < lo < hi");
    cfg.fit_samples = r.integer("fit_samples", cfg.fit_samples);
    if (cfg.fit_samples < 3) throw ConfigError(source_name + ".fit_samples must be >= 3");

    if (const json* ref = r.find("fit_reference")) {
        cfg.fit_reference = parse_fit_reference(*ref, source_name, default_notes);
    } else if (default_notes) {
        default_notes->push_back(source_name +
                                 ".fit_reference = {35.2, 312.8, 50.82} (default)");
    }

    cfg.out_dir = r.text("out_dir", cfg.out_dir);
    r.finish();
    return cfg;
}

AnalysisConfig load_config(const std::filesystem::path& path,
                           std::vector<std::string>* default_notes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.filename().string(), default_notes);
}

std::string config_to_json(const AnalysisConfig& cfg) {
    json j;
    if (cfg.reduced) {
        j["reduced"] = {{"gravity_amplitude", cfg.reduced->gravity_amplitude},
                        {"spring_const", cfg.reduced->spring_const},
                        {"spring_cos_amplitude", cfg.reduced->spring_cos_amp}};
    } else if (cfg.geometric) {
        const MechanismGeometry& g = *cfg.geometric;
        j["geometric"] = {{"r_f", g.r_f},
                          {"base_angles", g.base_angles},
                          {"platform_angles", g.platform_angles},
                          {"platform_offset", g.platform_offset},
                          {"base_offset", g.base_offset},
                          {"h", g.h},
                          {"cg_lever", g.cg_lever},
                          {"w", g.w},
                          {"l_o", g.l_o},
                          {"tension_only", g.tension_only}};
    }
    j["k_list"] = cfg.k_list;
    j["beta_range"] = {cfg.beta_range.first, cfg.beta_range.second};
    j["alpha_range"] = {cfg.alpha_range.first, cfg.alpha_range.second};
    j["beta_max"] = cfg.beta_max;
    j["tolerances"] = {{"grad_tol", cfg.tolerances.grad_tol},
                       {"eig_tol", cfg.tolerances.eig_tol}};
    j["n_seeds"] = cfg.n_seeds;
    j["landscape_points"] = cfg.landscape_points;
    j["grid"] = {cfg.grid.first, cfg.grid.second};
    j["beta_tol"] = cfg.beta_tol;
    j["k_bracket"] = {cfg.k_bracket.first, cfg.k_bracket.second};
    j["fit_samples"] = cfg.fit_samples;
    j["fit_reference"] = {{"gravity_amplitude", cfg.fit_reference.gravity_amplitude},
                          {"spring_const", cfg.fit_reference.spring_const},
                          {"spring_cos_amplitude", cfg.fit_reference.spring_cos_amp}};
    j["out_dir"] = cfg.out_dir;
    return j.dump(2) + "\n";
}

void write_config(const AnalysisConfig& cfg, const std::filesystem::path& path) {
    write_text_atomic(path, config_to_json(cfg));
}

EnergyModel make_model(const AnalysisConfig& cfg, double k) {
    if (cfg.reduced) return ReducedModel{*cfg.reduced, k};
    return GeometricModel{*cfg.geometric, k};
}

std::string describe(const AnalysisConfig& cfg) {
    std::ostringstream out;
    if (cfg.reduced) {
        out << "backend: reduced (A = " << format_g9(cfg.reduced->gravity_amplitude)
            << " N*mm, B = " << format_g9(cfg.reduced->spring_const)
            << " mm^2, C = " << format_g9(cfg.reduced->spring_cos_amp) << " mm^2)\n";
    } else {
        const MechanismGeometry& g = *cfg.geometric;
        out << "backend: geometric (r_f = " << format_g9(g.r_f)
            << " mm, offsets = " << format_g9(g.platform_offset) << "/"
            << format_g9(g.base_offset) << " mm, h = " << format_g9(g.h)
            << ", cg_lever = " << format_g9(g.cg_lever) << " mm, w = " << format_g9(g.w)
            << " N, l_o = " << format_g9(g.l_o) << " mm"
            << (g.tension_only ? ", tension-only" : "") << ")\n";
    }
    out << "k values (N/mm):";
    for (double k : cfg.k_list) out << " " << format_g9(k);
    out << "\n";
    out << "beta_range = [" << format_g9(cfg.beta_range.first) << ", "
        << format_g9(cfg.beta_range.second) << "] rad, beta_max = " << format_g9(cfg.beta_max)
        << " rad\n";
    out << "grad_tol = " << format_g9(cfg.tolerances.grad_tol)
        << ", eig_tol = " << format_g9(cfg.tolerances.eig_tol)
        << ", n_seeds = " << cfg.n_seeds << "\n";
    return out.str();
}

}  // namespace stab
