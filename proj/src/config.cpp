#include "nomadet/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nomadet/error.hpp"

namespace nomadet {

namespace {

class Fields {
public:
    Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) throw UsageError(where_ + ": expected an object");
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (const auto* v = find(key)) {
            try {
                out = v->get<T>();
            } catch (const nlohmann::json::exception& e) {
                throw UsageError(where_ + "." + key + ": " + e.what());
            }
        }
    }

    // Doubles also accept "inf" / "-inf".
    void get_real(const std::string& key, double& out) {
        const auto* v = find(key);
        if (!v) return;
        if (v->is_string()) {
            const auto s = v->get<std::string>();
            if (s == "inf") out = std::numeric_limits<double>::infinity();
            else if (s == "-inf") out = -std::numeric_limits<double>::infinity();
            else throw UsageError(where_ + "." + key + ": expected a number, got \"" + s + "\"");
            return;
        }
        get(key, out);
    }

    template <typename F>
    void get_string(const std::string& key, F&& parse) {
        std::string s;
        if (find(key)) {
            get(key, s);
            try {
                parse(s);
            } catch (const Error& e) {
                throw UsageError(where_ + "." + key + ": " + e.what());
            }
        }
    }

    const Json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string where(const std::string& key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw UsageError(where_ + ": unknown key \"" + k + "\"");
    }

private:
    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

Json real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string_view rule_name(ThresholdRule r) {
    switch (r) {
        case ThresholdRule::Heursure: return "heursure";
        case ThresholdRule::Universal: return "universal";
        case ThresholdRule::Sure: return "sure";
    }
    return "?";
}

ThresholdRule parse_rule(const std::string& s) {
    if (s == "heursure") return ThresholdRule::Heursure;
    if (s == "universal") return ThresholdRule::Universal;
    if (s == "sure") return ThresholdRule::Sure;
    throw UsageError("unknown threshold rule \"" + s + "\" (heursure, universal, sure)");
}

std::string_view fading_name(Fading f) { return f == Fading::None ? "none" : "block_rayleigh"; }

Fading parse_fading(const std::string& s) {
    if (s == "block_rayleigh") return Fading::BlockRayleigh;
    if (s == "none") return Fading::None;
    throw UsageError("unknown fading \"" + s + "\" (block_rayleigh, none)");
}

}  // namespace

Json to_json(const NomaScenario& s) {
    Json j;
    Json near = Json::array();
    for (auto m : s.near_schemes) near.push_back(scheme_name(m));
    j["near_schemes"] = near;
    j["far_scheme"] = scheme_name(s.far_scheme);
    Json p;
    if (const auto* e = std::get_if<ExplicitRatios>(&s.power)) {
        p["kind"] = "explicit";
        p["ratios"] = e->ratios;
    } else if (const auto* f = std::get_if<FpaInputs>(&s.power)) {
        p["kind"] = "fpa";
        p["gains"] = f->gains;
        p["noise_powers"] = f->noise_powers;
        p["alpha_fpc"] = f->alpha_fpc;
    } else {
        p["kind"] = "delta_fpa";
        p["alpha_fpc"] = std::get<DeltaFpa>(s.power).alpha_fpc;
    }
    j["power"] = p;
    j["snr_db_near"] = real(s.snr_db_near);
    j["delta_db"] = s.delta_db;
    j["fading"] = fading_name(s.fading);
    j["equalize"] = s.equalize;
    j["symbols_per_frame"] = s.symbols_per_frame;
    j["samples_per_symbol"] = s.samples_per_symbol;
    j["samples_per_class"] = s.samples_per_class;
    j["total_power"] = s.total_power;
    j["seed"] = s.seed;
    return j;
}

NomaScenario scenario_from_json(const Json& j) {
    NomaScenario s;
    Fields f(j, "scenario");
    if (const auto* near = f.find("near_schemes")) {
        if (!near->is_array()) throw UsageError(f.where("near_schemes") + ": expected an array of scheme names");
        s.near_schemes.clear();
        for (const auto& n : *near) {
            if (!n.is_string()) throw UsageError(f.where("near_schemes") + ": expected scheme names");
            s.near_schemes.push_back(parse_scheme(n.get<std::string>()));
        }
    }
    f.get_string("far_scheme", [&](const std::string& v) { s.far_scheme = parse_scheme(v); });
    if (const auto* p = f.find("power")) {
        Fields pf(*p, f.where("power"));
        std::string kind = "delta_fpa";
        pf.get("kind", kind);
        if (kind == "explicit") {
            ExplicitRatios e;
            pf.get("ratios", e.ratios);
            s.power = e;
        } else if (kind == "fpa") {
            FpaInputs in;
            pf.get("gains", in.gains);
            pf.get("noise_powers", in.noise_powers);
            pf.get("alpha_fpc", in.alpha_fpc);
            s.power = in;
        } else if (kind == "delta_fpa") {
            DeltaFpa d;
            pf.get("alpha_fpc", d.alpha_fpc);
            s.power = d;
        } else {
            throw UsageError(pf.where("kind") + ": unknown power kind \"" + kind + "\" (explicit, fpa, delta_fpa)");
        }
        pf.finish();
    }
    f.get_real("snr_db_near", s.snr_db_near);
    f.get_real("delta_db", s.delta_db);
    f.get_string("fading", [&](const std::string& v) { s.fading = parse_fading(v); });
    f.get("equalize", s.equalize);
    f.get("symbols_per_frame", s.symbols_per_frame);
    f.get("samples_per_symbol", s.samples_per_symbol);
    f.get("samples_per_class", s.samples_per_class);
    f.get_real("total_power", s.total_power);
    f.get("seed", s.seed);
    f.finish();
    return s;
}

Json to_json(const WaveletSpec& w) {
    Json j;
    j["family"] = w.family;
    j["level"] = w.level;
    j["rule"] = rule_name(w.rule);
    j["type"] = w.type == ThresholdType::Soft ? "soft" : "hard";
    return j;
}

WaveletSpec wavelet_from_json(const Json& j) {
    WaveletSpec w;
    Fields f(j, "wavelet");
    f.get("family", w.family);
    f.get("level", w.level);
    f.get_string("rule", [&](const std::string& v) { w.rule = parse_rule(v); });
    f.get_string("type", [&](const std::string& v) {
        if (v == "soft") w.type = ThresholdType::Soft;
        else if (v == "hard") w.type = ThresholdType::Hard;
        else throw UsageError("unknown threshold type \"" + v + "\" (soft, hard)");
    });
    f.finish();
    return w;
}

Json to_json(const Preprocess& p) {
    Json j;
    j["denoise"] = p.denoise;
    j["wavelet"] = to_json(p.wavelet);
    j["grid_size"] = p.grid_size;
    return j;
}

Preprocess preprocess_from_json(const Json& j) {
    Preprocess p;
    Fields f(j, "preprocess");
    f.get("denoise", p.denoise);
    if (const auto* w = f.find("wavelet")) p.wavelet = wavelet_from_json(*w);
    f.get("grid_size", p.grid_size);
    f.finish();
    return p;
}

Json to_json(const nn::TrainConfig& t) {
    Json j;
    j["epochs"] = t.epochs;
    j["batch_size"] = t.batch_size;
    j["learning_rate"] = t.learning_rate;
    j["beta1"] = t.beta1;
    j["beta2"] = t.beta2;
    j["adam_eps"] = t.adam_eps;
    j["patience"] = t.patience;
    j["min_epochs"] = t.min_epochs;
    j["refresh_bn"] = t.refresh_bn;
    j["seed"] = t.seed;
    return j;
}

nn::TrainConfig train_from_json(const Json& j) {
    nn::TrainConfig t;
    Fields f(j, "train");
    f.get("epochs", t.epochs);
    f.get("batch_size", t.batch_size);
    f.get("learning_rate", t.learning_rate);
    f.get("beta1", t.beta1);
    f.get("beta2", t.beta2);
    f.get("adam_eps", t.adam_eps);
    f.get("patience", t.patience);
    f.get("min_epochs", t.min_epochs);
    f.get("refresh_bn", t.refresh_bn);
    f.get("seed", t.seed);
    f.finish();
    return t;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["scenario"] = to_json(c.scenario);
    j["snr_start"] = c.snr_start;
    j["snr_stop"] = c.snr_stop;
    j["snr_step"] = c.snr_step;
    j["factor"] = factor_name(c.factor);
    j["factor_values"] = c.factor_values;
    Json methods = Json::array();
    for (auto m : c.methods) methods.push_back(method_name(m));
    j["methods"] = methods;
    j["train"] = to_json(c.train);
    j["wavelet"] = to_json(c.wavelet);
    j["grid_size"] = c.grid_size;
    j["pooled_training"] = c.pooled_training;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    return j;
}

ExperimentConfig experiment_from_json(const Json& j) {
    ExperimentConfig c;
    Fields f(j, "config");
    if (const auto* s = f.find("scenario")) c.scenario = scenario_from_json(*s);
    f.get_real("snr_start", c.snr_start);
    f.get_real("snr_stop", c.snr_stop);
    f.get_real("snr_step", c.snr_step);
    f.get_string("factor", [&](const std::string& v) { c.factor = parse_factor(v); });
    if (const auto* fv = f.find("factor_values")) {
        if (!fv->is_array()) throw UsageError(f.where("factor_values") + ": expected an array");
        c.factor_values.clear();
        for (const auto& v : *fv) c.factor_values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    if (const auto* ms = f.find("methods")) {
        if (!ms->is_array()) throw UsageError(f.where("methods") + ": expected an array of method names");
        c.methods.clear();
        for (const auto& m : *ms) {
            if (!m.is_string()) throw UsageError(f.where("methods") + ": expected method names");
            c.methods.push_back(parse_method(m.get<std::string>()));
        }
    }
    if (const auto* t = f.find("train")) c.train = train_from_json(*t);
    if (const auto* w = f.find("wavelet")) c.wavelet = wavelet_from_json(*w);
    f.get("grid_size", c.grid_size);
    f.get("pooled_training", c.pooled_training);
    f.get("output_dir", c.output_dir);
    f.get("seed", c.seed);
    f.finish();
    return c;
}

Json to_json(const ResultRow& r) {
    Json j;
    j["snr_db"] = r.snr_db;
    j["factor"] = r.factor;
    j["factor_value"] = r.factor_value;
    j["method"] = method_name(r.method);
    j["accuracy"] = r.accuracy;
    Json conf = Json::array();
    for (const auto& row : r.confusion) conf.push_back(Json(std::vector<std::uint32_t>(row.begin(), row.end())));
    j["confusion"] = conf;
    return j;
}

ResultRow row_from_json(const Json& j) {
    ResultRow r;
    Fields f(j, "row");
    f.get("snr_db", r.snr_db);
    f.get("factor", r.factor);
    f.get("factor_value", r.factor_value);
    f.get_string("method", [&](const std::string& v) { r.method = parse_method(v); });
    f.get("accuracy", r.accuracy);
    if (const auto* c = f.find("confusion")) {
        std::vector<std::vector<std::uint32_t>> m;
        try {
            m = c->get<std::vector<std::vector<std::uint32_t>>>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(f.where("confusion") + ": " + e.what());
        }
        if (m.size() != kNumSchemes) throw DataError(f.where("confusion") + ": expected a 4x4 matrix");
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].size() != kNumSchemes) throw DataError(f.where("confusion") + ": expected a 4x4 matrix");
            std::copy(m[i].begin(), m[i].end(), r.confusion[i].begin());
        }
    }
    f.finish();
    return r;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("config " + path.string() + ": " + e.what());
    }
    return experiment_from_json(j);
}

void save_experiment(const ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write config " + path.string());
    os << to_json(cfg).dump(2) << '\n';
}

}  // namespace nomadet
