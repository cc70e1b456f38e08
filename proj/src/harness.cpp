#include "nomadet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "nomadet/baseline.hpp"
#include "nomadet/config.hpp"
#include "nomadet/error.hpp"
#include "nomadet/seed.hpp"

namespace nomadet {

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::ResnetDenoised: return "resnet_denoised";
        case Method::ResnetRaw: return "resnet_raw";
        case Method::ProjectionClustering: return "projection_clustering";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    for (auto m : {Method::ResnetDenoised, Method::ResnetRaw, Method::ProjectionClustering})
        if (method_name(m) == name) return m;
    throw UsageError("unknown method \"" + std::string(name) +
                     "\" (resnet_denoised, resnet_raw, projection_clustering)");
}

std::string_view factor_name(FactorAxis f) noexcept {
    switch (f) {
        case FactorAxis::None: return "none";
        case FactorAxis::NearScheme: return "near_scheme";
        case FactorAxis::UserCount: return "user_count";
        case FactorAxis::AlphaFpc: return "alpha_fpc";
        case FactorAxis::DeltaDb: return "delta_db";
    }
    return "?";
}

FactorAxis parse_factor(std::string_view name) {
    for (auto f : {FactorAxis::None, FactorAxis::NearScheme, FactorAxis::UserCount, FactorAxis::AlphaFpc,
                   FactorAxis::DeltaDb})
        if (factor_name(f) == name) return f;
    throw UsageError("unknown factor axis \"" + std::string(name) +
                     "\" (none, near_scheme, user_count, alpha_fpc, delta_db)");
}

namespace {

double parse_number(const std::string& v, const char* what) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw UsageError(std::string(what) + " value \"" + v + "\" is not a number");
    return d;
}

}  // namespace

NomaScenario apply_factor(NomaScenario scenario, FactorAxis axis, const std::string& value) {
    switch (axis) {
        case FactorAxis::None:
            break;
        case FactorAxis::NearScheme:
            scenario.near_schemes.assign(scenario.near_schemes.empty() ? 1 : scenario.near_schemes.size(),
                                         parse_scheme(value));
            break;
        case FactorAxis::UserCount: {
            const double users = parse_number(value, "user_count");
            if (users != std::floor(users) || users < 2 || users > 4)
                throw UsageError("user_count must be 2, 3 or 4, got " + value);
            scenario.near_schemes.assign(static_cast<std::size_t>(users) - 1, ModScheme::Qpsk);
            if (std::holds_alternative<ExplicitRatios>(scenario.power) ||
                std::holds_alternative<FpaInputs>(scenario.power))
                scenario.power = DeltaFpa{};
            break;
        }
        case FactorAxis::AlphaFpc: {
            const double a = parse_number(value, "alpha_fpc");
            if (auto* d = std::get_if<DeltaFpa>(&scenario.power)) d->alpha_fpc = a;
            else if (auto* f = std::get_if<FpaInputs>(&scenario.power)) f->alpha_fpc = a;
            else throw UsageError("alpha_fpc factor needs an FPA power source");
            break;
        }
        case FactorAxis::DeltaDb:
            scenario.delta_db = parse_number(value, "delta_db");
            break;
    }
    return scenario;
}

void ExperimentConfig::validate() const {
    if (!(snr_step > 0.0) || !std::isfinite(snr_step)) throw UsageError("snr_step must be positive");
    if (!(snr_start <= snr_stop) || !std::isfinite(snr_start) || !std::isfinite(snr_stop))
        throw UsageError("snr_start must not exceed snr_stop");
    if (methods.empty()) throw UsageError("at least one method is required");
    if (factor != FactorAxis::None && factor_values.empty())
        throw UsageError("factor axis " + std::string(factor_name(factor)) + " needs factor_values");
    if (grid_size < 4) throw UsageError("grid_size must be at least 4");
    train.validate();
    for (const auto& v : factor_levels()) {
        auto sc = apply_factor(scenario, factor, v);
        sc.snr_db_near = snr_start;
        sc.validate();
    }
    if (scenario.samples_per_class * kNumSchemes < 10)
        throw UsageError("samples_per_class must give at least 10 samples for splitting");
}

std::vector<double> ExperimentConfig::snr_points() const {
    std::vector<double> out;
    const double span = snr_stop - snr_start;
    const auto n = static_cast<long long>(std::floor(span / snr_step + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(snr_start + static_cast<double>(i) * snr_step);
    return out;
}

std::vector<std::string> ExperimentConfig::factor_levels() const {
    if (factor == FactorAxis::None) return {"-"};
    return factor_values;
}

ExperimentConfig ExperimentConfig::desk() {
    ExperimentConfig c;
    c.scenario.samples_per_class = 50;
    c.snr_start = -10.0;
    c.snr_stop = 20.0;
    c.snr_step = 6.0;
    c.methods = {Method::ResnetDenoised, Method::ResnetRaw, Method::ProjectionClustering};
    c.output_dir = "results/desk";
    return c;
}

ExperimentConfig ExperimentConfig::full() {
    ExperimentConfig c;
    c.scenario.samples_per_class = 250;
    c.methods = {Method::ResnetDenoised, Method::ResnetRaw, Method::ProjectionClustering};
    c.output_dir = "results/full";
    return c;
}

std::size_t EvalResult::total() const noexcept {
    std::size_t n = 0;
    for (const auto& r : confusion)
        for (auto v : r) n += v;
    return n;
}

EvalResult evaluate_predictions(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.empty()) throw DomainError("cannot evaluate on an empty test set");
    if (truth.size() != predicted.size()) throw ShapeError("truth and prediction counts differ");
    EvalResult r;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = predicted[i];
        if (t < 0 || t >= kNumSchemes || p < 0 || p >= kNumSchemes)
            throw DomainError("class index outside 0..3 at position " + std::to_string(i));
        ++r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
        if (t == p) ++correct;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    return r;
}

EvalResult evaluate(const std::function<int(const LabeledSample&)>& classifier, std::span<const LabeledSample> test) {
    std::vector<int> truth, pred;
    for (const auto& s : test) {
        truth.push_back(s.label);
        pred.push_back(classifier(s));
    }
    return evaluate_predictions(truth, pred);
}

EvalResult evaluate(const nn::Model& model, std::span<const LabeledSample> test) {
    if (test.empty()) throw DomainError("cannot evaluate on an empty test set");
    const auto pred = nn::predict_labels(model, test);
    std::vector<int> truth;
    for (const auto& s : test) truth.push_back(s.label);
    return evaluate_predictions(truth, pred);
}

double ResultTable::mean_accuracy(Method m, double snr_lo, double snr_hi, const std::string& factor_value) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows)
        if (r.method == m && r.snr_db >= snr_lo - 1e-9 && r.snr_db <= snr_hi + 1e-9 &&
            (factor_value.empty() || r.factor_value == factor_value)) {
            sum += r.accuracy;
            ++n;
        }
    if (n == 0) throw DomainError("no rows for " + std::string(method_name(m)) + " in the requested SNR range");
    return sum / static_cast<double>(n);
}

// -- sweep ----------------------------------------------------------------------

namespace {

enum SeedKey : std::uint64_t { kSplitKey = 11, kInitKey = 12, kShuffleKey = 13, kPooledKey = 14 };

std::string cell_key(const std::string& factor_value, double snr, Method m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "|%.6f|", snr);
    return factor_value + buf + std::string(method_name(m));
}

bool is_resnet(Method m) { return m != Method::ProjectionClustering; }

Preprocess preprocess_for(const ExperimentConfig& cfg, Method m) {
    return {m != Method::ResnetRaw, cfg.wavelet, cfg.grid_size};
}

/// One (factor value, SNR) point: scenario plus lazily generated datasets.
struct CellData {
    NomaScenario scenario;
    std::uint64_t cell_seed = 0;
    std::map<bool, std::vector<LabeledSample>> by_denoise;
    std::optional<DatasetSplit> split;

    const std::vector<LabeledSample>& samples(const ExperimentConfig& cfg, Method m) {
        const auto pre = preprocess_for(cfg, m);
        auto it = by_denoise.find(pre.denoise);
        if (it == by_denoise.end()) it = by_denoise.emplace(pre.denoise, generate_dataset(scenario, pre)).first;
        if (!split) split = split_dataset(it->second, {6, 2, 2}, derive_seed(cell_seed, {kSplitKey}));
        return it->second;
    }
};

CellData make_cell(const ExperimentConfig& cfg, std::size_t fi, std::size_t si) {
    CellData c;
    c.cell_seed = derive_seed(cfg.seed, {fi, si});
    c.scenario = apply_factor(cfg.scenario, cfg.factor, cfg.factor_levels()[fi]);
    c.scenario.snr_db_near = cfg.snr_points()[si];
    c.scenario.seed = c.cell_seed;
    return c;
}

nn::ArchConfig arch_for(const ExperimentConfig& cfg) {
    nn::ArchConfig a;
    a.input_size = cfg.grid_size;
    return a;
}

nn::TrainConfig train_for(const ExperimentConfig& cfg, std::uint64_t seed) {
    auto t = cfg.train;
    t.seed = derive_seed(seed, {kShuffleKey, t.seed});
    return t;
}

EvalResult eval_projection(const ExperimentConfig& cfg, CellData& cell) {
    const auto& data = cell.samples(cfg, Method::ResnetDenoised);
    ProjectionClassifier clf({cell.scenario.allocation(), cell.scenario.near_schemes, {}});
    std::vector<int> truth, pred;
    for (auto i : cell.split->test) {
        const auto& s = data[i];
        const auto frame = regenerate_frame(cell.scenario, s.label, s.seed);
        truth.push_back(s.label);
        pred.push_back(static_cast<int>(clf.classify(denoise_frame(frame.received, cfg.wavelet))));
    }
    return evaluate_predictions(truth, pred);
}

EvalResult run_cell(const ExperimentConfig& cfg, CellData& cell, Method m) {
    if (!is_resnet(m)) return eval_projection(cfg, cell);
    const auto& data = cell.samples(cfg, m);
    const auto train_set = select(data, cell.split->train);
    const auto val_set = select(data, cell.split->validation);
    const auto test_set = select(data, cell.split->test);
    nn::Model model(arch_for(cfg), derive_seed(cell.cell_seed, {kInitKey}));
    nn::train(model, train_set, val_set, train_for(cfg, cell.cell_seed));
    return evaluate(model, test_set);
}

std::string config_digest(const ExperimentConfig& cfg) {
    auto j = to_json(cfg);
    j.erase("output_dir");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class PartialLog {
public:
    PartialLog(const ExperimentConfig& cfg, bool resume) : digest_(config_digest(cfg)) {
        if (cfg.output_dir.empty()) return;
        dir_ = cfg.output_dir;
        std::filesystem::create_directories(dir_);
        if (resume) load();
        if (done_.empty()) {
            std::ofstream os(dir_ / "partial.jsonl", std::ios::trunc);
            os << Json{{"config_digest", digest_}}.dump() << '\n';
        }
    }

    const ResultRow* find(const std::string& key) const {
        const auto it = done_.find(key);
        return it == done_.end() ? nullptr : &it->second;
    }

    void append(const ResultRow& r) {
        if (dir_.empty()) return;
        std::ofstream os(dir_ / "partial.jsonl", std::ios::app);
        os << to_json(r).dump() << '\n';
        if (!os) throw DataError("cannot append to " + (dir_ / "partial.jsonl").string());
    }

    void mark_failed() const {
        if (dir_.empty()) return;
        std::ofstream os(dir_ / "RESUME");
        os << digest_ << '\n';
    }

    void finish() const {
        if (dir_.empty()) return;
        std::filesystem::remove(dir_ / "partial.jsonl");
        std::filesystem::remove(dir_ / "RESUME");
    }

private:
    void load() {
        std::ifstream is(dir_ / "partial.jsonl");
        std::string line;
        if (!is || !std::getline(is, line)) return;
        try {
            if (Json::parse(line).value("config_digest", std::string{}) != digest_) return;
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                auto r = row_from_json(Json::parse(line));
                done_.emplace(cell_key(r.factor_value, r.snr_db, r.method), std::move(r));
            }
        } catch (const nlohmann::json::exception&) {
            // A torn last line from a crash; keep what parsed.
        }
    }

    std::filesystem::path dir_;
    std::string digest_;
    std::map<std::string, ResultRow> done_;
};

ResultRow make_row(const ExperimentConfig& cfg, const std::string& fv, double snr, Method m, const EvalResult& e) {
    ResultRow r;
    r.snr_db = snr;
    r.factor = factor_name(cfg.factor);
    r.factor_value = fv;
    r.method = m;
    r.accuracy = e.accuracy;
    r.confusion = e.confusion;
    return r;
}

}  // namespace

ResultTable run_sweep(const ExperimentConfig& cfg, const SweepOptions& opts) {
    cfg.validate();
    const auto levels = cfg.factor_levels();
    const auto snrs = cfg.snr_points();
    PartialLog log(cfg, opts.resume);
    // rows[fi][si][mi]
    std::vector<std::vector<std::vector<std::optional<ResultRow>>>> rows(
        levels.size(), std::vector<std::vector<std::optional<ResultRow>>>(
                           snrs.size(), std::vector<std::optional<ResultRow>>(cfg.methods.size())));
    const auto record = [&](std::size_t fi, std::size_t si, std::size_t mi, ResultRow r, bool fresh) {
        if (fresh) log.append(r);
        if (opts.on_row) opts.on_row(r);
        rows[fi][si][mi] = std::move(r);
    };

    try {
        if (!cfg.pooled_training) {
            for (std::size_t fi = 0; fi < levels.size(); ++fi)
                for (std::size_t si = 0; si < snrs.size(); ++si) {
                    std::optional<CellData> cell;
                    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
                        const auto m = cfg.methods[mi];
                        if (const auto* done = log.find(cell_key(levels[fi], snrs[si], m))) {
                            record(fi, si, mi, *done, false);
                            continue;
                        }
                        if (!cell) cell = make_cell(cfg, fi, si);
                        record(fi, si, mi, make_row(cfg, levels[fi], snrs[si], m, run_cell(cfg, *cell, m)), true);
                    }
                }
        } else {
            for (std::size_t fi = 0; fi < levels.size(); ++fi) {
                std::vector<CellData> cells;
                for (std::size_t si = 0; si < snrs.size(); ++si) cells.push_back(make_cell(cfg, fi, si));
                for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
                    const auto m = cfg.methods[mi];
                    bool all_done = true;
                    for (std::size_t si = 0; si < snrs.size(); ++si)
                        all_done = all_done && log.find(cell_key(levels[fi], snrs[si], m)) != nullptr;
                    if (all_done) {
                        for (std::size_t si = 0; si < snrs.size(); ++si)
                            record(fi, si, mi, *log.find(cell_key(levels[fi], snrs[si], m)), false);
                        continue;
                    }
                    if (!is_resnet(m)) {
                        for (std::size_t si = 0; si < snrs.size(); ++si)
                            record(fi, si, mi, make_row(cfg, levels[fi], snrs[si], m, eval_projection(cfg, cells[si])),
                                   true);
                        continue;
                    }
                    std::vector<LabeledSample> train_set, val_set;
                    for (auto& c : cells) {
                        const auto& data = c.samples(cfg, m);
                        for (auto i : c.split->train) train_set.push_back(data[i]);
                        for (auto i : c.split->validation) val_set.push_back(data[i]);
                    }
                    const auto pool_seed = derive_seed(cfg.seed, {kPooledKey, fi});
                    nn::Model model(arch_for(cfg), derive_seed(pool_seed, {kInitKey}));
                    nn::train(model, train_set, val_set, train_for(cfg, pool_seed));
                    for (std::size_t si = 0; si < snrs.size(); ++si) {
                        const auto test = select(cells[si].samples(cfg, m), cells[si].split->test);
                        record(fi, si, mi, make_row(cfg, levels[fi], snrs[si], m, evaluate(model, test)), true);
                    }
                }
            }
        }
    } catch (...) {
        log.mark_failed();
        throw;
    }
    log.finish();

    ResultTable table;
    for (auto& per_f : rows)
        for (auto& per_s : per_f)
            for (auto& r : per_s) table.rows.push_back(std::move(*r));
    return table;
}

// -- reports --------------------------------------------------------------------

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write " + path.string());
    os << text;
    if (!os) throw DataError("failed writing " + path.string());
}

}  // namespace

std::string summarize(const ResultTable& table) {
    // Stable first-seen order of (factor value, method).
    std::vector<std::pair<std::string, Method>> keys;
    for (const auto& r : table.rows) {
        const std::pair<std::string, Method> k{r.factor_value, r.method};
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    std::ostringstream os;
    os << "factor_value  method                  points  mean_accuracy\n";
    for (const auto& [fv, m] : keys) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& r : table.rows)
            if (r.factor_value == fv && r.method == m) {
                sum += r.accuracy;
                ++n;
            }
        char line[160];
        std::snprintf(line, sizeof line, "%-12s  %-22s  %6zu  %.4f\n", fv.c_str(), std::string(method_name(m)).c_str(), n,
                      sum / static_cast<double>(n));
        os << line;
    }
    // Denoising effect per factor value, when both network variants ran.
    for (const auto& [fv, m] : keys) {
        if (m != Method::ResnetDenoised) continue;
        if (std::find(keys.begin(), keys.end(), std::pair{fv, Method::ResnetRaw}) == keys.end()) continue;
        const double gain =
            table.mean_accuracy(Method::ResnetDenoised, -1e300, 1e300, fv) - table.mean_accuracy(Method::ResnetRaw, -1e300, 1e300, fv);
        os << "denoising " << (gain > 0.02 ? "helps" : (gain < -0.02 ? "hurts" : "is neutral")) << " at factor value "
           << fv << " (" << fmt("%+.4f", gain) << ")\n";
    }
    return os.str();
}

void emit_report(const ResultTable& table, const std::filesystem::path& dir) {
    if (table.rows.empty()) throw DomainError("cannot emit a report for an empty table");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create report directory " + dir.string() + ": " + ec.message());

    std::ostringstream csv;
    csv << "factor,factor_value,method,snr_db,accuracy,test_count\n";
    for (const auto& r : table.rows) {
        std::size_t n = 0;
        for (const auto& row : r.confusion)
            for (auto v : row) n += v;
        csv << r.factor << ',' << r.factor_value << ',' << method_name(r.method) << ',' << fmt("%.2f", r.snr_db) << ','
            << fmt("%.6f", r.accuracy) << ',' << n << '\n';
    }
    write_file(dir / "accuracy.csv", csv.str());

    Json rows = Json::array();
    for (const auto& r : table.rows) rows.push_back(to_json(r));
    write_file(dir / "confusion.json", Json{{"classes", {"pi2bpsk", "qpsk", "qam16", "qam64"}}, {"rows", rows}}.dump(2) + "\n");
    write_file(dir / "summary.txt", summarize(table));
}

ResultTable load_report(const std::filesystem::path& dir) {
    std::ifstream is(dir / "confusion.json");
    if (!is) throw DataError("no confusion.json in " + dir.string());
    ResultTable t;
    try {
        const auto j = Json::parse(is);
        for (const auto& r : j.at("rows")) t.rows.push_back(row_from_json(r));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed " + (dir / "confusion.json").string() + ": " + e.what());
    }
    return t;
}

}  // namespace nomadet
