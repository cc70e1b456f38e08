#include "cli.hpp"

#include <chrono>
#include <map>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "nomadet/config.hpp"
#include "nomadet/datapipe.hpp"
#include "nomadet/error.hpp"
#include "nomadet/harness.hpp"
#include "nomadet/nn/checkpoint.hpp"
#include "nomadet/seed.hpp"

namespace nomadet::cli {

namespace fs = std::filesystem;

namespace {

void make_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Flags that mirror ExperimentConfig keys. Each one only applies when given.
struct Overrides {
    std::string config;
    double snr = 0, snr_start = 0, snr_stop = 0, snr_step = 0, delta_db = 0, alpha_fpc = 0;
    std::vector<std::string> near;
    std::string far, factor, output_dir;
    std::vector<std::string> factor_values, methods;
    int samples_per_class = 0, symbols_per_frame = 0, samples_per_symbol = 0, grid = 0;
    int epochs = 0, batch_size = 0, patience = 0, min_epochs = 0;
    double lr = 0;
    std::uint64_t seed = 0, train_seed = 0;
    bool raw = false, pooled = false;

    std::map<std::string, CLI::Option*> opts;

    void add_scenario(CLI::App& app) {
        opts["config"] = app.add_option("--config", config, "Experiment config (JSON)")->check(CLI::ExistingFile);
        opts["snr"] = app.add_option("--snr", snr, "Near-UT SNR in dB (scenario.snr_db_near)");
        opts["delta"] = app.add_option("--delta-db", delta_db, "Near/far SNR gap in dB (scenario.delta_db)");
        opts["alpha"] = app.add_option("--alpha-fpc", alpha_fpc, "FPA decay factor (scenario.power.alpha_fpc)");
        opts["near"] = app.add_option("--near", near, "Near-UT schemes (scenario.near_schemes)");
        opts["far"] = app.add_option("--far", far, "Far-UT scheme (scenario.far_scheme)");
        opts["spc"] = app.add_option("--samples-per-class", samples_per_class, "scenario.samples_per_class");
        opts["spf"] = app.add_option("--symbols-per-frame", symbols_per_frame, "scenario.symbols_per_frame");
        opts["sps"] = app.add_option("--samples-per-symbol", samples_per_symbol, "scenario.samples_per_symbol");
        opts["grid"] = app.add_option("--grid", grid, "Density diagram size (grid_size)");
    }

    void add_train(CLI::App& app) {
        opts["epochs"] = app.add_option("--epochs", epochs, "train.epochs");
        opts["batch"] = app.add_option("--batch-size", batch_size, "train.batch_size");
        opts["lr"] = app.add_option("--lr", lr, "train.learning_rate");
        opts["patience"] = app.add_option("--patience", patience, "train.patience");
        opts["min_epochs"] = app.add_option("--min-epochs", min_epochs, "train.min_epochs");
        opts["train_seed"] = app.add_option("--train-seed", train_seed, "train.seed");
    }

    void add_sweep(CLI::App& app) {
        opts["snr_start"] = app.add_option("--snr-start", snr_start, "snr_start");
        opts["snr_stop"] = app.add_option("--snr-stop", snr_stop, "snr_stop");
        opts["snr_step"] = app.add_option("--snr-step", snr_step, "snr_step");
        opts["factor"] = app.add_option("--factor", factor, "Factor axis: none, near_scheme, user_count, alpha_fpc, delta_db");
        opts["factor_values"] = app.add_option("--factor-values", factor_values, "factor_values");
        opts["methods"] = app.add_option("--methods", methods, "resnet_denoised, resnet_raw, projection_clustering");
        opts["pooled"] = app.add_flag("--pooled", pooled, "Train one model per factor value across SNR points");
    }

    bool given(const std::string& k) const {
        const auto it = opts.find(k);
        return it != opts.end() && it->second->count() > 0;
    }

    ExperimentConfig load(ExperimentConfig base) const {
        if (given("config")) base = load_experiment(config);
        auto& s = base.scenario;
        if (given("snr")) s.snr_db_near = snr;
        if (given("delta")) s.delta_db = delta_db;
        if (given("alpha")) {
            if (auto* d = std::get_if<DeltaFpa>(&s.power)) d->alpha_fpc = alpha_fpc;
            else if (auto* f = std::get_if<FpaInputs>(&s.power)) f->alpha_fpc = alpha_fpc;
            else throw UsageError("--alpha-fpc needs an FPA power source in the config");
        }
        if (given("near")) {
            s.near_schemes.clear();
            for (const auto& n : near) s.near_schemes.push_back(parse_scheme(n));
        }
        if (given("far")) s.far_scheme = parse_scheme(far);
        if (given("spc")) s.samples_per_class = samples_per_class;
        if (given("spf")) s.symbols_per_frame = symbols_per_frame;
        if (given("sps")) s.samples_per_symbol = samples_per_symbol;
        if (given("grid")) base.grid_size = grid;
        if (given("epochs")) base.train.epochs = epochs;
        if (given("batch")) base.train.batch_size = batch_size;
        if (given("lr")) base.train.learning_rate = lr;
        if (given("patience")) base.train.patience = patience;
        if (given("min_epochs")) base.train.min_epochs = min_epochs;
        if (given("train_seed")) base.train.seed = train_seed;
        if (given("snr_start")) base.snr_start = snr_start;
        if (given("snr_stop")) base.snr_stop = snr_stop;
        if (given("snr_step")) base.snr_step = snr_step;
        if (given("factor")) base.factor = parse_factor(factor);
        if (given("factor_values")) base.factor_values = factor_values;
        if (given("methods")) {
            base.methods.clear();
            for (const auto& m : methods) base.methods.push_back(parse_method(m));
        }
        if (given("pooled")) base.pooled_training = pooled;
        return base;
    }
};

Preprocess preprocess_of(const ExperimentConfig& cfg, bool raw) { return {!raw, cfg.wavelet, cfg.grid_size}; }

std::uint64_t split_seed(std::uint64_t seed) { return derive_seed(seed, {0x5e11}); }

std::string confusion_text(const EvalResult& e) {
    std::ostringstream os;
    os << "true\\pred  pi2bpsk   qpsk  qam16  qam64\n";
    for (int i = 0; i < kNumSchemes; ++i) {
        char line[96];
        std::snprintf(line, sizeof line, "%-9s  %7u %6u %6u %6u\n", std::string(scheme_name(scheme_from_index(i))).c_str(),
                      e.confusion[i][0], e.confusion[i][1], e.confusion[i][2], e.confusion[i][3]);
        os << line;
    }
    return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"NOMA far-UT modulation detection: data generation, training and experiment sweeps", "nomadet"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "nomadet 0.1.0");

    Overrides og, ot, osw;

    auto* gen = app.add_subcommand("generate", "Generate a labelled dataset (NMD1 file plus manifest)");
    std::string gen_out;
    std::uint64_t gen_seed = 1;
    og.add_scenario(*gen);
    gen->add_flag("--raw", og.raw, "Skip wavelet denoising");
    gen->add_option("--out,-o", gen_out, "Output dataset path")->required();
    auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Master seed (scenario.seed)");

    auto* tr = app.add_subcommand("train", "Train a network on a dataset's 6:2:2 train/validation split");
    std::string tr_data, tr_out, tr_hist;
    std::uint64_t tr_seed = 1;
    tr->add_option("--data,-d", tr_data, "Dataset (NMD1)")->required()->check(CLI::ExistingFile);
    tr->add_option("--out,-o", tr_out, "Checkpoint path (NMDL)")->required();
    tr->add_option("--history", tr_hist, "Per-epoch history CSV (default: <out>.history.csv)");
    tr->add_option("--seed", tr_seed, "Split and initialisation seed");
    ot.opts["config"] =
        tr->add_option("--config", ot.config, "Experiment config supplying train settings")->check(CLI::ExistingFile);
    ot.add_train(*tr);

    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    std::string ev_model, ev_data, ev_split = "test", ev_out;
    std::uint64_t ev_seed = 1;
    ev->add_option("--model,-m", ev_model, "Checkpoint (NMDL)")->required()->check(CLI::ExistingFile);
    ev->add_option("--data,-d", ev_data, "Dataset (NMD1)")->required()->check(CLI::ExistingFile);
    ev->add_option("--split", ev_split, "test, validation, train or all")
        ->check(CLI::IsMember({"test", "validation", "train", "all"}));
    ev->add_option("--seed", ev_seed, "Split seed used at training time");
    ev->add_option("--out", ev_out, "Write metrics JSON here");

    auto* sw = app.add_subcommand("sweep", "Run an SNR sweep and write a report directory");
    std::string sw_preset = "desk", sw_out;
    std::uint64_t sw_seed = 0;
    bool sw_resume = false, sw_quiet = false;
    osw.add_scenario(*sw);
    osw.add_train(*sw);
    osw.add_sweep(*sw);
    sw->add_option("--seed", sw_seed, "Experiment seed")->required();
    sw->add_option("--preset", sw_preset, "Base settings when no config is given")
        ->check(CLI::IsMember({"desk", "full"}));
    auto* sw_out_opt = sw->add_option("--out,-o", sw_out, "Report directory (output_dir)");
    sw->add_flag("--resume", sw_resume, "Continue an interrupted sweep in the same directory");
    sw->add_flag("--quiet,-q", sw_quiet, "No per-row progress");

    auto* rep = app.add_subcommand("report", "Rebuild CSV and summary from a result directory");
    std::string rep_dir;
    rep->add_option("dir", rep_dir, "Result directory")->required()->check(CLI::ExistingDirectory);

    auto* ins = app.add_subcommand("inspect", "Dump density diagrams of a dataset as PGM images");
    std::string ins_data, ins_out;
    std::vector<std::size_t> ins_index;
    std::size_t ins_count = 4;
    ins->add_option("--data,-d", ins_data, "Dataset (NMD1)")->required()->check(CLI::ExistingFile);
    ins->add_option("--out,-o", ins_out, "Output directory")->required();
    ins->add_option("--index", ins_index, "Sample indices to dump");
    ins->add_option("--count", ins_count, "Samples per class when no index is given");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
            err << "run 'nomadet " << sub->get_name() << " --help' for usage\n";
        else
            err << "run 'nomadet --help' for usage\n";
        return kUsage;
    }

    try {
        if (gen->parsed()) {
            auto cfg = og.load(ExperimentConfig{});
            if (gen_seed_opt->count() > 0) cfg.scenario.seed = gen_seed;
            const auto pre = preprocess_of(cfg, og.raw);
            const auto data = make_dataset(cfg.scenario, pre);
            make_parent(gen_out);
            save_dataset(data, gen_out);
            write_manifest(cfg.scenario, pre, gen_out);
            out << "wrote " << data.samples.size() << " samples (" << data.grid_size << "x" << data.grid_size
                << ") to " << gen_out << '\n';
        } else if (tr->parsed()) {
            const auto cfg = ot.load(ExperimentConfig{});
            const auto data = load_dataset(tr_data);
            const auto split = split_dataset(data.samples, {6, 2, 2}, split_seed(tr_seed));
            nn::ArchConfig arch;
            arch.input_size = data.grid_size;
            nn::Model model(arch, derive_seed(tr_seed, {0x1417}));
            const auto hist = nn::train(model, select(data.samples, split.train), select(data.samples, split.validation),
                                        cfg.train);
            make_parent(tr_out);
            nn::save_checkpoint(model, tr_out);
            const fs::path hist_path = tr_hist.empty() ? fs::path(tr_out + ".history.csv") : fs::path(tr_hist);
            make_parent(hist_path);
            std::ofstream hs(hist_path);
            if (!hs) throw DataError("cannot write " + hist_path.string());
            hs << "epoch,train_loss,train_accuracy,val_accuracy\n";
            for (const auto& r : hist.epochs) {
                char line[128];
                std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f\n", r.epoch, r.train_loss, r.train_accuracy,
                              r.val_accuracy);
                hs << line;
            }
            out << "best epoch " << hist.best_epoch << " of " << hist.epochs.size() << ", validation accuracy "
                << hist.best_val_accuracy << "\nwrote " << tr_out << " and " << hist_path.string() << '\n';
        } else if (ev->parsed()) {
            const auto model = nn::load_checkpoint(ev_model);
            const auto data = load_dataset(ev_data);
            if (data.grid_size != model.config().input_size)
                throw DataError("dataset grid " + std::to_string(data.grid_size) + " does not match the model input " +
                                std::to_string(model.config().input_size));
            std::vector<LabeledSample> subset;
            if (ev_split == "all") {
                subset = data.samples;
            } else {
                const auto split = split_dataset(data.samples, {6, 2, 2}, split_seed(ev_seed));
                const auto& idx = ev_split == "test" ? split.test : (ev_split == "train" ? split.train : split.validation);
                subset = select(data.samples, idx);
            }
            const auto res = evaluate(model, subset);
            char acc[32];
            std::snprintf(acc, sizeof acc, "%.6f", res.accuracy);
            out << "accuracy " << acc << " on " << subset.size() << " " << ev_split << " samples\n"
                << confusion_text(res);
            if (!ev_out.empty()) {
                Json j;
                j["split"] = ev_split;
                j["samples"] = subset.size();
                j["accuracy"] = res.accuracy;
                Json conf = Json::array();
                for (const auto& r : res.confusion) conf.push_back(Json(std::vector<std::uint32_t>(r.begin(), r.end())));
                j["confusion"] = conf;
                make_parent(ev_out);
                std::ofstream os(ev_out);
                if (!os) throw DataError("cannot write " + ev_out);
                os << j.dump(2) << '\n';
            }
        } else if (sw->parsed()) {
            auto cfg = osw.load(sw_preset == "full" ? ExperimentConfig::full() : ExperimentConfig::desk());
            cfg.seed = sw_seed;
            if (sw_out_opt->count() > 0) cfg.output_dir = sw_out;
            if (cfg.output_dir.empty()) throw UsageError("sweep needs an output directory (--out or output_dir)");
            SweepOptions so;
            so.resume = sw_resume;
            const auto t0 = std::chrono::steady_clock::now();
            if (!sw_quiet)
                so.on_row = [&](const ResultRow& r) {
                    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    char line[160];
                    std::snprintf(line, sizeof line, "[%7.1fs] %s=%s snr=%6.2f %-22s accuracy %.4f\n", secs,
                                  r.factor.c_str(), r.factor_value.c_str(), r.snr_db,
                                  std::string(method_name(r.method)).c_str(), r.accuracy);
                    err << line << std::flush;
                };
            const auto table = run_sweep(cfg, so);
            emit_report(table, cfg.output_dir);
            save_experiment(cfg, fs::path(cfg.output_dir) / "config.json");
            out << summarize(table) << "report written to " << cfg.output_dir << '\n';
        } else if (rep->parsed()) {
            const auto table = load_report(rep_dir);
            emit_report(table, rep_dir);
            out << summarize(table);
        } else if (ins->parsed()) {
            const auto data = load_dataset(ins_data);
            fs::create_directories(ins_out);
            std::vector<std::size_t> picks = ins_index;
            if (picks.empty()) {
                std::array<std::size_t, kNumSchemes> taken{};
                for (std::size_t i = 0; i < data.samples.size(); ++i)
                    if (taken[data.samples[i].label]++ < ins_count) picks.push_back(i);
            }
            for (auto i : picks) {
                if (i >= data.samples.size())
                    throw UsageError("index " + std::to_string(i) + " out of range (" +
                                     std::to_string(data.samples.size()) + " samples)");
                const auto& s = data.samples[i];
                char name[96];
                std::snprintf(name, sizeof name, "sample_%05zu_%s.pgm", i,
                              std::string(scheme_name(scheme_from_index(s.label))).c_str());
                write_pgm(s.diagram, fs::path(ins_out) / name);
            }
            out << "wrote " << picks.size() << " diagrams to " << ins_out << '\n';
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const DomainError& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kUsage;
    } catch (const ShapeError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    }
    return kOk;
}

}  // namespace nomadet::cli
