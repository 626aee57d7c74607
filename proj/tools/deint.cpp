// deint: radar pulse deinterleaving toolkit.
//
// Subcommands: gen, encode-preview, train, eval, baseline, ablate, report.
// Exit codes: 0 success, 1 usage error, 2 data/config error, 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "deint/baselines.hpp"
#include "deint/clustmetrics.hpp"
#include "deint/common.hpp"
#include "deint/pulsegen.hpp"
#include "deint/report.hpp"
#include "deint/rfimage.hpp"
#include "deint/scmloss.hpp"
#include "deint/segnet.hpp"
#include "deint/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

class Manifest {
  public:
    Manifest(const std::string& command, int argc, char** argv) {
        start_ = std::chrono::steady_clock::now();
        j_["tool"] = "deint";
        j_["version"] = kVersion;
        j_["command"] = command;
        auto& args = j_["argv"] = json::array();
        for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
        j_["inputs"] = json::array();
        j_["outputs"] = json::array();
    }

    json& config() { return j_["config"]; }
    void add_input(const std::string& path) { j_["inputs"].push_back(path); }
    void add_output(const std::string& path) { j_["outputs"].push_back(path); }
    void set(const std::string& key, const json& value) { j_[key] = value; }

    void write(const fs::path& dir) {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        j_["duration_s"] =
            std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw deint::DataError("cannot write manifest in " + dir.string());
        out << j_.dump(2) << "\n";
    }

  private:
    json j_;
    std::chrono::steady_clock::time_point start_;
};

struct EncodeFlags {
    int height = 128;
    int width = 128;
    double dt_us = 5.0;
    double floor_eps = 0.1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--height", height, "image height (RF axis)")->capture_default_str();
        cmd->add_option("--width", width, "image width (TOA axis)")->capture_default_str();
        cmd->add_option("--dt-us", dt_us, "time per pixel column, us")->capture_default_str();
        cmd->add_option("--floor-eps", floor_eps, "dimmest encoded intensity")
            ->capture_default_str();
    }

    deint::rfimage::EncodeConfig to_config() const { return {height, width, dt_us, floor_eps}; }

    json to_json() const {
        return {{"height", height}, {"width", width}, {"dt_us", dt_us},
                {"floor_eps", floor_eps}};
    }
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw deint::DataError("cannot create directory " + dir + ": " + ec.message());
}

std::vector<std::pair<double, double>> parse_weight_grid(const std::string& text) {
    std::vector<std::pair<double, double>> grid;
    std::istringstream ss(text);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
        if (pair.empty()) continue;
        const auto comma = pair.find(',');
        if (comma == std::string::npos)
            throw deint::ConfigError("ablate: malformed weight pair '" + pair + "'");
        grid.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
    }
    if (grid.empty()) throw deint::ConfigError("ablate: empty weight grid");
    return grid;
}

// ---------------------------------------------------------------- subcommands

int cmd_gen(int argc, char** argv, int train_n, int test_n, std::uint64_t seed,
            const std::string& out_dir, double window_us, int cmin, int cmax, int pool_train,
            int pool_test) {
    ensure_dir(out_dir);
    Manifest manifest("gen", argc, argv);

    auto [train_pool, test_pool] = deint::pulsegen::default_pools(pool_train, pool_test, seed);
    deint::pulsegen::DatasetSpec spec;
    spec.train_scenarios = train_n;
    spec.test_scenarios = test_n;
    spec.pool_train = std::move(train_pool);
    spec.pool_test = std::move(test_pool);
    spec.concurrency_min = cmin;
    spec.concurrency_max = cmax;
    spec.window_us = window_us;
    spec.master_seed = seed;

    const deint::pulsegen::Dataset ds = deint::pulsegen::generate_dataset(spec);
    const std::string train_path = (fs::path(out_dir) / "train.jsonl").string();
    const std::string test_path = (fs::path(out_dir) / "test.jsonl").string();
    deint::pulsegen::write_scenarios(train_path, ds.train);
    deint::pulsegen::write_scenarios(test_path, ds.test);

    manifest.config() = {{"train_scenarios", train_n}, {"test_scenarios", test_n},
                         {"window_us", window_us},     {"concurrency_min", cmin},
                         {"concurrency_max", cmax},    {"pool_train", pool_train},
                         {"pool_test", pool_test}};
    manifest.set("seeds", json{{"master_seed", seed}});
    manifest.add_output(train_path);
    manifest.add_output(test_path);
    manifest.write(out_dir);

    std::size_t train_pulses = 0, test_pulses = 0;
    for (const auto& s : ds.train) train_pulses += s.pulses.size();
    for (const auto& s : ds.test) test_pulses += s.pulses.size();
    std::printf("wrote %zu train scenarios (%zu pulses) and %zu test scenarios (%zu pulses)\n",
                ds.train.size(), train_pulses, ds.test.size(), test_pulses);
    return 0;
}

int cmd_encode_preview(int argc, char** argv, const std::string& data, int index,
                       const EncodeFlags& flags, const std::string& out_dir) {
    ensure_dir(out_dir);
    Manifest manifest("encode-preview", argc, argv);

    const auto scenarios = deint::pulsegen::read_scenarios(data);
    if (index < 0 || index >= static_cast<int>(scenarios.size()))
        throw deint::DataError("encode-preview: index " + std::to_string(index) +
                               " out of range; file has " + std::to_string(scenarios.size()) +
                               " scenarios");
    auto [image, registry] = deint::rfimage::encode(scenarios[index], flags.to_config());

    const std::string pw_path = (fs::path(out_dir) / "pw.pgm").string();
    const std::string am_path = (fs::path(out_dir) / "am.pgm").string();
    deint::rfimage::write_pgm(pw_path, image, 0);
    deint::rfimage::write_pgm(am_path, image, 1);

    manifest.config() = flags.to_json();
    manifest.config()["index"] = index;
    manifest.add_input(data);
    manifest.add_output(pw_path);
    manifest.add_output(am_path);
    manifest.write(out_dir);

    std::printf("encoded scenario %d: %zu pulses, %zu collision pixels -> %s, %s\n", index,
                registry.entries.size(), registry.collisions.size(), pw_path.c_str(),
                am_path.c_str());
    return 0;
}

int cmd_train(int argc, char** argv, const std::string& data, const std::string& out_dir,
              const deint::trainer::TrainConfig& cfg, const EncodeFlags& flags) {
    ensure_dir(out_dir);
    Manifest manifest("train", argc, argv);

    const auto scenarios = deint::pulsegen::read_scenarios(data);
    deint::trainer::TrainConfig config = cfg;
    config.checkpoint_path = (fs::path(out_dir) / "checkpoint.ckpt").string();

    const deint::trainer::TrainResult result = deint::trainer::train(scenarios, config);
    const std::string loss_path = (fs::path(out_dir) / "loss.csv").string();
    deint::trainer::write_loss_csv(loss_path, result.curve);

    manifest.config() = {{"epochs", config.epochs},
                         {"lr", config.lr},
                         {"w_purity", config.w_purity},
                         {"w_frag", config.w_frag},
                         {"out_channels", config.out_channels},
                         {"permute_targets", config.permute_targets},
                         {"encode", flags.to_json()}};
    manifest.set("seeds", json{{"train_seed", config.seed}});
    manifest.add_input(data);
    manifest.add_output(config.checkpoint_path);
    manifest.add_output(loss_path);
    manifest.write(out_dir);

    std::printf("trained %d epochs over %zu scenarios (%d skipped); best epoch loss %.6f\n",
                config.epochs, scenarios.size(), result.skipped_scenarios,
                result.best_epoch_loss);
    std::printf("checkpoint: %s\n", config.checkpoint_path.c_str());
    return 0;
}

int cmd_eval(int argc, char** argv, const std::string& model_path, const std::string& data,
             const std::string& out_dir, const std::string& method, const EncodeFlags& flags) {
    ensure_dir(out_dir);
    Manifest manifest("eval", argc, argv);

    const deint::segnet::Model model = deint::segnet::load_checkpoint(model_path);
    const auto scenarios = deint::pulsegen::read_scenarios(data);
    const deint::trainer::EvalReport report =
        deint::trainer::evaluate(model, scenarios, flags.to_config(), method);

    const std::string csv_path = (fs::path(out_dir) / ("eval_" + method + ".csv")).string();
    deint::trainer::write_eval_csv(csv_path, report);

    manifest.config() = {{"method", method}, {"encode", flags.to_json()}};
    manifest.add_input(model_path);
    manifest.add_input(data);
    manifest.add_output(csv_path);
    manifest.write(out_dir);

    std::printf("%s on %zu scenarios: cp=%.4f cnfr=%.4f cdr=%.4f ari=%.4f nmi=%.4f\n",
                method.c_str(), report.rows.size(), report.cp().mean, report.cnfr().mean,
                report.cdr().mean, report.ari().mean, report.nmi().mean);
    return 0;
}

int cmd_baseline(int argc, char** argv, const std::string& method_str, const std::string& data,
                 const std::string& out_dir, deint::baselines::BaselineParams params, bool tune,
                 const std::string& train_data) {
    ensure_dir(out_dir);
    Manifest manifest("baseline", argc, argv);

    const deint::baselines::Method method = method_str == "dbscan"
                                                ? deint::baselines::Method::Dbscan
                                                : deint::baselines::Method::MeanShift;
    const auto scenarios = deint::pulsegen::read_scenarios(data);
    manifest.add_input(data);

    if (tune) {
        if (train_data.empty())
            throw deint::ConfigError("baseline: --tune requires --train-data");
        const auto train_scenarios = deint::pulsegen::read_scenarios(train_data);
        const auto grid = deint::baselines::default_grid(method);
        const deint::baselines::TuneResult tuned =
            deint::baselines::tune_baseline(method, train_scenarios, grid);
        params = tuned.params;
        manifest.add_input(train_data);
        manifest.set("tuning", json{{"grid_size", grid.size()},
                                    {"train_mean_ari", tuned.mean_ari},
                                    {"note", "parameters tuned on the train split only"}});
        std::printf("tuned %s on train split: eps=%.4f min_pts=%d bandwidth=%.4f (ARI %.4f)\n",
                    method_str.c_str(), params.eps, params.min_pts, params.bandwidth,
                    tuned.mean_ari);
    }

    deint::trainer::EvalReport report;
    report.method = method_str;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        std::vector<int> truth;
        truth.reserve(scenarios[i].pulses.size());
        for (const auto& p : scenarios[i].pulses) truth.push_back(p.emitter_id);
        const auto pred = deint::baselines::run_baseline(method, params, scenarios[i]);
        const auto s = deint::clustmetrics::score_labels(truth, pred);
        report.rows.push_back({static_cast<int>(i), s.cp, s.cnfr, s.cdr, s.ari, s.nmi});
    }

    const std::string csv_path = (fs::path(out_dir) / ("eval_" + method_str + ".csv")).string();
    deint::trainer::write_eval_csv(csv_path, report);

    manifest.config() = {{"method", method_str},
                         {"eps", params.eps},
                         {"min_pts", params.min_pts},
                         {"bandwidth", params.bandwidth},
                         {"tuned", tune}};
    manifest.add_output(csv_path);
    manifest.write(out_dir);

    std::printf("%s on %zu scenarios: cp=%.4f cnfr=%.4f cdr=%.4f ari=%.4f nmi=%.4f\n",
                method_str.c_str(), report.rows.size(), report.cp().mean, report.cnfr().mean,
                report.cdr().mean, report.ari().mean, report.nmi().mean);
    return 0;
}

int cmd_ablate(int argc, char** argv, const std::string& train_data,
               const std::string& test_data, const std::string& out_dir,
               const std::string& grid_str, const deint::trainer::TrainConfig& base_cfg,
               const EncodeFlags& flags) {
    ensure_dir(out_dir);
    Manifest manifest("ablate", argc, argv);

    const auto grid = parse_weight_grid(grid_str);
    const auto train_set = deint::pulsegen::read_scenarios(train_data);
    const auto test_set = deint::pulsegen::read_scenarios(test_data);

    const auto rows = deint::trainer::ablate(train_set, test_set, grid, base_cfg);

    const std::string table_path = (fs::path(out_dir) / "ablation.csv").string();
    std::ofstream table(table_path, std::ios::binary);
    if (!table) throw deint::DataError("ablate: cannot open " + table_path);
    table << "w_purity,w_frag,ari_mean,ari_std,nmi_mean,nmi_std\n";
    for (const auto& row : rows) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%g,%g,%.6f,%.6f,%.6f,%.6f\n", row.w_purity, row.w_frag,
                      row.report.ari().mean, row.report.ari().stddev, row.report.nmi().mean,
                      row.report.nmi().stddev);
        table << buf;
        std::printf("wp=%.2f wf=%.2f: ari=%.4f nmi=%.4f\n", row.w_purity, row.w_frag,
                    row.report.ari().mean, row.report.nmi().mean);
    }
    table.close();
    manifest.add_output(table_path);

    for (const auto& row : rows) {
        char name[128];
        std::snprintf(name, sizeof(name), "eval_wp%g_wf%g.csv", row.w_purity, row.w_frag);
        const std::string path = (fs::path(out_dir) / name).string();
        deint::trainer::write_eval_csv(path, row.report);
        manifest.add_output(path);
    }

    manifest.config() = {{"grid", grid_str},
                         {"epochs", base_cfg.epochs},
                         {"lr", base_cfg.lr},
                         {"out_channels", base_cfg.out_channels},
                         {"encode", flags.to_json()}};
    manifest.set("seeds", json{{"train_seed", base_cfg.seed}});
    manifest.add_input(train_data);
    manifest.add_input(test_data);
    manifest.write(out_dir);
    return 0;
}

int cmd_report(int argc, char** argv, const std::string& in_dir, const std::string& out_dir) {
    ensure_dir(out_dir);
    Manifest manifest("report", argc, argv);

    const auto csvs = deint::report::find_eval_csvs(in_dir);
    if (csvs.empty()) throw deint::DataError("report: no evaluation CSVs found under " + in_dir);

    std::vector<deint::trainer::EvalReport> reports;
    for (const std::string& path : csvs) {
        reports.push_back(deint::trainer::read_eval_csv(path));
        manifest.add_input(path);
    }
    const auto summaries = deint::report::summarize(reports);

    const std::string cmp_path = (fs::path(out_dir) / "comparison.csv").string();
    deint::report::write_comparison_csv(cmp_path, summaries);
    manifest.add_output(cmp_path);

    // merged per-scenario rows across every method
    deint::trainer::EvalReport merged;
    std::ofstream rows_out(fs::path(out_dir) / "per_scenario.csv", std::ios::binary);
    rows_out << "scenario_id,method,cp,cnfr,cdr,ari,nmi\n";
    for (const auto& r : reports) {
        char buf[256];
        for (const auto& row : r.rows) {
            std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          row.scenario_id, r.method.c_str(), row.cp, row.cnfr, row.cdr, row.ari,
                          row.nmi);
            rows_out << buf;
        }
    }
    rows_out.close();
    manifest.add_output((fs::path(out_dir) / "per_scenario.csv").string());

    for (const char* metric : {"cp", "cnfr", "cdr", "ari", "nmi"}) {
        const std::string svg_path = (fs::path(out_dir) / (std::string(metric) + ".svg")).string();
        deint::report::write_metric_svg(svg_path, metric, summaries);
        manifest.add_output(svg_path);
    }
    manifest.config() = {{"in", in_dir}};
    manifest.write(out_dir);

    std::printf("merged %zu reports into %s (%zu methods)\n", reports.size(), cmp_path.c_str(),
                summaries.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radar pulse deinterleaving via segmentation: dataset synthesis, training,"
                 " evaluation, clustering baselines and reports"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic labeled dataset");
    int gen_train = 200, gen_test = 50, gen_cmin = 1, gen_cmax = 5;
    int gen_pool_train = 20, gen_pool_test = 12;
    std::uint64_t gen_seed = 0;
    double gen_window = 640.0;
    std::string gen_out;
    bool gen_paper = false;
    gen->add_option("--train", gen_train, "train scenario count")->capture_default_str();
    gen->add_option("--test", gen_test, "test scenario count")->capture_default_str();
    gen->add_option("--seed", gen_seed, "master seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--window-us", gen_window, "scenario window, us")->capture_default_str();
    gen->add_option("--concurrency-min", gen_cmin, "min concurrent emitters")
        ->capture_default_str();
    gen->add_option("--concurrency-max", gen_cmax, "max concurrent emitters")
        ->capture_default_str();
    gen->add_option("--pool-train", gen_pool_train, "train emitter pool size")
        ->capture_default_str();
    gen->add_option("--pool-test", gen_pool_test, "test emitter pool size")
        ->capture_default_str();
    gen->add_flag("--paper-scale", gen_paper,
                  "2.56 ms window, 1-11 concurrency, 75/65 emitter pools, 1200/300 scenarios");

    // encode-preview
    auto* prev = app.add_subcommand("encode-preview", "write one scenario as PGM images");
    std::string prev_data, prev_out;
    int prev_index = 0;
    EncodeFlags prev_flags;
    bool prev_paper = false;
    prev->add_option("--data", prev_data, "dataset file (jsonl)")->required();
    prev->add_option("--index", prev_index, "scenario index")->capture_default_str();
    prev->add_option("--out", prev_out, "output directory")->required();
    prev_flags.attach(prev);
    prev->add_flag("--paper-scale", prev_paper, "512x512 image");

    // train
    auto* train = app.add_subcommand("train", "train the segmentation network");
    std::string train_data, train_out;
    deint::trainer::TrainConfig train_cfg;
    EncodeFlags train_flags;
    bool train_no_permute = false, train_paper = false;
    train->add_option("--data", train_data, "train dataset file")->required();
    train->add_option("--out", train_out, "output directory")->required();
    train->add_option("--epochs", train_cfg.epochs)->capture_default_str();
    train->add_option("--lr", train_cfg.lr)->capture_default_str();
    train->add_option("--wp", train_cfg.w_purity, "purity loss weight")->capture_default_str();
    train->add_option("--wf", train_cfg.w_frag, "fragmentation loss weight")
        ->capture_default_str();
    train->add_option("--seed", train_cfg.seed)->capture_default_str();
    train->add_option("--channels", train_cfg.out_channels, "output channels N")
        ->capture_default_str();
    train_flags.attach(train);
    train->add_flag("--no-permute-targets", train_no_permute,
                    "disable the per-step random target swap");
    train->add_flag("--paper-scale", train_paper, "512x512, N=15, 300 epochs, lr 1e-5");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string eval_model, eval_data, eval_out, eval_method = "unet";
    EncodeFlags eval_flags;
    bool eval_paper = false;
    eval->add_option("--model", eval_model, "checkpoint path")->required();
    eval->add_option("--data", eval_data, "test dataset file")->required();
    eval->add_option("--out", eval_out, "output directory")->required();
    eval->add_option("--method-name", eval_method, "method label for the CSV")
        ->capture_default_str();
    eval_flags.attach(eval);
    eval->add_flag("--paper-scale", eval_paper, "512x512 image");

    // baseline
    auto* base = app.add_subcommand("baseline", "run a classical clustering baseline");
    std::string base_method, base_data, base_out, base_train_data;
    deint::baselines::BaselineParams base_params;
    bool base_tune = false;
    base->add_option("--method", base_method, "dbscan or meanshift")
        ->required()
        ->check(CLI::IsMember({"dbscan", "meanshift"}));
    base->add_option("--data", base_data, "dataset file to evaluate")->required();
    base->add_option("--out", base_out, "output directory")->required();
    base->add_option("--eps", base_params.eps, "dbscan neighborhood radius")
        ->capture_default_str();
    base->add_option("--min-pts", base_params.min_pts, "dbscan core threshold")
        ->capture_default_str();
    base->add_option("--bandwidth", base_params.bandwidth, "mean shift window radius")
        ->capture_default_str();
    base->add_flag("--tune", base_tune, "grid-search parameters on --train-data first");
    base->add_option("--train-data", base_train_data, "train dataset file for tuning");

    // ablate
    auto* abl = app.add_subcommand("ablate", "train one model per loss weighting");
    std::string abl_train, abl_test, abl_out, abl_grid = "1,0;0,1;0.7,0.3";
    deint::trainer::TrainConfig abl_cfg;
    EncodeFlags abl_flags;
    abl->add_option("--train-data", abl_train)->required();
    abl->add_option("--test-data", abl_test)->required();
    abl->add_option("--out", abl_out, "output directory")->required();
    abl->add_option("--grid", abl_grid, "weight pairs, e.g. \"1,0;0,1;0.7,0.3\"")
        ->capture_default_str();
    abl->add_option("--epochs", abl_cfg.epochs)->capture_default_str();
    abl->add_option("--lr", abl_cfg.lr)->capture_default_str();
    abl->add_option("--seed", abl_cfg.seed)->capture_default_str();
    abl->add_option("--channels", abl_cfg.out_channels)->capture_default_str();
    abl_flags.attach(abl);

    // report
    auto* rep = app.add_subcommand("report", "merge evaluation CSVs into a comparison table");
    std::string rep_in, rep_out;
    rep->add_option("--in", rep_in, "directory holding evaluation CSVs")->required();
    rep->add_option("--out", rep_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) {
            if (gen_paper) {
                if (gen->count("--window-us") == 0) gen_window = 2560.0;
                if (gen->count("--concurrency-max") == 0) gen_cmax = 11;
                if (gen->count("--pool-train") == 0) gen_pool_train = 75;
                if (gen->count("--pool-test") == 0) gen_pool_test = 65;
                if (gen->count("--train") == 0) gen_train = 1200;
                if (gen->count("--test") == 0) gen_test = 300;
            }
            return cmd_gen(argc, argv, gen_train, gen_test, gen_seed, gen_out, gen_window,
                           gen_cmin, gen_cmax, gen_pool_train, gen_pool_test);
        }
        if (prev->parsed()) {
            if (prev_paper) prev_flags.height = prev_flags.width = 512;
            return cmd_encode_preview(argc, argv, prev_data, prev_index, prev_flags, prev_out);
        }
        if (train->parsed()) {
            if (train_paper) {
                if (train->count("--height") == 0) train_flags.height = 512;
                if (train->count("--width") == 0) train_flags.width = 512;
                if (train->count("--channels") == 0) train_cfg.out_channels = 15;
                if (train->count("--epochs") == 0) train_cfg.epochs = 300;
                if (train->count("--lr") == 0) train_cfg.lr = 1e-5;
            }
            train_cfg.encode = train_flags.to_config();
            train_cfg.permute_targets = !train_no_permute;
            return cmd_train(argc, argv, train_data, train_out, train_cfg, train_flags);
        }
        if (eval->parsed()) {
            if (eval_paper) eval_flags.height = eval_flags.width = 512;
            return cmd_eval(argc, argv, eval_model, eval_data, eval_out, eval_method,
                            eval_flags);
        }
        if (base->parsed()) {
            return cmd_baseline(argc, argv, base_method, base_data, base_out, base_params,
                                base_tune, base_train_data);
        }
        if (abl->parsed()) {
            abl_cfg.encode = abl_flags.to_config();
            return cmd_ablate(argc, argv, abl_train, abl_test, abl_out, abl_grid, abl_cfg,
                              abl_flags);
        }
        if (rep->parsed()) {
            return cmd_report(argc, argv, rep_in, rep_out);
        }
    } catch (const deint::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const deint::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const deint::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
