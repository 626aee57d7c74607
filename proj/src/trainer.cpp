#include "deint/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "deint/clustmetrics.hpp"
#include "deint/common.hpp"
#include "deint/scmloss.hpp"

namespace deint::trainer {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (lr <= 0.0) throw ConfigError("train: learning rate must be > 0");
    if (w_purity < 0.0 || w_frag < 0.0) throw ConfigError("train: loss weights must be >= 0");
    if (out_channels < 2) throw ConfigError("train: out_channels must be >= 2");
    encode.validate();
}

namespace {

gradkit::Tensor image_tensor(gradkit::Tape& tape, const rfimage::EncodedImage& image) {
    return tape.tensor({2, image.height, image.width}, image.data);
}

}  // namespace

TrainResult train(std::span<const pulsegen::Scenario> train_set, const TrainConfig& config) {
    config.validate();
    if (train_set.empty()) throw ConfigError("train: empty training set");

    segnet::UNetConfig net_cfg;
    net_cfg.in_channels = 2;
    net_cfg.base_channels = 8;
    net_cfg.depth = 3;
    net_cfg.out_channels = config.out_channels;
    net_cfg.seed = mix_seed(config.seed, 0x11);

    TrainResult result;
    result.model = segnet::init_model(net_cfg);
    result.best_model = result.model;
    result.best_epoch_loss = std::numeric_limits<double>::infinity();

    gradkit::AdamConfig adam_cfg;
    adam_cfg.lr = config.lr;
    gradkit::AdamState adam(adam_cfg, result.model.params);

    Rng shuffle_rng(mix_seed(config.seed, 0x22));
    std::vector<int> warned;
    int step = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<int> order(train_set.size());
        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        int epoch_steps = 0;
        for (int idx : order) {
            const pulsegen::Scenario& scenario = train_set[idx];
            if (scenario.emitter_count > config.out_channels) {
                if (std::find(warned.begin(), warned.end(), idx) == warned.end()) {
                    std::fprintf(stderr,
                                 "train: skipping scenario %d with %d emitters (> %d channels)\n",
                                 idx, scenario.emitter_count, config.out_channels);
                    warned.push_back(idx);
                    ++result.skipped_scenarios;
                }
                continue;
            }

            auto [image, registry] = rfimage::encode(scenario, config.encode);
            std::vector<int> labels;
            labels.reserve(registry.entries.size());
            for (const auto& e : registry.entries) labels.push_back(e.emitter_id);
            if (config.permute_targets)
                labels = scmloss::permute_targets(labels, mix_seed(config.seed, 0x33, step));

            gradkit::Tape tape;
            const gradkit::Tensor input = image_tensor(tape, image);
            segnet::ForwardResult fwd = segnet::forward(tape, result.model, input, true);
            const gradkit::Tensor probs = gradkit::softmax_channels(fwd.logits);
            const scmloss::SoftConfusionMatrix scm =
                scmloss::build_scm(probs, registry, scenario.emitter_count, labels);
            const scmloss::CombinedLoss loss =
                scmloss::combined_loss(scm, config.w_purity, config.w_frag);

            const double loss_v = loss.total.scalar();
            if (!std::isfinite(loss_v))
                throw NumericError("train: non-finite loss at step " + std::to_string(step) +
                                   " (scenario " + std::to_string(idx) + ", epoch " +
                                   std::to_string(epoch) + ")");

            tape.backward(loss.total);
            for (std::size_t k = 0; k < result.model.params.size(); ++k)
                result.model.params[k].grad = fwd.param_tensors[k].grad();
            adam.step(result.model.params);

            result.curve.push_back({step, loss_v, loss.sci.scalar(), loss.scf.scalar()});
            epoch_loss += loss_v;
            ++epoch_steps;
            ++step;
        }

        if (epoch_steps == 0)
            throw ConfigError("train: every scenario exceeds the channel count");
        epoch_loss /= epoch_steps;
        if (epoch_loss < result.best_epoch_loss) {
            result.best_epoch_loss = epoch_loss;
            result.best_model = result.model;
        }
    }

    if (!config.checkpoint_path.empty()) {
        segnet::save_checkpoint(result.best_model, config.checkpoint_path);
        segnet::save_checkpoint(result.model, config.checkpoint_path + ".final");
    }
    return result;
}

namespace {

EvalRow score_labels_row(std::span<const int> truth, std::span<const int> pred, int scenario_id) {
    const clustmetrics::LabelScores s = clustmetrics::score_labels(truth, pred);
    return {scenario_id, s.cp, s.cnfr, s.cdr, s.ari, s.nmi};
}

}  // namespace

EvalRow score_probs(std::span<const double> probs, int channels, int height, int width,
                    const rfimage::PulseRegistry& registry, int scenario_id) {
    const std::vector<int> pred = rfimage::decode(probs, channels, height, width, registry);
    std::vector<int> truth;
    truth.reserve(registry.entries.size());
    for (const auto& e : registry.entries) truth.push_back(e.emitter_id);
    return score_labels_row(truth, pred, scenario_id);
}

namespace {

MetricStats stats_of(const std::vector<EvalRow>& rows, double EvalRow::* field) {
    MetricStats st;
    if (rows.empty()) return st;
    for (const EvalRow& r : rows) st.mean += r.*field;
    st.mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (const EvalRow& r : rows) {
        const double d = r.*field - st.mean;
        var += d * d;
    }
    st.stddev = std::sqrt(var / static_cast<double>(rows.size()));
    return st;
}

}  // namespace

MetricStats EvalReport::cp() const { return stats_of(rows, &EvalRow::cp); }
MetricStats EvalReport::cnfr() const { return stats_of(rows, &EvalRow::cnfr); }
MetricStats EvalReport::cdr() const { return stats_of(rows, &EvalRow::cdr); }
MetricStats EvalReport::ari() const { return stats_of(rows, &EvalRow::ari); }
MetricStats EvalReport::nmi() const { return stats_of(rows, &EvalRow::nmi); }

EvalReport evaluate(const segnet::Model& model, std::span<const pulsegen::Scenario> test_set,
                    const rfimage::EncodeConfig& encode, const std::string& method) {
    EvalReport report;
    report.method = method;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const pulsegen::Scenario& scenario = test_set[i];
        auto [image, registry] = rfimage::encode(scenario, encode);

        gradkit::Tape tape;
        const gradkit::Tensor input = image_tensor(tape, image);
        segnet::ForwardResult fwd = segnet::forward(tape, model, input, false);
        const gradkit::Tensor probs = gradkit::softmax_channels(fwd.logits);

        report.rows.push_back(score_probs(probs.values(), model.config.out_channels,
                                          encode.height, encode.width, registry,
                                          static_cast<int>(i)));
    }
    return report;
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_eval_csv: cannot open " + path);
    out << "scenario_id,method,cp,cnfr,cdr,ari,nmi\n";
    char buf[256];
    for (const EvalRow& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.scenario_id,
                      report.method.c_str(), r.cp, r.cnfr, r.cdr, r.ari, r.nmi);
        out << buf;
    }
    if (!out) throw DataError("write_eval_csv: write failed for " + path);
}

EvalReport read_eval_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("read_eval_csv: cannot open " + path);
    EvalReport report;
    std::string line;
    if (!std::getline(in, line) || line.rfind("scenario_id,method,", 0) != 0)
        throw DataError("read_eval_csv: " + path + " is not an evaluation report");
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        EvalRow r;
        try {
            std::getline(ls, field, ',');
            r.scenario_id = std::stoi(field);
            std::getline(ls, field, ',');
            const std::string method = field;
            std::getline(ls, field, ',');
            r.cp = std::stod(field);
            std::getline(ls, field, ',');
            r.cnfr = std::stod(field);
            std::getline(ls, field, ',');
            r.cdr = std::stod(field);
            std::getline(ls, field, ',');
            r.ari = std::stod(field);
            std::getline(ls, field, ',');
            r.nmi = std::stod(field);
            if (report.method.empty()) report.method = method;
        } catch (const std::exception&) {
            throw DataError("read_eval_csv: " + path + ":" + std::to_string(line_no) +
                            ": malformed row");
        }
        report.rows.push_back(r);
    }
    return report;
}

void write_loss_csv(const std::string& path, std::span<const LossPoint> curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_loss_csv: cannot open " + path);
    out << "step,loss,sci,scf\n";
    char buf[200];
    for (const LossPoint& p : curve) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", p.step, p.loss, p.sci, p.scf);
        out << buf;
    }
    if (!out) throw DataError("write_loss_csv: write failed for " + path);
}

std::vector<AblationRow> ablate(std::span<const pulsegen::Scenario> train_set,
                                std::span<const pulsegen::Scenario> test_set,
                                std::span<const std::pair<double, double>> weight_grid,
                                const TrainConfig& base_config) {
    if (weight_grid.empty()) throw ConfigError("ablate: empty weight grid");
    std::vector<AblationRow> rows;
    for (const auto& [wp, wf] : weight_grid) {
        TrainConfig cfg = base_config;
        cfg.w_purity = wp;
        cfg.w_frag = wf;
        cfg.checkpoint_path.clear();
        const TrainResult trained = train(train_set, cfg);
        std::ostringstream name;
        name << "unet(wp=" << wp << ",wf=" << wf << ")";
        AblationRow row;
        row.w_purity = wp;
        row.w_frag = wf;
        row.report = evaluate(trained.best_model, test_set, cfg.encode, name.str());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace deint::trainer
