#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deint/pulsegen.hpp"
#include "deint/rfimage.hpp"
#include "deint/segnet.hpp"

namespace deint::trainer {

struct TrainConfig {
    int epochs = 40;
    double lr = 1e-4;
    double w_purity = 0.7;
    double w_frag = 0.3;
    int out_channels = 8;
    rfimage::EncodeConfig encode;
    std::uint64_t seed = 1;
    std::string checkpoint_path;  // best checkpoint; final lands next to it
    bool permute_targets = true;

    void validate() const;
};

struct LossPoint {
    int step = 0;
    double loss = 0.0;
    double sci = 0.0;
    double scf = 0.0;
};

struct TrainResult {
    segnet::Model model;       // after the last step
    segnet::Model best_model;  // lowest epoch-mean training loss
    double best_epoch_loss = 0.0;
    std::vector<LossPoint> curve;  // one row per step
    int skipped_scenarios = 0;     // emitter_count > N
};

// One scenario per step: encode, forward, softmax, soft confusion matrix,
// combined loss, backward, Adam. Scenario order reshuffles every epoch.
TrainResult train(std::span<const pulsegen::Scenario> train_set, const TrainConfig& config);

struct EvalRow {
    int scenario_id = 0;
    double cp = 0.0;
    double cnfr = 0.0;
    double cdr = 0.0;
    double ari = 0.0;
    double nmi = 0.0;
};

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;
};

struct EvalReport {
    std::string method;
    std::vector<EvalRow> rows;

    MetricStats cp() const;
    MetricStats cnfr() const;
    MetricStats cdr() const;
    MetricStats ari() const;
    MetricStats nmi() const;
};

// Scores one scenario from an externally supplied probability tensor; used
// by evaluate and by oracle tests that bypass the model.
EvalRow score_probs(std::span<const double> probs, int channels, int height, int width,
                    const rfimage::PulseRegistry& registry, int scenario_id);

EvalReport evaluate(const segnet::Model& model, std::span<const pulsegen::Scenario> test_set,
                    const rfimage::EncodeConfig& encode, const std::string& method = "unet");

void write_eval_csv(const std::string& path, const EvalReport& report);
EvalReport read_eval_csv(const std::string& path);
void write_loss_csv(const std::string& path, std::span<const LossPoint> curve);

struct AblationRow {
    double w_purity = 0.0;
    double w_frag = 0.0;
    EvalReport report;
};

// Trains one model per weight pair with a shared seed and evaluates each.
std::vector<AblationRow> ablate(std::span<const pulsegen::Scenario> train_set,
                                std::span<const pulsegen::Scenario> test_set,
                                std::span<const std::pair<double, double>> weight_grid,
                                const TrainConfig& base_config);

}  // namespace deint::trainer
