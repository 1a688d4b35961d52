#pragma once

#include <cstdint>
#include <vector>

#include "cryptoseq/cells.hpp"
#include "cryptoseq/dataset.hpp"

namespace cryptoseq {

double mse(const std::vector<double>& pred, const std::vector<double>& target);
double rmse(const std::vector<double>& pred, const std::vector<double>& target);

/// First/second gradient moments, shapes mirroring the canonical parameter order.
struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long step_count = 0;
};

AdamState make_adam_state(const RecurrentNetwork& net);

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 100; // family defaults: 125 dense, 100 recurrent
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 5.0; // <= 0 disables clipping
    std::uint64_t seed = 42;
};

std::size_t default_batch_size(ModelFamily family);

struct TrainReport {
    std::vector<double> train_loss_curve; // per-epoch mean training MSE
    std::vector<double> val_loss_curve;   // per-epoch full-pass validation MSE
    int best_epoch = -1;                  // argmin of val_loss_curve, -1 when no epochs ran
    double rmse_train = 0.0;              // at the best-epoch snapshot, dropout off
    double rmse_test = 0.0;               // filled by the caller after evaluate()
};

/// One Adam update over the parameter collection; increments step_count.
void adam_step(std::vector<Matrix*>& params, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg);

/// Scales all gradients so their global L2 norm is at most max_norm.
void clip_gradients(Gradients& grads, double max_norm);

/// Variational masks for one sample: fresh input masks, one recurrent mask per
/// layer reused at every timestep. Rate-0 layers get all-keep masks without
/// consuming the stream.
DropoutMasks sample_masks(const NetworkSpec& spec, RandomStream& rng);

/// Mini-batch MSE training with Adam. Shuffles canonically sorted sample
/// indices with the seeded stream each epoch, averages per-sample gradients
/// per batch, resamples dropout masks per sample, and returns the parameter
/// snapshot from the epoch with minimum validation loss.
TrainReport train(RecurrentNetwork& net, const WindowedDataset& train_set,
                  const WindowedDataset& val_set, const TrainConfig& cfg);

/// Test RMSE over next-day predictions, inference path (no dropout).
double evaluate_rmse(const RecurrentNetwork& net, const WindowedDataset& test_set);

std::vector<double> predict_all(const RecurrentNetwork& net, const WindowedDataset& set);

} // namespace cryptoseq
