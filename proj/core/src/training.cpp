#include "cryptoseq/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cryptoseq/errors.hpp"

namespace cryptoseq {

double mse(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.empty() || pred.size() != target.size()) {
        throw ValueError("mse: need equal nonzero lengths, got " + std::to_string(pred.size()) +
                         " and " + std::to_string(target.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - target[i];
        sum += e * e;
    }
    return sum / static_cast<double>(pred.size());
}

double rmse(const std::vector<double>& pred, const std::vector<double>& target) {
    return std::sqrt(mse(pred, target));
}

AdamState make_adam_state(const RecurrentNetwork& net) {
    AdamState state;
    for (const Matrix* p : param_refs(net)) {
        state.m.emplace_back(p->rows(), p->cols());
        state.v.emplace_back(p->rows(), p->cols());
    }
    state.step_count = 0;
    return state;
}

std::size_t default_batch_size(ModelFamily family) {
    return family == ModelFamily::SimpleNN ? 125 : 100;
}

void adam_step(std::vector<Matrix*>& params, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("adam_step: parameter/gradient/state collections differ in size");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double m_corr = 1.0 - std::pow(cfg.beta1, t);
    const double v_corr = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (!params[p]->same_shape(grads[p])) {
            throw ShapeError("adam_step: gradient shape " + grads[p].shape_str() +
                             " does not match parameter shape " + params[p]->shape_str());
        }
        auto& theta = params[p]->values();
        auto& m = state.m[p].values();
        auto& v = state.v[p].values();
        const auto& g = grads[p].values();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = m[i] / m_corr;
            const double v_hat = v[i] / v_corr;
            theta[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

void clip_gradients(Gradients& grads, double max_norm) {
    if (max_norm <= 0.0 || !std::isfinite(max_norm)) return;
    double sq = 0.0;
    for (const Matrix& g : grads) {
        for (double v : g.values()) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    const double factor = max_norm / norm;
    for (Matrix& g : grads) scale_in_place(g, factor);
}

namespace {

Matrix bernoulli_keep_mask(std::size_t n, double rate, RandomStream& rng) {
    Matrix mask(n, 1, 1.0);
    if (rate <= 0.0) return mask; // all-keep, no stream consumption
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < n; ++i) {
        mask(i, 0) = rng.next_unit() < rate ? 0.0 : keep_scale;
    }
    return mask;
}

} // namespace

DropoutMasks sample_masks(const NetworkSpec& spec, RandomStream& rng) {
    DropoutMasks masks;
    std::size_t layer_input = spec.input_width;
    for (std::size_t i = 0; i + 1 < spec.layer_sizes.size(); ++i) {
        const bool is_recurrent_layer = spec.family != ModelFamily::SimpleNN;
        if (!is_recurrent_layer) break;
        const std::size_t hidden = spec.layer_sizes[i];
        masks.input_masks.push_back(bernoulli_keep_mask(layer_input, spec.dropout_rate, rng));
        masks.recurrent_masks.push_back(
            bernoulli_keep_mask(hidden, spec.recurrent_dropout_rate, rng));
        layer_input = hidden;
    }
    return masks;
}

std::vector<double> predict_all(const RecurrentNetwork& net, const WindowedDataset& set) {
    std::vector<double> preds;
    preds.reserve(set.size());
    for (const WindowSample& sample : set.samples) {
        preds.push_back(forward(net, sample.window, std::nullopt).prediction);
    }
    return preds;
}

double evaluate_rmse(const RecurrentNetwork& net, const WindowedDataset& test_set) {
    if (test_set.samples.empty()) {
        throw ValueError("evaluate_rmse: empty dataset");
    }
    // Accumulate in target-date order so the score is invariant to how the
    // caller ordered the samples.
    std::vector<std::size_t> indices(test_set.size());
    std::iota(indices.begin(), indices.end(), 0);
    std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
        return test_set.samples[a].target_date < test_set.samples[b].target_date;
    });
    double sum = 0.0;
    for (std::size_t i : indices) {
        const WindowSample& s = test_set.samples[i];
        const double err = forward(net, s.window, std::nullopt).prediction - s.target;
        sum += err * err;
    }
    return std::sqrt(sum / static_cast<double>(test_set.size()));
}

namespace {

double validation_mse(const RecurrentNetwork& net, const WindowedDataset& val_set) {
    std::vector<std::size_t> indices(val_set.size());
    std::iota(indices.begin(), indices.end(), 0);
    std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
        return val_set.samples[a].target_date < val_set.samples[b].target_date;
    });
    double sum = 0.0;
    for (std::size_t i : indices) {
        const WindowSample& s = val_set.samples[i];
        const double err = forward(net, s.window, std::nullopt).prediction - s.target;
        sum += err * err;
    }
    return sum / static_cast<double>(val_set.size());
}

std::vector<Matrix> snapshot_params(const RecurrentNetwork& net) {
    std::vector<Matrix> snap;
    for (const Matrix* p : param_refs(net)) snap.push_back(*p);
    return snap;
}

void restore_params(RecurrentNetwork& net, const std::vector<Matrix>& snap) {
    auto refs = param_refs(net);
    for (std::size_t i = 0; i < refs.size(); ++i) *refs[i] = snap[i];
}

} // namespace

TrainReport train(RecurrentNetwork& net, const WindowedDataset& train_set,
                  const WindowedDataset& val_set, const TrainConfig& cfg) {
    if (train_set.samples.empty() || val_set.samples.empty()) {
        throw ValueError("train: datasets must be nonempty");
    }
    if (train_set.feature_count() != net.spec.input_width) {
        throw ShapeError("train: dataset has " + std::to_string(train_set.feature_count()) +
                         " features, network expects " + std::to_string(net.spec.input_width));
    }
    if (cfg.batch_size == 0) {
        throw ValueError("train: batch_size must be >= 1");
    }

    TrainReport report;
    if (cfg.epochs == 0) {
        report.rmse_train = evaluate_rmse(net, train_set);
        return report;
    }

    RandomStream rng(cfg.seed);
    AdamState adam = make_adam_state(net);
    auto params = param_refs(net);
    // Dropout families sample masks even at rate 0 (all-keep, no stream use);
    // explicit nonzero rates turn masks on for any recurrent family.
    const bool use_masks =
        net.spec.family != ModelFamily::SimpleNN &&
        (family_uses_dropout(net.spec.family) || net.spec.dropout_rate > 0.0 ||
         net.spec.recurrent_dropout_rate > 0.0);

    // Canonical sample order: sorted by target date. The seeded shuffle then
    // yields the same batches no matter how the caller ordered the samples.
    std::vector<std::size_t> indices(train_set.size());
    std::iota(indices.begin(), indices.end(), 0);
    std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
        return train_set.samples[a].target_date < train_set.samples[b].target_date;
    });

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Matrix> best_params = snapshot_params(net);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the seeded stream.
        for (std::size_t i = indices.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(indices[i - 1], indices[j]);
        }

        double epoch_sq_error = 0.0;
        for (std::size_t batch_start = 0; batch_start < indices.size();
             batch_start += cfg.batch_size) {
            const std::size_t batch_end =
                std::min(batch_start + cfg.batch_size, indices.size());
            const std::size_t batch_n = batch_end - batch_start;

            Gradients batch_grads = zero_gradients(net);
            double batch_sq_error = 0.0;
            for (std::size_t k = batch_start; k < batch_end; ++k) {
                const WindowSample& sample = train_set.samples[indices[k]];
                std::optional<DropoutMasks> masks;
                if (use_masks) masks = sample_masks(net.spec, rng);
                const ForwardTape tape = forward(net, sample.window, masks);
                const double err = tape.prediction - sample.target;
                batch_sq_error += err * err;
                // d/dpred of (pred - y)^2 averaged over the batch.
                const Gradients grads =
                    backward(net, tape, 2.0 * err / static_cast<double>(batch_n), masks);
                for (std::size_t g = 0; g < grads.size(); ++g) {
                    add_in_place(batch_grads[g], grads[g]);
                }
            }
            if (!std::isfinite(batch_sq_error)) {
                throw DivergenceError("train: non-finite loss at epoch " +
                                      std::to_string(epoch) + ", batch " +
                                      std::to_string(batch_start / cfg.batch_size));
            }
            epoch_sq_error += batch_sq_error;
            clip_gradients(batch_grads, cfg.clip_norm);
            adam_step(params, batch_grads, adam, cfg);
        }

        const double train_loss = epoch_sq_error / static_cast<double>(train_set.size());
        const double val_loss = validation_mse(net, val_set);
        if (!std::isfinite(val_loss)) {
            throw DivergenceError("train: non-finite validation loss at epoch " +
                                  std::to_string(epoch));
        }
        report.train_loss_curve.push_back(train_loss);
        report.val_loss_curve.push_back(val_loss);
        if (val_loss < best_val) {
            best_val = val_loss;
            best_params = snapshot_params(net);
            report.best_epoch = static_cast<int>(epoch);
        }
    }

    restore_params(net, best_params);
    report.rmse_train = evaluate_rmse(net, train_set);
    return report;
}

} // namespace cryptoseq
