#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cryptoseq/matrix.hpp"
#include "cryptoseq/random.hpp"

namespace cryptoseq {

/// Gate weights act on the stacked vector [h_prev; x], so every weight matrix
/// is hidden x (hidden + input): the first `hidden` columns read the previous
/// state, the rest read the current input.
struct GruParams {
    Matrix w_update, w_reset, w_cand;
    Matrix b_update, b_reset, b_cand;

    std::size_t hidden() const { return w_update.rows(); }
    std::size_t input() const { return w_update.cols() - w_update.rows(); }
};

struct LstmParams {
    Matrix w_forget, w_input, w_cand, w_output;
    Matrix b_forget, b_input, b_cand, b_output;

    std::size_t hidden() const { return w_forget.rows(); }
    std::size_t input() const { return w_forget.cols() - w_forget.rows(); }
};

struct DenseParams {
    Matrix w;
    Matrix b;
    Activation activation = Activation::Identity;

    std::size_t output() const { return w.rows(); }
    std::size_t input() const { return w.cols(); }
};

using Layer = std::variant<GruParams, LstmParams, DenseParams>;

/// One unrolled GRU timestep, all intermediates retained for BPTT.
struct GruStep {
    Matrix z;    // update gate
    Matrix r;    // reset gate
    Matrix cand; // candidate state
    Matrix h;    // h = (1 - z) .* h_prev + z .* cand
};

struct LstmStep {
    Matrix f;    // forget gate
    Matrix i;    // input gate
    Matrix cand; // candidate cell content
    Matrix c;    // c = f .* c_prev + i .* cand
    Matrix o;    // output gate
    Matrix h;    // h = o .* tanh(c)
};

enum class ModelFamily { SimpleNN, Lstm1, Gru1, Gru1RecurrentDropout, Gru2Dropout };

ModelFamily parse_family(const std::string& name);
std::string family_name(ModelFamily family);

/// Whether training applies dropout masks for this family (possibly at rate 0).
bool family_uses_dropout(ModelFamily family);

struct NetworkSpec {
    ModelFamily family = ModelFamily::Gru1;
    std::size_t lookback = 30;
    std::size_t input_width = 1;
    std::vector<std::size_t> layer_sizes; // fixed per family
    double dropout_rate = 0.0;
    double recurrent_dropout_rate = 0.0;
};

/// Spec for one of the five model families with its fixed topology and the
/// family's default dropout rates. Pass a non-negative rate to override.
NetworkSpec make_spec(ModelFamily family, std::size_t lookback, std::size_t input_width,
                      double dropout_rate = -1.0, double recurrent_dropout_rate = -1.0);

struct RecurrentNetwork {
    NetworkSpec spec;
    std::vector<Layer> layers;
};

/// Variational dropout masks for one sample: one input mask and one recurrent
/// mask per recurrent layer, each reused at every timestep of the sequence.
/// Entries are 0 or 1/(1 - rate) (inverted scaling).
struct DropoutMasks {
    std::vector<Matrix> input_masks;
    std::vector<Matrix> recurrent_masks;
};

struct GruLayerTape {
    std::vector<GruStep> steps;
};

struct LstmLayerTape {
    std::vector<LstmStep> steps;
};

struct DenseLayerTape {
    Matrix input;
    Matrix pre;
    Matrix out;
};

using LayerTape = std::variant<GruLayerTape, LstmLayerTape, DenseLayerTape>;

/// Activation record of one forward pass; input to backward().
struct ForwardTape {
    Matrix window; // lookback rows x input_width cols, row t = day t's features
    std::vector<LayerTape> layers;
    double prediction = 0.0;
};

/// Gradients (and Adam moments) mirror the canonical parameter order:
/// layer by layer; GRU: w_update, w_reset, w_cand, b_update, b_reset, b_cand;
/// LSTM: w_forget, w_input, w_cand, w_output then the four biases;
/// dense: w, b. The model file format depends on this order.
using Gradients = std::vector<Matrix>;

std::vector<Matrix*> param_refs(RecurrentNetwork& net);
std::vector<const Matrix*> param_refs(const RecurrentNetwork& net);
std::size_t param_count(const NetworkSpec& spec);
Gradients zero_gradients(const RecurrentNetwork& net);

/// Glorot-uniform weights (per column block for recurrent layers), zero biases.
RecurrentNetwork init_network(const NetworkSpec& spec, RandomStream& rng);

GruStep gru_step(const GruParams& p, const Matrix& x, const Matrix& h_prev);
LstmStep lstm_step(const LstmParams& p, const Matrix& x, const Matrix& h_prev,
                   const Matrix& c_prev);

/// Unrolls the network over a window (row t = features of day t), hidden and
/// cell states starting at zero, and returns the scalar prediction plus the
/// full activation tape. masks == nullopt is the inference path.
ForwardTape forward(const RecurrentNetwork& net, const Matrix& window,
                    const std::optional<DropoutMasks>& masks);

/// Exact reverse-mode gradients of d_loss_d_pred * prediction with respect to
/// every parameter, accumulated across all timesteps.
Gradients backward(const RecurrentNetwork& net, const ForwardTape& tape, double d_loss_d_pred,
                   const std::optional<DropoutMasks>& masks);

} // namespace cryptoseq
