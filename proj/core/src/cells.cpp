#include "cryptoseq/cells.hpp"

#include <cmath>

#include "cryptoseq/errors.hpp"

namespace cryptoseq {

namespace {

Matrix glorot_matrix(std::size_t rows, std::size_t cols, std::size_t recurrent_cols,
                     std::size_t input_fan_in, RandomStream& rng) {
    // Column block [0, recurrent_cols) reads the previous state, the rest reads
    // the layer input; each block gets its own Glorot limit.
    const double rec_limit = std::sqrt(6.0 / static_cast<double>(rows + rows));
    const double in_limit = std::sqrt(6.0 / static_cast<double>(input_fan_in + rows));
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double limit = c < recurrent_cols ? rec_limit : in_limit;
            m(r, c) = rng.next_uniform(-limit, limit);
        }
    }
    return m;
}

Matrix glorot_dense(std::size_t out, std::size_t in, RandomStream& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix m(out, in);
    for (double& v : m.values()) v = rng.next_uniform(-limit, limit);
    return m;
}

GruParams make_gru(std::size_t hidden, std::size_t input, RandomStream& rng) {
    GruParams p;
    p.w_update = glorot_matrix(hidden, hidden + input, hidden, input, rng);
    p.w_reset = glorot_matrix(hidden, hidden + input, hidden, input, rng);
    p.w_cand = glorot_matrix(hidden, hidden + input, hidden, input, rng);
    p.b_update = Matrix(hidden, 1);
    p.b_reset = Matrix(hidden, 1);
    p.b_cand = Matrix(hidden, 1);
    return p;
}

LstmParams make_lstm(std::size_t hidden, std::size_t input, RandomStream& rng) {
    LstmParams p;
    p.w_forget = glorot_matrix(hidden, hidden + input, hidden, input, rng);
    p.w_input = glorot_matrix(hidden, hidden + input, hidden, input, rng);
    p.w_cand = glorot_matrix(hidden, hidden + input, hidden, input, rng);
    p.w_output = glorot_matrix(hidden, hidden + input, hidden, input, rng);
    p.b_forget = Matrix(hidden, 1);
    p.b_input = Matrix(hidden, 1);
    p.b_cand = Matrix(hidden, 1);
    p.b_output = Matrix(hidden, 1);
    return p;
}

DenseParams make_dense(std::size_t out, std::size_t in, Activation act, RandomStream& rng) {
    DenseParams p;
    p.w = glorot_dense(out, in, rng);
    p.b = Matrix(out, 1);
    p.activation = act;
    return p;
}

void split_stacked(const Matrix& stacked, std::size_t hidden, Matrix& top, Matrix& bottom) {
    top = Matrix(hidden, 1);
    bottom = Matrix(stacked.rows() - hidden, 1);
    for (std::size_t i = 0; i < hidden; ++i) top(i, 0) = stacked(i, 0);
    for (std::size_t i = hidden; i < stacked.rows(); ++i) bottom(i - hidden, 0) = stacked(i, 0);
}

Matrix sigmoid_derivative_from_output(const Matrix& s) {
    Matrix out = s;
    for (double& v : out.values()) v = v * (1.0 - v);
    return out;
}

Matrix tanh_derivative_from_output(const Matrix& t) {
    Matrix out = t;
    for (double& v : out.values()) v = 1.0 - v * v;
    return out;
}

GruStep gru_step_masked(const GruParams& p, const Matrix& x_drop, const Matrix& h_prev,
                        const Matrix& h_drop) {
    const Matrix u = concat_columns(h_drop, x_drop);
    GruStep step;
    step.z = activate(add(matmul(p.w_update, u), p.b_update), Activation::Sigmoid);
    step.r = activate(add(matmul(p.w_reset, u), p.b_reset), Activation::Sigmoid);
    const Matrix v = concat_columns(hadamard(step.r, h_drop), x_drop);
    step.cand = activate(add(matmul(p.w_cand, v), p.b_cand), Activation::Tanh);
    Matrix h(h_prev.rows(), 1);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        h(i, 0) = (1.0 - step.z(i, 0)) * h_prev(i, 0) + step.z(i, 0) * step.cand(i, 0);
    }
    step.h = h;
    return step;
}

LstmStep lstm_step_masked(const LstmParams& p, const Matrix& x_drop, const Matrix& h_drop,
                          const Matrix& c_prev) {
    const Matrix u = concat_columns(h_drop, x_drop);
    LstmStep step;
    step.f = activate(add(matmul(p.w_forget, u), p.b_forget), Activation::Sigmoid);
    step.i = activate(add(matmul(p.w_input, u), p.b_input), Activation::Sigmoid);
    step.cand = activate(add(matmul(p.w_cand, u), p.b_cand), Activation::Tanh);
    step.c = add(hadamard(step.f, c_prev), hadamard(step.i, step.cand));
    step.o = activate(add(matmul(p.w_output, u), p.b_output), Activation::Sigmoid);
    step.h = hadamard(step.o, activate(step.c, Activation::Tanh));
    return step;
}

bool is_recurrent(const Layer& layer) {
    return !std::holds_alternative<DenseParams>(layer);
}

} // namespace

ModelFamily parse_family(const std::string& name) {
    if (name == "SimpleNN") return ModelFamily::SimpleNN;
    if (name == "LSTM1") return ModelFamily::Lstm1;
    if (name == "GRU1") return ModelFamily::Gru1;
    if (name == "GRU1RecurrentDropout") return ModelFamily::Gru1RecurrentDropout;
    if (name == "GRU2Dropout") return ModelFamily::Gru2Dropout;
    throw ValueError("parse_family: unknown model family '" + name + "'");
}

std::string family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::SimpleNN: return "SimpleNN";
        case ModelFamily::Lstm1: return "LSTM1";
        case ModelFamily::Gru1: return "GRU1";
        case ModelFamily::Gru1RecurrentDropout: return "GRU1RecurrentDropout";
        case ModelFamily::Gru2Dropout: return "GRU2Dropout";
    }
    throw ValueError("family_name: invalid family");
}

bool family_uses_dropout(ModelFamily family) {
    switch (family) {
        case ModelFamily::SimpleNN:
        case ModelFamily::Gru1:
            return false;
        case ModelFamily::Lstm1:
        case ModelFamily::Gru1RecurrentDropout:
        case ModelFamily::Gru2Dropout:
            return true;
    }
    return false;
}

NetworkSpec make_spec(ModelFamily family, std::size_t lookback, std::size_t input_width,
                      double dropout_rate, double recurrent_dropout_rate) {
    if (lookback == 0 || input_width == 0) {
        throw ValueError("make_spec: lookback and input_width must be positive");
    }
    NetworkSpec spec;
    spec.family = family;
    spec.lookback = lookback;
    spec.input_width = input_width;
    switch (family) {
        case ModelFamily::SimpleNN:
            spec.layer_sizes = {25, 1};
            spec.dropout_rate = 0.0;
            spec.recurrent_dropout_rate = 0.0;
            break;
        case ModelFamily::Lstm1:
            spec.layer_sizes = {50, 1};
            spec.dropout_rate = 0.0;
            spec.recurrent_dropout_rate = 0.1;
            break;
        case ModelFamily::Gru1:
            spec.layer_sizes = {50, 1};
            spec.dropout_rate = 0.0;
            spec.recurrent_dropout_rate = 0.0;
            break;
        case ModelFamily::Gru1RecurrentDropout:
            spec.layer_sizes = {50, 1};
            spec.dropout_rate = 0.0;
            spec.recurrent_dropout_rate = 0.1;
            break;
        case ModelFamily::Gru2Dropout:
            spec.layer_sizes = {50, 10, 1};
            spec.dropout_rate = 0.1;
            spec.recurrent_dropout_rate = 0.1;
            break;
    }
    if (dropout_rate >= 0.0) spec.dropout_rate = dropout_rate;
    if (recurrent_dropout_rate >= 0.0) spec.recurrent_dropout_rate = recurrent_dropout_rate;
    if (spec.dropout_rate >= 1.0 || spec.recurrent_dropout_rate >= 1.0) {
        throw ValueError("make_spec: dropout rates must lie in [0, 1)");
    }
    return spec;
}

RecurrentNetwork init_network(const NetworkSpec& spec, RandomStream& rng) {
    RecurrentNetwork net;
    net.spec = spec;
    switch (spec.family) {
        case ModelFamily::SimpleNN: {
            const std::size_t flat = spec.lookback * spec.input_width;
            net.layers.push_back(make_dense(spec.layer_sizes[0], flat, Activation::Tanh, rng));
            net.layers.push_back(
                make_dense(spec.layer_sizes[1], spec.layer_sizes[0], Activation::Identity, rng));
            break;
        }
        case ModelFamily::Lstm1:
            net.layers.push_back(make_lstm(spec.layer_sizes[0], spec.input_width, rng));
            net.layers.push_back(
                make_dense(spec.layer_sizes[1], spec.layer_sizes[0], Activation::Identity, rng));
            break;
        case ModelFamily::Gru1:
        case ModelFamily::Gru1RecurrentDropout:
            net.layers.push_back(make_gru(spec.layer_sizes[0], spec.input_width, rng));
            net.layers.push_back(
                make_dense(spec.layer_sizes[1], spec.layer_sizes[0], Activation::Identity, rng));
            break;
        case ModelFamily::Gru2Dropout:
            net.layers.push_back(make_gru(spec.layer_sizes[0], spec.input_width, rng));
            net.layers.push_back(make_gru(spec.layer_sizes[1], spec.layer_sizes[0], rng));
            net.layers.push_back(
                make_dense(spec.layer_sizes[2], spec.layer_sizes[1], Activation::Identity, rng));
            break;
    }
    return net;
}

std::vector<Matrix*> param_refs(RecurrentNetwork& net) {
    std::vector<Matrix*> refs;
    for (Layer& layer : net.layers) {
        if (auto* g = std::get_if<GruParams>(&layer)) {
            refs.insert(refs.end(), {&g->w_update, &g->w_reset, &g->w_cand, &g->b_update,
                                     &g->b_reset, &g->b_cand});
        } else if (auto* l = std::get_if<LstmParams>(&layer)) {
            refs.insert(refs.end(), {&l->w_forget, &l->w_input, &l->w_cand, &l->w_output,
                                     &l->b_forget, &l->b_input, &l->b_cand, &l->b_output});
        } else {
            auto& d = std::get<DenseParams>(layer);
            refs.insert(refs.end(), {&d.w, &d.b});
        }
    }
    return refs;
}

std::vector<const Matrix*> param_refs(const RecurrentNetwork& net) {
    auto mutable_refs = param_refs(const_cast<RecurrentNetwork&>(net));
    return std::vector<const Matrix*>(mutable_refs.begin(), mutable_refs.end());
}

std::size_t param_count(const NetworkSpec& spec) {
    RandomStream rng(0);
    RecurrentNetwork net = init_network(spec, rng);
    std::size_t count = 0;
    for (const Matrix* m : param_refs(net)) count += m->size();
    return count;
}

Gradients zero_gradients(const RecurrentNetwork& net) {
    Gradients grads;
    for (const Matrix* m : param_refs(net)) {
        grads.emplace_back(m->rows(), m->cols());
    }
    return grads;
}

GruStep gru_step(const GruParams& p, const Matrix& x, const Matrix& h_prev) {
    if (x.cols() != 1 || x.rows() != p.input()) {
        throw ShapeError("gru_step: input must be " + std::to_string(p.input()) + "x1, got " +
                         x.shape_str());
    }
    if (h_prev.cols() != 1 || h_prev.rows() != p.hidden()) {
        throw ShapeError("gru_step: state must be " + std::to_string(p.hidden()) + "x1, got " +
                         h_prev.shape_str());
    }
    return gru_step_masked(p, x, h_prev, h_prev);
}

LstmStep lstm_step(const LstmParams& p, const Matrix& x, const Matrix& h_prev,
                   const Matrix& c_prev) {
    if (x.cols() != 1 || x.rows() != p.input()) {
        throw ShapeError("lstm_step: input must be " + std::to_string(p.input()) + "x1, got " +
                         x.shape_str());
    }
    if (h_prev.cols() != 1 || h_prev.rows() != p.hidden() || !c_prev.same_shape(h_prev)) {
        throw ShapeError("lstm_step: state must be " + std::to_string(p.hidden()) + "x1, got h " +
                         h_prev.shape_str() + " and c " + c_prev.shape_str());
    }
    return lstm_step_masked(p, x, h_prev, c_prev);
}

ForwardTape forward(const RecurrentNetwork& net, const Matrix& window,
                    const std::optional<DropoutMasks>& masks) {
    const NetworkSpec& spec = net.spec;
    if (window.rows() != spec.lookback || window.cols() != spec.input_width) {
        throw ShapeError("forward: window must be " + std::to_string(spec.lookback) + "x" +
                         std::to_string(spec.input_width) + ", got " + window.shape_str());
    }

    ForwardTape tape;
    tape.window = window;

    bool vector_mode = spec.family == ModelFamily::SimpleNN;
    Matrix vec;
    std::vector<Matrix> seq;
    if (vector_mode) {
        // Flattened row-major: day 0 features first, day L-1 last.
        vec = Matrix(window.size(), 1);
        for (std::size_t i = 0; i < window.size(); ++i) vec(i, 0) = window.values()[i];
    } else {
        seq.reserve(spec.lookback);
        for (std::size_t t = 0; t < spec.lookback; ++t) seq.push_back(window.row_as_column(t));
    }

    std::size_t rec_index = 0;
    for (const Layer& layer : net.layers) {
        if (const auto* gru = std::get_if<GruParams>(&layer)) {
            const Matrix* in_mask = masks ? &masks->input_masks[rec_index] : nullptr;
            const Matrix* rec_mask = masks ? &masks->recurrent_masks[rec_index] : nullptr;
            GruLayerTape layer_tape;
            layer_tape.steps.reserve(seq.size());
            Matrix h(gru->hidden(), 1);
            for (const Matrix& x : seq) {
                const Matrix x_drop = in_mask ? hadamard(*in_mask, x) : x;
                const Matrix h_drop = rec_mask ? hadamard(*rec_mask, h) : h;
                layer_tape.steps.push_back(gru_step_masked(*gru, x_drop, h, h_drop));
                h = layer_tape.steps.back().h;
            }
            for (std::size_t t = 0; t < seq.size(); ++t) seq[t] = layer_tape.steps[t].h;
            tape.layers.emplace_back(std::move(layer_tape));
            ++rec_index;
        } else if (const auto* lstm = std::get_if<LstmParams>(&layer)) {
            const Matrix* in_mask = masks ? &masks->input_masks[rec_index] : nullptr;
            const Matrix* rec_mask = masks ? &masks->recurrent_masks[rec_index] : nullptr;
            LstmLayerTape layer_tape;
            layer_tape.steps.reserve(seq.size());
            Matrix h(lstm->hidden(), 1);
            Matrix c(lstm->hidden(), 1);
            for (const Matrix& x : seq) {
                const Matrix x_drop = in_mask ? hadamard(*in_mask, x) : x;
                const Matrix h_drop = rec_mask ? hadamard(*rec_mask, h) : h;
                layer_tape.steps.push_back(lstm_step_masked(*lstm, x_drop, h_drop, c));
                h = layer_tape.steps.back().h;
                c = layer_tape.steps.back().c;
            }
            for (std::size_t t = 0; t < seq.size(); ++t) seq[t] = layer_tape.steps[t].h;
            tape.layers.emplace_back(std::move(layer_tape));
            ++rec_index;
        } else {
            const auto& dense = std::get<DenseParams>(layer);
            if (!vector_mode) {
                vec = seq.back();
                vector_mode = true;
            }
            DenseLayerTape layer_tape;
            layer_tape.input = vec;
            layer_tape.pre = add(matmul(dense.w, vec), dense.b);
            layer_tape.out = activate(layer_tape.pre, dense.activation);
            vec = layer_tape.out;
            tape.layers.emplace_back(std::move(layer_tape));
        }
    }
    tape.prediction = vec(0, 0);
    return tape;
}

namespace {

struct GradWriter {
    Gradients& grads;
    std::size_t base; // index of this layer's first gradient slot
};

void gru_backward_layer(const GruParams& p, const GruLayerTape& layer_tape,
                        const std::vector<Matrix>& inputs, const std::vector<Matrix>& d_top,
                        const Matrix* in_mask, const Matrix* rec_mask, GradWriter w,
                        std::vector<Matrix>* d_inputs) {
    Matrix& g_wz = w.grads[w.base + 0];
    Matrix& g_wr = w.grads[w.base + 1];
    Matrix& g_wc = w.grads[w.base + 2];
    Matrix& g_bz = w.grads[w.base + 3];
    Matrix& g_br = w.grads[w.base + 4];
    Matrix& g_bc = w.grads[w.base + 5];

    const std::size_t hidden = p.hidden();
    Matrix dh_carry(hidden, 1);
    for (std::size_t ti = layer_tape.steps.size(); ti-- > 0;) {
        const GruStep& step = layer_tape.steps[ti];
        const Matrix h_prev = ti > 0 ? layer_tape.steps[ti - 1].h : Matrix(hidden, 1);
        const Matrix h_drop = rec_mask ? hadamard(*rec_mask, h_prev) : h_prev;
        const Matrix x_drop = in_mask ? hadamard(*in_mask, inputs[ti]) : inputs[ti];
        const Matrix u = concat_columns(h_drop, x_drop);
        const Matrix v = concat_columns(hadamard(step.r, h_drop), x_drop);

        const Matrix dh = add(d_top[ti], dh_carry);

        const Matrix dz = hadamard(dh, subtract(step.cand, h_prev));
        const Matrix dpre_z = hadamard(dz, sigmoid_derivative_from_output(step.z));
        const Matrix dcand = hadamard(dh, step.z);
        const Matrix dpre_c = hadamard(dcand, tanh_derivative_from_output(step.cand));

        Matrix dh_prev(hidden, 1);
        for (std::size_t i = 0; i < hidden; ++i) {
            dh_prev(i, 0) = dh(i, 0) * (1.0 - step.z(i, 0));
        }

        add_outer_product(g_wc, dpre_c, v);
        add_in_place(g_bc, dpre_c);

        const Matrix dv = matmul_transposed(p.w_cand, dpre_c);
        Matrix dv_h, dv_x;
        split_stacked(dv, hidden, dv_h, dv_x);

        const Matrix dr = hadamard(dv_h, h_drop);
        Matrix dh_drop = hadamard(dv_h, step.r);
        const Matrix dpre_r = hadamard(dr, sigmoid_derivative_from_output(step.r));

        add_outer_product(g_wr, dpre_r, u);
        add_in_place(g_br, dpre_r);
        add_outer_product(g_wz, dpre_z, u);
        add_in_place(g_bz, dpre_z);

        const Matrix du = add(matmul_transposed(p.w_update, dpre_z),
                              matmul_transposed(p.w_reset, dpre_r));
        Matrix du_h, du_x;
        split_stacked(du, hidden, du_h, du_x);
        add_in_place(dh_drop, du_h);

        Matrix dx_drop = add(dv_x, du_x);
        if (d_inputs) {
            (*d_inputs)[ti] = in_mask ? hadamard(*in_mask, dx_drop) : dx_drop;
        }
        add_in_place(dh_prev, rec_mask ? hadamard(*rec_mask, dh_drop) : dh_drop);
        dh_carry = dh_prev;
    }
}

void lstm_backward_layer(const LstmParams& p, const LstmLayerTape& layer_tape,
                         const std::vector<Matrix>& inputs, const std::vector<Matrix>& d_top,
                         const Matrix* in_mask, const Matrix* rec_mask, GradWriter w,
                         std::vector<Matrix>* d_inputs) {
    Matrix& g_wf = w.grads[w.base + 0];
    Matrix& g_wi = w.grads[w.base + 1];
    Matrix& g_wc = w.grads[w.base + 2];
    Matrix& g_wo = w.grads[w.base + 3];
    Matrix& g_bf = w.grads[w.base + 4];
    Matrix& g_bi = w.grads[w.base + 5];
    Matrix& g_bc = w.grads[w.base + 6];
    Matrix& g_bo = w.grads[w.base + 7];

    const std::size_t hidden = p.hidden();
    Matrix dh_carry(hidden, 1);
    Matrix dc_carry(hidden, 1);
    for (std::size_t ti = layer_tape.steps.size(); ti-- > 0;) {
        const LstmStep& step = layer_tape.steps[ti];
        const Matrix h_prev = ti > 0 ? layer_tape.steps[ti - 1].h : Matrix(hidden, 1);
        const Matrix c_prev = ti > 0 ? layer_tape.steps[ti - 1].c : Matrix(hidden, 1);
        const Matrix h_drop = rec_mask ? hadamard(*rec_mask, h_prev) : h_prev;
        const Matrix x_drop = in_mask ? hadamard(*in_mask, inputs[ti]) : inputs[ti];
        const Matrix u = concat_columns(h_drop, x_drop);

        const Matrix dh = add(d_top[ti], dh_carry);
        const Matrix tanh_c = activate(step.c, Activation::Tanh);

        const Matrix d_o = hadamard(dh, tanh_c);
        const Matrix dpre_o = hadamard(d_o, sigmoid_derivative_from_output(step.o));

        Matrix dc = dc_carry;
        for (std::size_t i = 0; i < hidden; ++i) {
            dc(i, 0) += dh(i, 0) * step.o(i, 0) * (1.0 - tanh_c(i, 0) * tanh_c(i, 0));
        }

        const Matrix df = hadamard(dc, c_prev);
        const Matrix dpre_f = hadamard(df, sigmoid_derivative_from_output(step.f));
        const Matrix di = hadamard(dc, step.cand);
        const Matrix dpre_i = hadamard(di, sigmoid_derivative_from_output(step.i));
        const Matrix dcand = hadamard(dc, step.i);
        const Matrix dpre_c = hadamard(dcand, tanh_derivative_from_output(step.cand));

        dc_carry = hadamard(dc, step.f);

        add_outer_product(g_wf, dpre_f, u);
        add_in_place(g_bf, dpre_f);
        add_outer_product(g_wi, dpre_i, u);
        add_in_place(g_bi, dpre_i);
        add_outer_product(g_wc, dpre_c, u);
        add_in_place(g_bc, dpre_c);
        add_outer_product(g_wo, dpre_o, u);
        add_in_place(g_bo, dpre_o);

        Matrix du = matmul_transposed(p.w_forget, dpre_f);
        add_in_place(du, matmul_transposed(p.w_input, dpre_i));
        add_in_place(du, matmul_transposed(p.w_cand, dpre_c));
        add_in_place(du, matmul_transposed(p.w_output, dpre_o));

        Matrix du_h, du_x;
        split_stacked(du, hidden, du_h, du_x);
        if (d_inputs) {
            (*d_inputs)[ti] = in_mask ? hadamard(*in_mask, du_x) : du_x;
        }
        dh_carry = rec_mask ? hadamard(*rec_mask, du_h) : du_h;
    }
}

} // namespace

Gradients backward(const RecurrentNetwork& net, const ForwardTape& tape, double d_loss_d_pred,
                   const std::optional<DropoutMasks>& masks) {
    if (tape.layers.size() != net.layers.size()) {
        throw ValueError("backward: tape does not match network layer count");
    }
    Gradients grads = zero_gradients(net);

    // Gradient slot offset of each layer in the canonical order.
    std::vector<std::size_t> bases(net.layers.size());
    std::size_t offset = 0;
    std::vector<std::size_t> rec_indices(net.layers.size(), 0);
    std::size_t rec_counter = 0;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        bases[l] = offset;
        if (std::holds_alternative<GruParams>(net.layers[l])) {
            offset += 6;
            rec_indices[l] = rec_counter++;
        } else if (std::holds_alternative<LstmParams>(net.layers[l])) {
            offset += 8;
            rec_indices[l] = rec_counter++;
        } else {
            offset += 2;
        }
    }

    const std::size_t lookback = net.spec.lookback;

    // Inputs fed into each layer during the forward pass.
    auto layer_inputs = [&](std::size_t l) {
        std::vector<Matrix> inputs;
        inputs.reserve(lookback);
        if (l == 0) {
            for (std::size_t t = 0; t < lookback; ++t) {
                inputs.push_back(tape.window.row_as_column(t));
            }
        } else if (const auto* g = std::get_if<GruLayerTape>(&tape.layers[l - 1])) {
            for (const GruStep& s : g->steps) inputs.push_back(s.h);
        } else if (const auto* ls = std::get_if<LstmLayerTape>(&tape.layers[l - 1])) {
            for (const LstmStep& s : ls->steps) inputs.push_back(s.h);
        } else {
            throw ValueError("backward: recurrent layer stacked on a dense layer");
        }
        return inputs;
    };

    // Walk the dense head first: gradient flows down a vector chain until the
    // topmost recurrent layer (or the flattened window for SimpleNN).
    Matrix d_vec(1, 1);
    d_vec(0, 0) = d_loss_d_pred;

    std::size_t l = net.layers.size();
    while (l > 0 && std::holds_alternative<DenseParams>(net.layers[l - 1])) {
        --l;
        const auto& dense = std::get<DenseParams>(net.layers[l]);
        const auto& dtape = std::get<DenseLayerTape>(tape.layers[l]);
        Matrix dpre;
        switch (dense.activation) {
            case Activation::Identity: dpre = d_vec; break;
            case Activation::Tanh:
                dpre = hadamard(d_vec, tanh_derivative_from_output(dtape.out));
                break;
            case Activation::Sigmoid:
                dpre = hadamard(d_vec, sigmoid_derivative_from_output(dtape.out));
                break;
        }
        add_outer_product(grads[bases[l] + 0], dpre, dtape.input);
        add_in_place(grads[bases[l] + 1], dpre);
        d_vec = matmul_transposed(dense.w, dpre);
    }

    if (l == 0) {
        return grads; // SimpleNN: d_vec is the window gradient, not needed.
    }

    // d_vec is the gradient on the last hidden state of the topmost recurrent
    // layer; earlier timesteps receive gradient only through the recurrence.
    std::vector<Matrix> d_top(lookback);
    {
        const std::size_t hidden =
            std::holds_alternative<GruParams>(net.layers[l - 1])
                ? std::get<GruParams>(net.layers[l - 1]).hidden()
                : std::get<LstmParams>(net.layers[l - 1]).hidden();
        for (std::size_t t = 0; t < lookback; ++t) d_top[t] = Matrix(hidden, 1);
        d_top[lookback - 1] = d_vec;
    }

    while (l-- > 0) {
        const std::size_t rec = rec_indices[l];
        const Matrix* in_mask = masks ? &masks->input_masks[rec] : nullptr;
        const Matrix* rec_mask = masks ? &masks->recurrent_masks[rec] : nullptr;
        const std::vector<Matrix> inputs = layer_inputs(l);

        std::vector<Matrix> d_below;
        std::vector<Matrix>* d_below_ptr = nullptr;
        if (l > 0) {
            d_below.resize(lookback);
            d_below_ptr = &d_below;
        }

        if (const auto* gru = std::get_if<GruParams>(&net.layers[l])) {
            gru_backward_layer(*gru, std::get<GruLayerTape>(tape.layers[l]), inputs, d_top,
                               in_mask, rec_mask, GradWriter{grads, bases[l]}, d_below_ptr);
        } else if (const auto* lstm = std::get_if<LstmParams>(&net.layers[l])) {
            lstm_backward_layer(*lstm, std::get<LstmLayerTape>(tape.layers[l]), inputs, d_top,
                                in_mask, rec_mask, GradWriter{grads, bases[l]}, d_below_ptr);
        } else {
            throw ValueError("backward: dense layer below a recurrent layer is unsupported");
        }
        if (l > 0) d_top = std::move(d_below);
    }
    return grads;
}

} // namespace cryptoseq
