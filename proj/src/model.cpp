#include "samn/model.hpp"

#include <algorithm>
#include <cmath>

#include "samn/rng.hpp"

namespace samn {

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    throw ConfigError("unknown activation \"" + name + "\"");
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
    }
    return "relu";
}

Variant variant_from_string(const std::string& name) {
    if (name == "samn" || name == "full") return Variant::Full;
    if (name == "san") return Variant::San;
    if (name == "mbn") return Variant::Mbn;
    throw ConfigError("unknown variant \"" + name + "\"");
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "samn";
        case Variant::San: return "san";
        case Variant::Mbn: return "mbn";
    }
    return "samn";
}

void SamnConfig::validate() const {
    if (total_layers < 2) throw ConfigError("need at least 2 extraction layers");
    if (pre_attention_layers < 1 || pre_attention_layers >= total_layers) {
        throw ConfigError("pre-attention layer count must satisfy 1 <= k0 < K");
    }
    if (blocknum < 0) throw ConfigError("blocknum must be >= 0");
    if (blocknum == 0 && variant != Variant::Mbn) {
        throw ConfigError("blocknum 0 is only valid for the mbn variant");
    }
    if (eps <= 0.0) throw ConfigError("eps must be positive");
}

namespace {

Matrix glorot_matrix(std::size_t fan_in, std::size_t fan_out, rng::Engine& eng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(fan_in, fan_out);
    for (double& v : m.data()) v = rng::uniform(eng, -limit, limit);
    return m;
}

Var apply_activation(Tape& tape, Activation act, Var x) {
    switch (act) {
        case Activation::Relu: return tape.relu(x);
        case Activation::Sigmoid: return tape.sigmoid(x);
        case Activation::Tanh: return tape.tanh(x);
    }
    return tape.relu(x);
}

Matrix apply_activation_plain(Activation act, const Matrix& x) {
    switch (act) {
        case Activation::Relu: return relu(x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Tanh: return tanh_elem(x);
    }
    return relu(x);
}

std::map<int, std::vector<std::size_t>> positions_by_class(
    const std::vector<int>& labels) {
    std::map<int, std::vector<std::size_t>> pos;
    for (std::size_t i = 0; i < labels.size(); ++i) pos[labels[i]].push_back(i);
    return pos;
}

}  // namespace

namespace {

Matrix conditioned_layer(std::size_t fan_in, std::size_t fan_out,
                         rng::Engine& eng) {
    if (fan_in != fan_out) return glorot_matrix(fan_in, fan_out, eng);
    Matrix m(fan_in, fan_out);
    for (std::size_t i = 0; i < fan_in; ++i)
        for (std::size_t j = 0; j < fan_out; ++j)
            m(i, j) = (i == j ? 0.7 : 0.0) + rng::uniform(eng, -0.05, 0.05);
    return m;
}

}  // namespace

SamnParams SamnParams::init(const SamnConfig& config, std::size_t input_dim,
                            unsigned long seed) {
    config.validate();
    const std::size_t d = config.width_for(input_dim);
    rng::Engine eng(rng::derive_seed(seed, 0x5a3a17ULL));
    SamnParams p;
    for (int j = 1; j <= config.total_layers; ++j) {
        const std::size_t fan_in = j == 1 ? input_dim : d;
        p.weights.push_back(conditioned_layer(fan_in, d, eng));
        p.biases.emplace_back(1, d);
    }
    p.w_hidden = glorot_matrix(d, d, eng);
    p.b_hidden = Matrix(1, d);
    p.w_input = glorot_matrix(d, d, eng);
    p.b_input = Matrix(1, d);
    p.w_output = glorot_matrix(d, d, eng);
    p.b_output = Matrix(1, d);
    if (config.learned_projections) {
        for (int blk = 0; blk < config.blocknum; ++blk) {
            p.w_query.push_back(glorot_matrix(d, d, eng));
            p.w_key.push_back(glorot_matrix(d, d, eng));
            p.w_value.push_back(glorot_matrix(d, d, eng));
        }
    }
    return p;
}

std::vector<Matrix*> SamnParams::trainable(const SamnConfig& config) {
    std::vector<Matrix*> out;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        out.push_back(&weights[j]);
        out.push_back(&biases[j]);
    }
    if (config.variant != Variant::San) {
        out.push_back(&w_hidden);
        out.push_back(&b_hidden);
        out.push_back(&w_input);
        out.push_back(&b_input);
        out.push_back(&w_output);
        out.push_back(&b_output);
    }
    if (config.learned_projections && config.variant != Variant::Mbn) {
        for (std::size_t blk = 0; blk < w_query.size(); ++blk) {
            out.push_back(&w_query[blk]);
            out.push_back(&w_key[blk]);
            out.push_back(&w_value[blk]);
        }
    }
    return out;
}

PrototypeState PrototypeState::zeros(int classes, std::size_t width) {
    PrototypeState st;
    st.hidden.assign(classes, Matrix(1, width));
    st.prototype.assign(classes, Matrix(1, width));
    st.seen.assign(classes, false);
    st.last_update.assign(classes, -1);
    return st;
}

bool PrototypeState::all_seen() const {
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

ParamVars inject_params(Tape& tape, const SamnParams& params,
                        const SamnConfig& config) {
    ParamVars v;
    for (std::size_t j = 0; j < params.weights.size(); ++j) {
        v.weights.push_back(tape.leaf(params.weights[j]));
        v.biases.push_back(tape.leaf(params.biases[j]));
    }
    if (config.variant != Variant::San) {
        v.w_hidden = tape.leaf(params.w_hidden);
        v.b_hidden = tape.leaf(params.b_hidden);
        v.w_input = tape.leaf(params.w_input);
        v.b_input = tape.leaf(params.b_input);
        v.w_output = tape.leaf(params.w_output);
        v.b_output = tape.leaf(params.b_output);
    }
    if (config.learned_projections && config.variant != Variant::Mbn) {
        for (std::size_t blk = 0; blk < params.w_query.size(); ++blk) {
            v.w_query.push_back(tape.leaf(params.w_query[blk]));
            v.w_key.push_back(tape.leaf(params.w_key[blk]));
            v.w_value.push_back(tape.leaf(params.w_value[blk]));
        }
    }
    return v;
}

std::vector<const Matrix*> trainable_grads(const Tape& tape, const ParamVars& vars,
                                           const SamnConfig& config) {
    std::vector<const Matrix*> out;
    for (std::size_t j = 0; j < vars.weights.size(); ++j) {
        out.push_back(&tape.grad(vars.weights[j]));
        out.push_back(&tape.grad(vars.biases[j]));
    }
    if (config.variant != Variant::San) {
        out.push_back(&tape.grad(vars.w_hidden));
        out.push_back(&tape.grad(vars.b_hidden));
        out.push_back(&tape.grad(vars.w_input));
        out.push_back(&tape.grad(vars.b_input));
        out.push_back(&tape.grad(vars.w_output));
        out.push_back(&tape.grad(vars.b_output));
    }
    if (config.learned_projections && config.variant != Variant::Mbn) {
        for (std::size_t blk = 0; blk < vars.w_query.size(); ++blk) {
            out.push_back(&tape.grad(vars.w_query[blk]));
            out.push_back(&tape.grad(vars.w_key[blk]));
            out.push_back(&tape.grad(vars.w_value[blk]));
        }
    }
    return out;
}

Var extract(Tape& tape, const ParamVars& vars, const SamnConfig& config, Var x,
            int from_layer, int to_layer) {
    if (from_layer < 1 || from_layer > to_layer ||
        to_layer > static_cast<int>(vars.weights.size())) {
        throw ConfigError("extract layer range " + std::to_string(from_layer) +
                          ".." + std::to_string(to_layer) + " invalid for K=" +
                          std::to_string(vars.weights.size()));
    }
    for (int j = from_layer; j <= to_layer; ++j) {
        x = tape.add_row_vector(tape.matmul(x, vars.weights[j - 1]),
                                vars.biases[j - 1]);
        x = apply_activation(tape, config.activation, x);
    }
    return x;
}

Matrix extract_plain(const SamnParams& params, const SamnConfig& config, Matrix x,
                     int from_layer, int to_layer) {
    if (from_layer < 1 || from_layer > to_layer ||
        to_layer > static_cast<int>(params.weights.size())) {
        throw ConfigError("extract layer range " + std::to_string(from_layer) +
                          ".." + std::to_string(to_layer) + " invalid for K=" +
                          std::to_string(params.weights.size()));
    }
    for (int j = from_layer; j <= to_layer; ++j) {
        x = add_row_vector(matmul(x, params.weights[j - 1]), params.biases[j - 1]);
        x = apply_activation_plain(config.activation, x);
    }
    return x;
}

Var sample_attention_block(Tape& tape, Var xc) {
    const Var sim = tape.matmul(xc, tape.transpose(xc));
    return tape.matmul(tape.row_softmax(sim), xc);
}

Var sample_attention_block(Tape& tape, Var xc, Var wq, Var wk, Var wv) {
    const Var q = tape.matmul(xc, wq);
    const Var k = tape.matmul(xc, wk);
    const Var v = tape.matmul(xc, wv);
    return tape.matmul(tape.row_softmax(tape.matmul(q, tape.transpose(k))), v);
}

namespace {

Matrix attention_plain(const Matrix& xc) {
    return matmul(row_softmax(matmul(xc, transpose(xc))), xc);
}

Matrix attention_plain(const Matrix& xc, const Matrix& wq, const Matrix& wk,
                       const Matrix& wv) {
    const Matrix q = matmul(xc, wq);
    const Matrix k = matmul(xc, wk);
    return matmul(row_softmax(matmul(q, transpose(k))), matmul(xc, wv));
}

}  // namespace

std::pair<Var, Var> memory_update(Tape& tape, const ParamVars& vars, Var h_prev,
                                  Var xbar) {
    const Var from_state =
        tape.add_row_vector(tape.matmul(h_prev, vars.w_hidden), vars.b_hidden);
    const Var from_batch =
        tape.add_row_vector(tape.matmul(xbar, vars.w_input), vars.b_input);
    const Var h_new = tape.sigmoid(tape.add(from_state, from_batch));
    const Var s_new = tape.tanh(
        tape.add_row_vector(tape.matmul(h_new, vars.w_output), vars.b_output));
    return {h_new, s_new};
}

void memory_update_plain(const SamnParams& params, Matrix& hidden, Matrix& proto,
                         const Matrix& xbar) {
    const Matrix pre =
        add(add_row_vector(matmul(hidden, params.w_hidden), params.b_hidden),
            add_row_vector(matmul(xbar, params.w_input), params.b_input));
    hidden = sigmoid(pre);
    proto = tanh_elem(
        add_row_vector(matmul(hidden, params.w_output), params.b_output));
}

Var inner_loss(Tape& tape, Var refined, const std::vector<int>& labels,
               const std::vector<Var>& prototypes, std::size_t batch_size,
               double eps) {
    const std::size_t rows = tape.value(refined).rows();
    if (labels.size() != rows) {
        throw DimensionError("inner_loss labels/rows mismatch");
    }
    std::vector<Var> cols;
    cols.reserve(prototypes.size());
    for (const Var& proto : prototypes) {
        cols.push_back(tape.cosine_rows(refined, proto, eps));
    }
    const Var probs = tape.row_softmax(tape.concat_cols(cols));
    Matrix one_hot(rows, prototypes.size());
    for (std::size_t i = 0; i < rows; ++i) {
        if (labels[i] < 0 || labels[i] >= static_cast<int>(prototypes.size())) {
            throw StateError("label " + std::to_string(labels[i]) +
                             " has no prototype");
        }
        one_hot(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    const Var picked = tape.mask(tape.log_clip(probs), std::move(one_hot));
    return tape.scale(tape.sum(picked), -1.0 / static_cast<double>(batch_size));
}

Var inter_loss(Tape& tape, const std::vector<Var>& prototypes, double eps) {
    const std::size_t c = prototypes.size();
    if (c < 2) throw ConfigError("inter_loss needs at least 2 classes");
    Var acc;
    for (std::size_t n = 0; n < c; ++n) {
        for (std::size_t m = n + 1; m < c; ++m) {
            const Var pair = tape.cosine(prototypes[n], prototypes[m], eps);
            acc = acc.valid() ? tape.add(acc, pair) : pair;
        }
    }
    const double pairs = static_cast<double>(c) * static_cast<double>(c - 1) / 2.0;
    return tape.scale(acc, 1.0 / pairs);
}

BatchForward forward_batch(Tape& tape, const ParamVars& vars,
                           const SamnConfig& config, const PrototypeState& state,
                           const Matrix& features, const std::vector<int>& labels,
                           int class_count) {
    if (features.rows() != labels.size()) {
        throw DimensionError("forward_batch features/labels mismatch");
    }
    if (class_count < 2) throw ConfigError("need at least 2 classes");

    BatchForward fw;
    const int k0 = config.pre_attention_layers;
    const int K = config.total_layers;
    const Var x = tape.leaf(features);
    const Var h_pre = extract(tape, vars, config, x, 1, k0);

    const auto pos = positions_by_class(labels);
    std::vector<Var> prototypes(static_cast<std::size_t>(class_count));
    std::vector<Var> refined_parts;
    std::vector<int> refined_labels;
    std::vector<std::size_t> refined_order;  // original batch positions

    for (const auto& [c, rows] : pos) {
        if (c < 0 || c >= class_count) {
            throw StateError("batch label " + std::to_string(c) + " out of range");
        }
        Var xc = tape.gather_rows(h_pre, rows);
        for (int blk = 0; blk < config.attention_blocks(); ++blk) {
            if (config.learned_projections) {
                xc = sample_attention_block(tape, xc, vars.w_query[blk],
                                            vars.w_key[blk], vars.w_value[blk]);
            } else {
                xc = sample_attention_block(tape, xc);
            }
            ++fw.attention_blocks_applied;
        }
        fw.attended[c] = tape.value(xc);

        const Var xbar = tape.row_mean(xc);
        fw.class_mean[c] = tape.value(xbar);

        if (config.variant == Variant::San) {
            prototypes[c] = xbar;
            fw.new_prototype[c] = xbar;
        } else {
            const Var h_prev = tape.leaf(state.hidden[c]);  // constant: truncated
            auto [h_new, s_new] = memory_update(tape, vars, h_prev, xbar);
            prototypes[c] = s_new;
            fw.new_hidden[c] = h_new;
            fw.new_prototype[c] = s_new;
        }

        const Var mc = extract(tape, vars, config, xc, k0 + 1, K);
        refined_parts.push_back(mc);
        for (std::size_t r : rows) {
            refined_labels.push_back(c);
            refined_order.push_back(r);
        }
    }

    // Classes absent from this batch participate as stored constants.
    for (int c = 0; c < class_count; ++c) {
        if (prototypes[c].valid()) continue;
        if (!state.seen[c]) {
            throw StateError("class " + std::to_string(c) +
                             " has no stored prototype; run a warm-up pass");
        }
        prototypes[c] = tape.leaf(state.prototype[c]);
    }

    const Var refined_all = tape.concat_rows(refined_parts);
    const Var l_inner = inner_loss(tape, refined_all, refined_labels, prototypes,
                                   features.rows(), config.eps);
    const Var l_inter = inter_loss(tape, prototypes, config.eps);
    fw.total_var = tape.add(l_inner, l_inter);

    fw.inner = tape.value(l_inner)(0, 0);
    fw.inter = tape.value(l_inter)(0, 0);
    fw.total = tape.value(fw.total_var)(0, 0);

    const Matrix& stacked = tape.value(refined_all);
    fw.refined = Matrix(features.rows(), stacked.cols());
    for (std::size_t i = 0; i < refined_order.size(); ++i)
        for (std::size_t j = 0; j < stacked.cols(); ++j)
            fw.refined(refined_order[i], j) = stacked(i, j);
    return fw;
}

void commit_memory(PrototypeState& state, const Tape& tape, const BatchForward& fw) {
    state.batches_seen += 1;
    for (const auto& [c, var] : fw.new_hidden) state.hidden[c] = tape.value(var);
    for (const auto& [c, var] : fw.new_prototype) {
        state.prototype[c] = tape.value(var);
        state.seen[c] = true;
        state.last_update[c] = state.batches_seen;
    }
}

std::map<int, Matrix> batch_class_means_plain(const SamnParams& params,
                                              const SamnConfig& config,
                                              const Matrix& features,
                                              const std::vector<int>& labels) {
    const Matrix h_pre =
        extract_plain(params, config, features, 1, config.pre_attention_layers);
    std::map<int, Matrix> means;
    for (const auto& [c, rows] : positions_by_class(labels)) {
        Matrix xc = gather_rows(h_pre, rows);
        for (int blk = 0; blk < config.attention_blocks(); ++blk) {
            xc = config.learned_projections
                     ? attention_plain(xc, params.w_query[blk], params.w_key[blk],
                                       params.w_value[blk])
                     : attention_plain(xc);
        }
        means[c] = row_mean(xc);
    }
    return means;
}

void recenter_prototype_offset(SamnParams& params, PrototypeState& state) {
    const int classes = state.classes();
    if (classes == 0) return;
    Matrix mean_hidden(1, params.w_output.rows());
    for (const Matrix& h : state.hidden) mean_hidden = add(mean_hidden, h);
    mean_hidden = scale(mean_hidden, 1.0 / static_cast<double>(classes));
    params.b_output = scale(matmul(mean_hidden, params.w_output), -1.0);
    for (int c = 0; c < classes; ++c) {
        if (!state.seen[c]) continue;
        state.prototype[c] = tanh_elem(add_row_vector(
            matmul(state.hidden[c], params.w_output), params.b_output));
    }
}

void warmup_update(const SamnParams& params, const SamnConfig& config,
                   PrototypeState& state, const Matrix& features,
                   const std::vector<int>& labels) {
    state.batches_seen += 1;
    for (const auto& [c, xbar] : batch_class_means_plain(params, config, features,
                                                         labels)) {
        memory_update_plain(params, state.hidden[c], state.prototype[c], xbar);
        state.seen[c] = true;
        state.last_update[c] = state.batches_seen;
    }
}

Prediction samn_predict(const SamnParams& params, const SamnConfig& config,
                        const PrototypeState& state, const Matrix& features) {
    if (!state.all_seen()) {
        throw StateError("prediction requires a prototype for every class");
    }
    const Matrix m =
        extract_plain(params, config, features, 1, config.total_layers);
    Prediction pred;
    pred.scores = Matrix(m.rows(), state.prototype.size());
    pred.labels.resize(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        int best = 0;
        for (std::size_t c = 0; c < state.prototype.size(); ++c) {
            pred.scores(i, c) =
                cosine(m.row(i), state.prototype[c].row(0), config.eps);
            if (pred.scores(i, c) > pred.scores(i, static_cast<std::size_t>(best))) {
                best = static_cast<int>(c);
            }
        }
        pred.labels[i] = best;
    }
    return pred;
}

}  // namespace samn
