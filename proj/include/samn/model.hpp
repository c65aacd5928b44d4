// The SAMN classifier: stacked feature extraction, per-class sample
// attention, class prototypes held in a recurrent memory block, and the
// two-part loss (inner-class cross-entropy over prototype similarities plus
// mean pairwise prototype cosine).
//
// Variants: Full is the complete model; San drops the memory block and uses
// the per-batch class means directly as prototypes; Mbn drops the attention
// blocks. A model instance (params + state) has a single writer; read-only
// snapshots may be shared.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "samn/dataio.hpp"
#include "samn/matrix.hpp"
#include "samn/tape.hpp"

namespace samn {

enum class Activation { Relu, Sigmoid, Tanh };
enum class Variant { Full, San, Mbn };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);
Variant variant_from_string(const std::string& name);
std::string to_string(Variant v);

struct SamnConfig {
    int total_layers = 3;          // K
    int pre_attention_layers = 2;  // k0; attention runs on layer-k0 features
    int blocknum = 1;              // stacked attention blocks per class
    std::size_t hidden_width = 0;  // 0 -> input dimension
    // Bounded zero-centered activations keep the cosine similarity head
    // healthy at width n; relu kills it (dead rows collapse class angles).
    Activation activation = Activation::Tanh;
    Variant variant = Variant::Full;
    bool learned_projections = false;  // default: identity Q/K/V
    double eps = 1e-12;

    int attention_blocks() const { return variant == Variant::Mbn ? 0 : blocknum; }
    std::size_t width_for(std::size_t input_dim) const {
        return hidden_width == 0 ? input_dim : hidden_width;
    }
    void validate() const;
};

struct SamnParams {
    std::vector<Matrix> weights;  // layer j: weights[j-1], j = 1..K
    std::vector<Matrix> biases;   // 1 x width each
    Matrix w_hidden, b_hidden;    // memory: previous-state map
    Matrix w_input, b_input;      // memory: batch-prototype map
    Matrix w_output, b_output;    // memory: output prototype map
    std::vector<Matrix> w_query, w_key, w_value;  // per block, optional

    // Square extraction layers start near a scaled identity (plus uniform
    // noise) so the class geometry of the inputs survives to the cosine head
    // at initialization; non-square layers and the memory maps are
    // Glorot-uniform. Biases start at zero.
    static SamnParams init(const SamnConfig& config, std::size_t input_dim,
                           unsigned long seed);
    // Parameters updated by the optimizer, in a fixed order. San excludes the
    // memory maps; Mbn excludes attention projections.
    std::vector<Matrix*> trainable(const SamnConfig& config);
};

struct PrototypeState {
    std::vector<Matrix> hidden;     // per class, 1 x width, sigmoid range
    std::vector<Matrix> prototype;  // per class, 1 x width
    std::vector<bool> seen;
    std::vector<long> last_update;  // batch counter at the class's last update
    long batches_seen = 0;

    static PrototypeState zeros(int classes, std::size_t width);
    bool all_seen() const;
    int classes() const { return static_cast<int>(prototype.size()); }
};

// Tape-side parameter handles. San leaves the memory handles invalid, Mbn
// leaves the projection handles empty.
struct ParamVars {
    std::vector<Var> weights, biases;
    Var w_hidden, b_hidden, w_input, b_input, w_output, b_output;
    std::vector<Var> w_query, w_key, w_value;
};
ParamVars inject_params(Tape& tape, const SamnParams& params,
                        const SamnConfig& config);
// Gradients aligned with SamnParams::trainable(config).
std::vector<const Matrix*> trainable_grads(const Tape& tape, const ParamVars& vars,
                                           const SamnConfig& config);

// Sequential affine + activation through layers from_layer..to_layer
// (1-based, inclusive).
Var extract(Tape& tape, const ParamVars& vars, const SamnConfig& config, Var x,
            int from_layer, int to_layer);
Matrix extract_plain(const SamnParams& params, const SamnConfig& config, Matrix x,
                     int from_layer, int to_layer);

// One attention block on a class group: A = row_softmax(Q K^T), out = A V with
// Q = K = V = xc (identity projections) or learned per-block projections.
Var sample_attention_block(Tape& tape, Var xc);
Var sample_attention_block(Tape& tape, Var xc, Var wq, Var wk, Var wv);

// h_new = sigmoid(h_prev W^h + b^h + xbar W^x + b^x); s_new = tanh(h_new W^s + b^s).
// h_prev is expected to be a leaf of the current tape (truncated recurrence).
std::pair<Var, Var> memory_update(Tape& tape, const ParamVars& vars, Var h_prev,
                                  Var xbar);
void memory_update_plain(const SamnParams& params, Matrix& hidden, Matrix& proto,
                         const Matrix& xbar);

// Cross-entropy over softmax-normalized cosine similarities between each
// refined sample and every class prototype, averaged over the batch.
Var inner_loss(Tape& tape, Var refined, const std::vector<int>& labels,
               const std::vector<Var>& prototypes, std::size_t batch_size,
               double eps = 1e-12);
// Mean cosine over the C(C-1)/2 unordered prototype pairs; requires C >= 2.
Var inter_loss(Tape& tape, const std::vector<Var>& prototypes, double eps = 1e-12);

struct BatchForward {
    std::map<int, Matrix> attended;    // X^c after the attention stack
    std::map<int, Matrix> class_mean;  // Xbar^c
    Matrix refined;                    // b x width, original batch order
    double inner = 0.0, inter = 0.0, total = 0.0;
    Var total_var;
    std::map<int, Var> new_hidden;     // committed after the optimizer step
    std::map<int, Var> new_prototype;
    int attention_blocks_applied = 0;
};

// Full training-time forward pass over one batch. Prototypes of classes
// absent from the batch are taken from `state` as constants; they must have
// been seen (run a warm-up pass first).
BatchForward forward_batch(Tape& tape, const ParamVars& vars,
                           const SamnConfig& config, const PrototypeState& state,
                           const Matrix& features, const std::vector<int>& labels,
                           int class_count);

// Writes the batch's memory outputs back into the state (Full/Mbn variants).
void commit_memory(PrototypeState& state, const Tape& tape, const BatchForward& fw);

// extract -> attention stack -> per-class means, without any loss; used by
// the warm-up pass and by the San prototype accumulation.
std::map<int, Matrix> batch_class_means_plain(const SamnParams& params,
                                              const SamnConfig& config,
                                              const Matrix& features,
                                              const std::vector<int>& labels);
// Warm-up step for Full/Mbn: memory update from the batch means, no learning.
void warmup_update(const SamnParams& params, const SamnConfig& config,
                   PrototypeState& state, const Matrix& features,
                   const std::vector<int>& labels);

// After the warm-up pass, shifts b_output so the class-mean pre-activation of
// the prototype map is zero and refreshes the stored prototypes. Without this
// the prototypes share one dominant direction at the start of training (the
// pairwise-cosine repulsion has zero gradient at equal prototypes), which can
// permanently glue classes together.
void recenter_prototype_offset(SamnParams& params, PrototypeState& state);

struct Prediction {
    std::vector<int> labels;
    Matrix scores;  // N x C cosine similarities
};

// Inference: extract through all K layers (a lone sample's self-attention is
// the identity, so the attention stack is skipped), then argmax of cosine
// similarity to the stored prototypes; ties break to the lowest class id.
Prediction samn_predict(const SamnParams& params, const SamnConfig& config,
                        const PrototypeState& state, const Matrix& features);

}  // namespace samn
