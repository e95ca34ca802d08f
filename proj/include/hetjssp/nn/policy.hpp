#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "hetjssp/env.hpp"
#include "hetjssp/graph.hpp"
#include "hetjssp/nn/parameters.hpp"
#include "hetjssp/nn/tensor.hpp"
#include "hetjssp/rng.hpp"

namespace hetjssp::nn {

using Real = double;
using Mat = Matrix<Real>;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using RealVar = Var<Real>;
using RealTape = Tape<Real>;

enum class Arch { Hgt, HomoHgt, Gin };

const char* to_string(Arch arch);
/// Accepts "hgt", "homo-hgt" (or "homo_hgt"), "gin".
Arch arch_from_string(const std::string& text);

enum class Mode { Train, Eval };

struct ModelConfig {
  Arch arch = Arch::Hgt;
  int layers = 3;
  int hidden = 128;
  int heads = 4;
  int embed = 64;
  double dropout = 0.1;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void validate(const ModelConfig& config);

/// Disjoint union of graphs that share one topology, each with its own
/// feature matrix and action mask. Node k of graph b becomes b * nodes + k.
struct GraphBatch {
  int graphs = 0;
  int nodes_per_graph = 0;
  int total_nodes = 0;
  Mat features;
  /// Per arc: row of the keyed source in the stacked [precedes; competes]
  /// projection (typed) or in the single projection (merged).
  Index typed_source;
  Index merged_source;
  Index arc_target;
  /// Graph id of every node.
  Index node_graph;
  std::shared_ptr<const std::vector<bool>> mask;

  int arc_count() const { return static_cast<int>(arc_target->size()); }
};

GraphBatch make_batch(const HeteroGraph& topology, const std::vector<const FeatureMatrix*>& features,
                      const std::vector<const ActionMask*>& masks);

inline GraphBatch make_batch(const HeteroGraph& g, const ActionMask& mask) {
  return make_batch(g, {&g.features}, {&mask});
}

/// Tape handles produced by one batched forward pass.
struct BatchOutput {
  RealVar embeddings;  // total_nodes x embed
  RealVar pooled;      // graphs x embed
  RealVar logits;      // total_nodes x 1, unmasked
  RealVar log_probs;   // total_nodes x 1, -inf where masked
  RealVar values;      // graphs x 1
};

/// Single-graph result in plain vectors. Masked entries of logits and
/// log_probs are -inf.
struct ForwardResult {
  Vec logits;
  Real value = 0;
  Vec log_probs;
};

/// Graph encoder + attention pooling + actor/critic heads.
///
/// Pipeline: linear 3 -> hidden, `layers` message-passing layers, linear
/// hidden -> embed. HGT and Homo-HGT layers compute multi-head attention
/// with one query projection and key/value projections per relation
/// (two relations for HGT, one merged relation for Homo-HGT), softmax over
/// all incoming arcs of a node, then H' = LayerNorm(H + Dropout(ReLU(W_O m))).
/// GIN layers compute H' = MLP(H + sum of incoming neighbours).
class PolicyModel {
 public:
  PolicyModel(ModelConfig config, Rng& init_rng);

  const ModelConfig& config() const { return config_; }
  ParameterStore<Real>& parameters() { return params_; }
  const ParameterStore<Real>& parameters() const { return params_; }
  std::size_t count_parameters() const { return params_.scalar_count(); }

  /// Records the full forward pass on `tape`. In Train mode dropout draws
  /// from `dropout_rng`, which must then be non-null.
  BatchOutput forward(RealTape& tape, const GraphBatch& batch, Mode mode, Rng* dropout_rng);

  /// Gradient-free single-graph forward.
  ForwardResult forward(const HeteroGraph& g, const ActionMask& mask, Mode mode = Mode::Eval,
                        Rng* dropout_rng = nullptr);

  /// Node embeddings only (encoder output), for diagnostics and tests.
  RealVar encode(RealTape& tape, const GraphBatch& batch, Mode mode, Rng* dropout_rng);

  RealVar global_attention_pool(RealTape& tape, RealVar embeddings, const GraphBatch& batch);

 private:
  struct Linear {
    int weight = -1;
    int bias = -1;  // -1: no bias
  };
  struct Mlp {
    Linear first;
    Linear second;
  };
  struct Layer {
    Linear query;
    std::vector<Linear> key;    // one per relation
    std::vector<Linear> value;  // one per relation
    Linear out;
    int norm_gain = -1;
    int norm_bias = -1;
    Mlp gin;
  };

  Linear make_linear(const std::string& name, int in, int out, bool bias, Rng& rng);
  Mlp make_mlp(const std::string& name, int in, int hidden, int out, Rng& rng);
  RealVar apply(RealTape& tape, const Linear& lin, RealVar x);
  RealVar apply(RealTape& tape, const Mlp& mlp, RealVar x);
  RealVar attention_layer(RealTape& tape, const Layer& layer, RealVar h, const GraphBatch& batch, Mode mode,
                          Rng* dropout_rng);
  RealVar gin_layer(RealTape& tape, const Layer& layer, RealVar h, const GraphBatch& batch);

  ModelConfig config_;
  ParameterStore<Real> params_;
  Linear input_;
  std::vector<Layer> layers_;
  Linear output_;
  Mlp gate_;
  Mlp actor_;
  Mlp critic_;
};

}  // namespace hetjssp::nn
