#pragma once

#include <vector>

#include "botdgt/autodiff.hpp"
#include "botdgt/dyngraph.hpp"

namespace botdgt {

struct StructuralConfig {
  int num_layers = 2;            // L
  int num_heads = 4;             // C
  std::int64_t input_dim = 0;    // raw feature width
  std::int64_t hidden_dim = 64;  // d, the per-layer output width
  double activation_slope = 0.01;
  bool self_loops = true;        // inject i into its own neighborhood

  std::int64_t head_dim() const { return hidden_dim / num_heads; }
  void validate() const;
};

struct StructuralHeadParams {
  ad::TensorPtr W_q, b_q;  // [head_dim x d], [head_dim]
  ad::TensorPtr W_k, b_k;
  ad::TensorPtr W_v, b_v;
};

struct StructuralLayerParams {
  std::vector<StructuralHeadParams> heads;
};

struct StructuralParams {
  ad::TensorPtr W_input, b_input;  // [d x input_dim], [d]
  std::vector<StructuralLayerParams> layers;
};

struct StructuralOutput {
  ad::TensorPtr s;  // [num_nodes x d]; zero rows for inactive nodes
  // attention[l][c] is the per-edge weight tensor of layer l, head c,
  // aligned with the snapshot's edge groups. Filled when keep_attention.
  std::vector<std::vector<ad::TensorPtr>> attention;
};

// Destination-grouped message-passing edges of a snapshot: one group per
// active node, direction-collapsed sources in ascending order, self-loop
// included when configured.
ad::EdgeGroups message_edges(const Snapshot& snapshot, bool self_loops = true);

// h0 = sigma(W_input x + b_input) per node (Eq. 1 style input projection).
ad::TensorPtr encode_input(ad::Tape& tape, const ad::TensorPtr& features,
                           const StructuralParams& params,
                           const StructuralConfig& config);

// Per-edge attention weights of one layer/head over the given groups.
ad::TensorPtr attention_weights(ad::Tape& tape, const ad::TensorPtr& h,
                                const ad::EdgeGroups& groups,
                                const StructuralHeadParams& head,
                                const StructuralConfig& config);

// One multi-head aggregation layer: concat over heads of
// sigma(sum_j alpha_ij v_j).
ad::TensorPtr aggregate_layer(ad::Tape& tape, const ad::TensorPtr& h,
                              const ad::EdgeGroups& groups,
                              const StructuralLayerParams& layer,
                              const StructuralConfig& config,
                              std::vector<ad::TensorPtr>* attention_out = nullptr);

// Input projection followed by L aggregation layers.
StructuralOutput forward_snapshot(ad::Tape& tape, const ad::TensorPtr& features,
                                  const Snapshot& snapshot,
                                  const StructuralParams& params,
                                  const StructuralConfig& config,
                                  bool keep_attention = false);

}  // namespace botdgt
