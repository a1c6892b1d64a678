#pragma once

#include <vector>

#include "botdgt/autodiff.hpp"
#include "botdgt/dyngraph.hpp"

namespace botdgt {

struct TemporalConfig {
  int num_heads = 4;            // D
  std::int64_t model_dim = 64;  // F, equal to the structural hidden_dim
  int bucket_count = 20;        // B, uniform bins over [0,1] for LCC/BLR

  std::int64_t head_dim() const { return model_dim / num_heads; }
  void validate() const;
};

struct PositionEmbeddingTables {
  ad::TensorPtr E_AT;   // [N x F], one row per snapshot index
  ad::TensorPtr E_LCC;  // [B x F]
  ad::TensorPtr E_BLR;  // [B x F]
};

struct TemporalParams {
  ad::TensorPtr W_q, W_k, W_v;  // [F x F], sliced per head at width F/D
};

struct TemporalAttentionOutput {
  ad::TensorPtr z;  // [T x F]
  std::vector<ad::TensorPtr> head_weights;  // per head [T x T], when kept
};

// floor(value * B) clamped to B-1; value must lie in [0,1].
int bucketize(double value, int bucket_count);

struct NodePositionEmbeddings {
  ad::TensorPtr p_at, p_lcc, p_blr;  // each [F]
};

// Embedding rows for one (node, snapshot) pair. p_at depends only on the
// snapshot index; p_lcc/p_blr index their tables through bucketize.
NodePositionEmbeddings position_embeddings(ad::Tape& tape,
                                           const SnapshotMetrics& metrics,
                                           const PositionEmbeddingTables& tables,
                                           NodeId node, int snapshot,
                                           int bucket_count);

// s_hat = s + p_at + p_lcc + p_blr for one (node, snapshot) vector.
ad::TensorPtr fuse_inputs(ad::Tape& tape, const ad::TensorPtr& s,
                          const NodePositionEmbeddings& embeddings);

// Additive mask [T x T]: 0 where a >= b and timestep b is active, else -inf.
ad::TensorPtr causal_mask(std::int64_t T, const std::vector<bool>& active);

// Masked multi-head self-attention over one node's snapshot sequence
// [T x F]. Scores use the 1/sqrt(F) scaling of the full model width.
TemporalAttentionOutput temporal_attention(ad::Tape& tape, const ad::TensorPtr& s_hat,
                                           const TemporalParams& params,
                                           const TemporalConfig& config,
                                           const ad::TensorPtr& mask,
                                           bool keep_weights = false);

}  // namespace botdgt
