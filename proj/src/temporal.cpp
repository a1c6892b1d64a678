#include "botdgt/temporal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "botdgt/errors.hpp"

namespace botdgt {

using ad::TensorPtr;

void TemporalConfig::validate() const {
  if (num_heads < 1) throw ValidationError("temporal num_heads must be >= 1");
  if (model_dim % num_heads != 0)
    throw ValidationError("model_dim " + std::to_string(model_dim) +
                          " not divisible by num_heads " + std::to_string(num_heads));
  if (bucket_count < 2) throw ValidationError("bucket_count must be >= 2");
}

int bucketize(double value, int bucket_count) {
  if (!(value >= 0.0 && value <= 1.0))
    throw ValidationError("bucketize: value " + std::to_string(value) +
                          " outside [0,1]");
  const int b = static_cast<int>(std::floor(value * bucket_count));
  return std::min(b, bucket_count - 1);
}

NodePositionEmbeddings position_embeddings(ad::Tape& tape,
                                           const SnapshotMetrics& metrics,
                                           const PositionEmbeddingTables& tables,
                                           NodeId node, int snapshot,
                                           int bucket_count) {
  const std::size_t idx = metrics.at(snapshot, node);
  NodePositionEmbeddings out;
  out.p_at = tape.embedding_lookup(tables.E_AT, snapshot);
  out.p_lcc = tape.embedding_lookup(tables.E_LCC, bucketize(metrics.lcc[idx], bucket_count));
  out.p_blr = tape.embedding_lookup(tables.E_BLR, bucketize(metrics.blr[idx], bucket_count));
  return out;
}

TensorPtr fuse_inputs(ad::Tape& tape, const TensorPtr& s,
                      const NodePositionEmbeddings& embeddings) {
  if (s->size() != embeddings.p_at->size())
    throw std::invalid_argument("fuse_inputs: widths differ, s " + s->shape_str() +
                                " vs embedding " + embeddings.p_at->shape_str());
  TensorPtr out = tape.add(s, s->shape == embeddings.p_at->shape
                                  ? embeddings.p_at
                                  : embeddings.p_at);
  out = tape.add(out, embeddings.p_lcc);
  return tape.add(out, embeddings.p_blr);
}

TensorPtr causal_mask(std::int64_t T, const std::vector<bool>& active) {
  if (T < 1) throw ValidationError("causal_mask: sequence length must be >= 1");
  if (static_cast<std::int64_t>(active.size()) != T)
    throw ValidationError("causal_mask: activity length mismatch");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  TensorPtr mask = ad::make_tensor({T, T});
  for (std::int64_t a = 0; a < T; ++a)
    for (std::int64_t b = 0; b < T; ++b)
      mask->values[a * T + b] = (a >= b && active[b]) ? 0.0 : kNegInf;
  return mask;
}

TemporalAttentionOutput temporal_attention(ad::Tape& tape, const TensorPtr& s_hat,
                                           const TemporalParams& params,
                                           const TemporalConfig& config,
                                           const TensorPtr& mask,
                                           bool keep_weights) {
  config.validate();
  const std::int64_t T = s_hat->rows();
  const std::int64_t F = config.model_dim;
  if (s_hat->cols() != F)
    throw std::invalid_argument("temporal_attention: input " + s_hat->shape_str() +
                                " vs model_dim " + std::to_string(F));

  TensorPtr Q = tape.matmul(s_hat, params.W_q);
  TensorPtr K = tape.matmul(s_hat, params.W_k);
  TensorPtr V = tape.matmul(s_hat, params.W_v);

  const double scale = 1.0 / std::sqrt(static_cast<double>(F));
  const std::int64_t hd = config.head_dim();
  TemporalAttentionOutput out;
  std::vector<TensorPtr> heads;
  heads.reserve(config.num_heads);
  for (int d = 0; d < config.num_heads; ++d) {
    TensorPtr Qd = tape.slice_cols(Q, d * hd, (d + 1) * hd);
    TensorPtr Kd = tape.slice_cols(K, d * hd, (d + 1) * hd);
    TensorPtr Vd = tape.slice_cols(V, d * hd, (d + 1) * hd);
    TensorPtr scores = tape.scale(tape.matmul(Qd, tape.transpose(Kd)), scale);
    TensorPtr weights = tape.softmax_rows(scores, mask);
    if (keep_weights) out.head_weights.push_back(weights);
    heads.push_back(tape.matmul(weights, Vd));
  }
  out.z = tape.concat(heads, 1);
  (void)T;
  return out;
}

}  // namespace botdgt
