#include "botdgt/structural.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "botdgt/errors.hpp"

namespace botdgt {

using ad::TensorPtr;

void StructuralConfig::validate() const {
  if (num_layers < 1) throw ValidationError("structural num_layers must be >= 1");
  if (num_heads < 1) throw ValidationError("structural num_heads must be >= 1");
  if (hidden_dim % num_heads != 0)
    throw ValidationError("hidden_dim " + std::to_string(hidden_dim) +
                          " not divisible by num_heads " + std::to_string(num_heads));
}

ad::EdgeGroups message_edges(const Snapshot& snapshot, bool self_loops) {
  ad::EdgeGroups groups;
  for (NodeId i = 0; i < snapshot.num_nodes(); ++i) {
    if (!snapshot.node_active[i]) continue;
    std::vector<std::int64_t> sources = neighborhood(snapshot, i);
    if (self_loops) {
      auto it = std::lower_bound(sources.begin(), sources.end(), i);
      sources.insert(it, i);
    }
    if (sources.empty()) continue;
    groups.add_group(i, std::move(sources));
  }
  return groups;
}

TensorPtr encode_input(ad::Tape& tape, const TensorPtr& features,
                       const StructuralParams& params, const StructuralConfig& config) {
  if (features->cols() != params.W_input->cols())
    throw std::invalid_argument("encode_input: features " + features->shape_str() +
                                " vs W_input " + params.W_input->shape_str());
  TensorPtr lin = tape.matmul(features, tape.transpose(params.W_input));
  lin = tape.add_rowvec(lin, params.b_input);
  return tape.nonlinearity(lin, config.activation_slope);
}

namespace {

struct HeadProjections {
  TensorPtr q, k, v;
};

HeadProjections project_head(ad::Tape& tape, const TensorPtr& h,
                             const StructuralHeadParams& head) {
  HeadProjections p;
  p.q = tape.add_rowvec(tape.matmul(h, tape.transpose(head.W_q)), head.b_q);
  p.k = tape.add_rowvec(tape.matmul(h, tape.transpose(head.W_k)), head.b_k);
  p.v = tape.add_rowvec(tape.matmul(h, tape.transpose(head.W_v)), head.b_v);
  return p;
}

}  // namespace

TensorPtr attention_weights(ad::Tape& tape, const TensorPtr& h,
                            const ad::EdgeGroups& groups,
                            const StructuralHeadParams& head,
                            const StructuralConfig& config) {
  HeadProjections p = project_head(tape, h, head);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  TensorPtr scores = tape.edge_scores(p.q, p.k, groups, scale);
  return tape.neighbor_softmax(scores, groups);
}

TensorPtr aggregate_layer(ad::Tape& tape, const TensorPtr& h,
                          const ad::EdgeGroups& groups,
                          const StructuralLayerParams& layer,
                          const StructuralConfig& config,
                          std::vector<TensorPtr>* attention_out) {
  const std::int64_t n = h->rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  std::vector<TensorPtr> head_outputs;
  head_outputs.reserve(layer.heads.size());
  for (const StructuralHeadParams& head : layer.heads) {
    HeadProjections p = project_head(tape, h, head);
    TensorPtr scores = tape.edge_scores(p.q, p.k, groups, scale);
    TensorPtr alpha = tape.neighbor_softmax(scores, groups);
    if (attention_out) attention_out->push_back(alpha);
    TensorPtr message = tape.edge_weighted_sum(alpha, p.v, groups, n);
    head_outputs.push_back(tape.nonlinearity(message, config.activation_slope));
  }
  return tape.concat(head_outputs, 1);
}

StructuralOutput forward_snapshot(ad::Tape& tape, const TensorPtr& features,
                                  const Snapshot& snapshot,
                                  const StructuralParams& params,
                                  const StructuralConfig& config,
                                  bool keep_attention) {
  config.validate();
  if (features->rows() != snapshot.num_nodes())
    throw std::invalid_argument("forward_snapshot: " + std::to_string(features->rows()) +
                                " feature rows for " + std::to_string(snapshot.num_nodes()) +
                                " nodes");
  const ad::EdgeGroups groups = message_edges(snapshot, config.self_loops);

  StructuralOutput out;
  TensorPtr h = encode_input(tape, features, params, config);
  for (int l = 0; l < config.num_layers; ++l) {
    std::vector<TensorPtr> layer_attention;
    h = aggregate_layer(tape, h, groups, params.layers[l], config,
                        keep_attention ? &layer_attention : nullptr);
    if (keep_attention) out.attention.push_back(std::move(layer_attention));
  }
  // Aggregation leaves nodes without incoming groups at sigma(0) = 0, so
  // inactive rows are already zero; no extra masking needed.
  out.s = h;
  return out;
}

}  // namespace botdgt
