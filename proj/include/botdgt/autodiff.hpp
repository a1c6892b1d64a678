#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace botdgt::ad {

// Dense 64-bit float tensor (rank 1 or 2; scalars use shape {1}).
// grad is allocated lazily: leaves opt in via requires_grad, op outputs get a
// buffer whenever gradient can flow to them.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;
  std::string name;

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
  std::int64_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::int64_t cols() const { return shape.size() > 1 ? shape[1] : 1; }
  double& at(std::int64_t r, std::int64_t c) { return values[r * cols() + c]; }
  double at(std::int64_t r, std::int64_t c) const { return values[r * cols() + c]; }
  void zero_grad();
  std::string shape_str() const;
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(std::vector<std::int64_t> shape, bool requires_grad = false,
                      std::string name = "");
TensorPtr make_tensor(std::vector<std::int64_t> shape, std::vector<double> values,
                      bool requires_grad = false, std::string name = "");
TensorPtr make_scalar(double value);

// Per-edge values grouped by destination node. Group g owns the edge range
// [offsets[g], offsets[g+1]) of src; dst[g] is the receiving node. Sources are
// sorted ascending within a group so reductions have a fixed order.
struct EdgeGroups {
  std::vector<std::int64_t> dst;
  std::vector<std::int64_t> offsets{0};
  std::vector<std::int64_t> src;

  std::int64_t num_groups() const { return static_cast<std::int64_t>(dst.size()); }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(src.size()); }
  void add_group(std::int64_t destination, std::vector<std::int64_t> sources);
};

// Records each op so backward() can replay adjoints in reverse order.
// Forward loops are sequential with fixed index order; results are
// bit-identical across runs on identical inputs.
class Tape {
 public:
  TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
  TensorPtr transpose(const TensorPtr& a);
  TensorPtr add(const TensorPtr& a, const TensorPtr& b);
  // a[m x n] + row vector b[n] broadcast over rows
  TensorPtr add_rowvec(const TensorPtr& a, const TensorPtr& b);
  TensorPtr mul(const TensorPtr& a, const TensorPtr& b);
  TensorPtr scale(const TensorPtr& a, double c);
  // leaky rectifier; negative_slope is the sigma of the input encoder
  TensorPtr nonlinearity(const TensorPtr& a, double negative_slope = 0.01);
  TensorPtr concat(const std::vector<TensorPtr>& parts, int axis);
  TensorPtr slice_cols(const TensorPtr& a, std::int64_t c0, std::int64_t c1);
  // single row of a [V x F] table -> [F]
  TensorPtr embedding_lookup(const TensorPtr& table, std::int64_t index);
  // row gather -> [indices.size() x F]; backward scatter-adds
  TensorPtr gather_rows(const TensorPtr& a, const std::vector<std::int64_t>& indices);
  // zero out rows where keep[r] is false
  TensorPtr mask_rows(const TensorPtr& a, const std::vector<bool>& keep);
  TensorPtr sum_all(const TensorPtr& a);
  // Row-wise softmax of (a + mask). Mask entries are 0 or -inf; rows that are
  // fully masked come out all-zero instead of NaN.
  TensorPtr softmax_rows(const TensorPtr& a, const TensorPtr& mask = nullptr);
  // score[e] = dot(q[dst(e)], k[src(e)]) * scale
  TensorPtr edge_scores(const TensorPtr& q, const TensorPtr& k,
                        const EdgeGroups& groups, double scale);
  // softmax within each destination group (max-subtracted)
  TensorPtr neighbor_softmax(const TensorPtr& scores, const EdgeGroups& groups);
  // out[dst(e)] += w[e] * v[src(e)]; rows with no incoming group stay zero
  TensorPtr edge_weighted_sum(const TensorPtr& weights, const TensorPtr& v,
                              const EdgeGroups& groups, std::int64_t num_rows);
  // Mean over rows of -[y log p_bot + (1-y) log(1-p_bot)] with p_bot =
  // probs[i,1] clamped to [eps, 1-eps]. labels[i] in {0,1}.
  TensorPtr binary_cross_entropy(const TensorPtr& probs, const std::vector<int>& labels,
                                 double eps = 1e-12);

  // Fills grad of every reachable tensor with d loss / d tensor.
  void backward(const TensorPtr& loss);

  std::size_t num_nodes() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    std::function<void()> back;
  };
  std::vector<Node> nodes_;

  TensorPtr make_output(std::vector<std::int64_t> shape,
                        std::initializer_list<const TensorPtr*> inputs);
  void record(std::function<void()> back) { nodes_.push_back({std::move(back)}); }
};

inline bool wants_grad(const TensorPtr& t) { return t && !t->grad.empty(); }

}  // namespace botdgt::ad
