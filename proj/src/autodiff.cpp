#include "botdgt/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace botdgt::ad {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::int64_t shape_product(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(op + ": incompatible shapes " + a.shape_str() +
                              " and " + b.shape_str());
}

}  // namespace

void Tensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

TensorPtr make_tensor(std::vector<std::int64_t> shape, bool requires_grad,
                      std::string name) {
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->values.assign(shape_product(t->shape), 0.0);
  t->requires_grad = requires_grad;
  if (requires_grad) t->grad.assign(t->values.size(), 0.0);
  t->name = std::move(name);
  return t;
}

TensorPtr make_tensor(std::vector<std::int64_t> shape, std::vector<double> values,
                      bool requires_grad, std::string name) {
  auto t = make_tensor(std::move(shape), requires_grad, std::move(name));
  if (static_cast<std::int64_t>(values.size()) != t->size())
    throw std::invalid_argument("make_tensor: " + std::to_string(values.size()) +
                                " values for shape " + t->shape_str());
  t->values = std::move(values);
  return t;
}

TensorPtr make_scalar(double value) { return make_tensor({1}, {value}); }

void EdgeGroups::add_group(std::int64_t destination, std::vector<std::int64_t> sources) {
  dst.push_back(destination);
  src.insert(src.end(), sources.begin(), sources.end());
  offsets.push_back(static_cast<std::int64_t>(src.size()));
}

TensorPtr Tape::make_output(std::vector<std::int64_t> shape,
                            std::initializer_list<const TensorPtr*> inputs) {
  auto out = std::make_shared<Tensor>();
  out->shape = std::move(shape);
  out->values.assign(shape_product(out->shape), 0.0);
  bool any_grad = false;
  for (const TensorPtr* in : inputs)
    if (*in && wants_grad(*in)) any_grad = true;
  if (any_grad) out->grad.assign(out->values.size(), 0.0);
  return out;
}

TensorPtr Tape::matmul(const TensorPtr& a, const TensorPtr& b) {
  if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[0])
    shape_error("matmul", *a, *b);
  const std::int64_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
  TensorPtr out = make_output({m, n}, {&a, &b});
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t p = 0; p < k; ++p) {
      const double av = a->values[i * k + p];
      if (av == 0.0) continue;
      for (std::int64_t j = 0; j < n; ++j)
        out->values[i * n + j] += av * b->values[p * n + j];
    }
  if (!out->grad.empty())
    record([a, b, out, m, k, n] {
      if (wants_grad(a))
        for (std::int64_t i = 0; i < m; ++i)
          for (std::int64_t j = 0; j < n; ++j) {
            const double g = out->grad[i * n + j];
            if (g == 0.0) continue;
            for (std::int64_t p = 0; p < k; ++p)
              a->grad[i * k + p] += g * b->values[p * n + j];
          }
      if (wants_grad(b))
        for (std::int64_t i = 0; i < m; ++i)
          for (std::int64_t p = 0; p < k; ++p) {
            const double av = a->values[i * k + p];
            if (av == 0.0) continue;
            for (std::int64_t j = 0; j < n; ++j)
              b->grad[p * n + j] += av * out->grad[i * n + j];
          }
    });
  return out;
}

TensorPtr Tape::transpose(const TensorPtr& a) {
  if (a->shape.size() != 2)
    throw std::invalid_argument("transpose: rank-2 tensor required, got " + a->shape_str());
  const std::int64_t m = a->shape[0], n = a->shape[1];
  TensorPtr out = make_output({n, m}, {&a});
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      out->values[j * m + i] = a->values[i * n + j];
  if (!out->grad.empty())
    record([a, out, m, n] {
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j)
          a->grad[i * n + j] += out->grad[j * m + i];
    });
  return out;
}

TensorPtr Tape::add(const TensorPtr& a, const TensorPtr& b) {
  if (a->shape != b->shape) shape_error("add", *a, *b);
  TensorPtr out = make_output(a->shape, {&a, &b});
  for (std::int64_t i = 0; i < out->size(); ++i)
    out->values[i] = a->values[i] + b->values[i];
  if (!out->grad.empty())
    record([a, b, out] {
      if (wants_grad(a))
        for (std::int64_t i = 0; i < out->size(); ++i) a->grad[i] += out->grad[i];
      if (wants_grad(b))
        for (std::int64_t i = 0; i < out->size(); ++i) b->grad[i] += out->grad[i];
    });
  return out;
}

TensorPtr Tape::add_rowvec(const TensorPtr& a, const TensorPtr& b) {
  const std::int64_t m = a->rows(), n = a->cols();
  if (a->shape.size() != 2 || b->size() != n) shape_error("add_rowvec", *a, *b);
  TensorPtr out = make_output(a->shape, {&a, &b});
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      out->values[i * n + j] = a->values[i * n + j] + b->values[j];
  if (!out->grad.empty())
    record([a, b, out, m, n] {
      if (wants_grad(a))
        for (std::int64_t i = 0; i < m * n; ++i) a->grad[i] += out->grad[i];
      if (wants_grad(b))
        for (std::int64_t i = 0; i < m; ++i)
          for (std::int64_t j = 0; j < n; ++j) b->grad[j] += out->grad[i * n + j];
    });
  return out;
}

TensorPtr Tape::mul(const TensorPtr& a, const TensorPtr& b) {
  if (a->shape != b->shape) shape_error("mul", *a, *b);
  TensorPtr out = make_output(a->shape, {&a, &b});
  for (std::int64_t i = 0; i < out->size(); ++i)
    out->values[i] = a->values[i] * b->values[i];
  if (!out->grad.empty())
    record([a, b, out] {
      if (wants_grad(a))
        for (std::int64_t i = 0; i < out->size(); ++i)
          a->grad[i] += out->grad[i] * b->values[i];
      if (wants_grad(b))
        for (std::int64_t i = 0; i < out->size(); ++i)
          b->grad[i] += out->grad[i] * a->values[i];
    });
  return out;
}

TensorPtr Tape::scale(const TensorPtr& a, double c) {
  TensorPtr out = make_output(a->shape, {&a});
  for (std::int64_t i = 0; i < out->size(); ++i) out->values[i] = a->values[i] * c;
  if (!out->grad.empty())
    record([a, out, c] {
      for (std::int64_t i = 0; i < out->size(); ++i) a->grad[i] += out->grad[i] * c;
    });
  return out;
}

TensorPtr Tape::nonlinearity(const TensorPtr& a, double negative_slope) {
  TensorPtr out = make_output(a->shape, {&a});
  for (std::int64_t i = 0; i < out->size(); ++i) {
    const double v = a->values[i];
    out->values[i] = v > 0.0 ? v : negative_slope * v;
  }
  if (!out->grad.empty())
    record([a, out, negative_slope] {
      for (std::int64_t i = 0; i < out->size(); ++i)
        a->grad[i] += out->grad[i] * (a->values[i] > 0.0 ? 1.0 : negative_slope);
    });
  return out;
}

TensorPtr Tape::concat(const std::vector<TensorPtr>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  if (axis != 0 && axis != 1) throw std::invalid_argument("concat: axis must be 0 or 1");

  if (axis == 0 && parts[0]->shape.size() == 1) {
    std::int64_t total = 0;
    for (const auto& p : parts) {
      if (p->shape.size() != 1) shape_error("concat", *parts[0], *p);
      total += p->size();
    }
    auto out = std::make_shared<Tensor>();
    out->shape = {total};
    out->values.reserve(total);
    bool any_grad = false;
    for (const auto& p : parts) {
      out->values.insert(out->values.end(), p->values.begin(), p->values.end());
      any_grad = any_grad || wants_grad(p);
    }
    if (any_grad) out->grad.assign(out->values.size(), 0.0);
    if (!out->grad.empty())
      record([parts, out] {
        std::int64_t off = 0;
        for (const auto& p : parts) {
          if (wants_grad(p))
            for (std::int64_t i = 0; i < p->size(); ++i) p->grad[i] += out->grad[off + i];
          off += p->size();
        }
      });
    return out;
  }

  const std::int64_t rows = parts[0]->rows();
  const std::int64_t cols = parts[0]->cols();
  std::int64_t out_rows = rows, out_cols = cols;
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const auto& t = parts[p];
    if (t->shape.size() != parts[0]->shape.size()) shape_error("concat", *parts[0], *t);
    if (axis == 0) {
      if (t->cols() != cols) shape_error("concat", *parts[0], *t);
    } else if (t->rows() != rows) {
      shape_error("concat", *parts[0], *t);
    }
  }
  if (axis == 0) {
    out_rows = 0;
    for (const auto& t : parts) out_rows += t->rows();
  } else {
    out_cols = 0;
    for (const auto& t : parts) out_cols += t->cols();
  }

  std::vector<const TensorPtr*> ins;
  bool any_grad = false;
  for (const auto& p : parts) any_grad = any_grad || wants_grad(p);
  auto out = std::make_shared<Tensor>();
  out->shape = {out_rows, out_cols};
  out->values.assign(out_rows * out_cols, 0.0);
  if (any_grad) out->grad.assign(out->values.size(), 0.0);

  if (axis == 0) {
    std::int64_t row_off = 0;
    for (const auto& t : parts) {
      std::copy(t->values.begin(), t->values.end(),
                out->values.begin() + row_off * out_cols);
      row_off += t->rows();
    }
  } else {
    std::int64_t col_off = 0;
    for (const auto& t : parts) {
      for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t j = 0; j < t->cols(); ++j)
          out->values[i * out_cols + col_off + j] = t->values[i * t->cols() + j];
      col_off += t->cols();
    }
  }
  if (!out->grad.empty())
    record([parts, out, axis, rows, out_cols] {
      if (axis == 0) {
        std::int64_t row_off = 0;
        for (const auto& t : parts) {
          if (wants_grad(t))
            for (std::int64_t i = 0; i < t->size(); ++i)
              t->grad[i] += out->grad[row_off * out_cols + i];
          row_off += t->rows();
        }
      } else {
        std::int64_t col_off = 0;
        for (const auto& t : parts) {
          if (wants_grad(t))
            for (std::int64_t i = 0; i < rows; ++i)
              for (std::int64_t j = 0; j < t->cols(); ++j)
                t->grad[i * t->cols() + j] += out->grad[i * out_cols + col_off + j];
          col_off += t->cols();
        }
      }
    });
  return out;
}

TensorPtr Tape::slice_cols(const TensorPtr& a, std::int64_t c0, std::int64_t c1) {
  const std::int64_t m = a->rows(), n = a->cols();
  if (a->shape.size() != 2 || c0 < 0 || c1 > n || c0 >= c1)
    throw std::invalid_argument("slice_cols: range [" + std::to_string(c0) + "," +
                                std::to_string(c1) + ") invalid for " + a->shape_str());
  const std::int64_t w = c1 - c0;
  TensorPtr out = make_output({m, w}, {&a});
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < w; ++j)
      out->values[i * w + j] = a->values[i * n + c0 + j];
  if (!out->grad.empty())
    record([a, out, m, n, w, c0] {
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < w; ++j)
          a->grad[i * n + c0 + j] += out->grad[i * w + j];
    });
  return out;
}

TensorPtr Tape::embedding_lookup(const TensorPtr& table, std::int64_t index) {
  const std::int64_t v = table->rows(), f = table->cols();
  if (index < 0 || index >= v)
    throw std::invalid_argument("embedding_lookup: index " + std::to_string(index) +
                                " out of range for table " + table->shape_str());
  TensorPtr out = make_output({f}, {&table});
  for (std::int64_t j = 0; j < f; ++j) out->values[j] = table->values[index * f + j];
  if (!out->grad.empty())
    record([table, out, index, f] {
      for (std::int64_t j = 0; j < f; ++j)
        table->grad[index * f + j] += out->grad[j];
    });
  return out;
}

TensorPtr Tape::gather_rows(const TensorPtr& a, const std::vector<std::int64_t>& indices) {
  const std::int64_t m = a->rows(), n = a->cols();
  for (auto r : indices)
    if (r < 0 || r >= m)
      throw std::invalid_argument("gather_rows: row " + std::to_string(r) +
                                  " out of range for " + a->shape_str());
  const std::int64_t k = static_cast<std::int64_t>(indices.size());
  TensorPtr out = make_output({k, n}, {&a});
  for (std::int64_t i = 0; i < k; ++i)
    std::copy_n(a->values.begin() + indices[i] * n, n, out->values.begin() + i * n);
  if (!out->grad.empty())
    record([a, out, indices, n] {
      for (std::size_t i = 0; i < indices.size(); ++i)
        for (std::int64_t j = 0; j < n; ++j)
          a->grad[indices[i] * n + j] += out->grad[i * n + j];
    });
  return out;
}

TensorPtr Tape::mask_rows(const TensorPtr& a, const std::vector<bool>& keep) {
  const std::int64_t m = a->rows(), n = a->cols();
  if (static_cast<std::int64_t>(keep.size()) != m)
    throw std::invalid_argument("mask_rows: " + std::to_string(keep.size()) +
                                " flags for " + a->shape_str());
  TensorPtr out = make_output(a->shape, {&a});
  for (std::int64_t i = 0; i < m; ++i)
    if (keep[i])
      std::copy_n(a->values.begin() + i * n, n, out->values.begin() + i * n);
  if (!out->grad.empty())
    record([a, out, keep, m, n] {
      for (std::int64_t i = 0; i < m; ++i)
        if (keep[i])
          for (std::int64_t j = 0; j < n; ++j)
            a->grad[i * n + j] += out->grad[i * n + j];
    });
  return out;
}

TensorPtr Tape::sum_all(const TensorPtr& a) {
  TensorPtr out = make_output({1}, {&a});
  double s = 0.0;
  for (double v : a->values) s += v;
  out->values[0] = s;
  if (!out->grad.empty())
    record([a, out] {
      const double g = out->grad[0];
      for (std::int64_t i = 0; i < a->size(); ++i) a->grad[i] += g;
    });
  return out;
}

TensorPtr Tape::softmax_rows(const TensorPtr& a, const TensorPtr& mask) {
  const std::int64_t m = a->rows(), n = a->cols();
  if (a->shape.size() != 2)
    throw std::invalid_argument("softmax_rows: rank-2 tensor required, got " + a->shape_str());
  if (mask && mask->shape != a->shape) shape_error("softmax_rows", *a, *mask);
  TensorPtr out = make_output(a->shape, {&a});
  for (std::int64_t i = 0; i < m; ++i) {
    double mx = kNegInf;
    for (std::int64_t j = 0; j < n; ++j) {
      double v = a->values[i * n + j];
      if (mask) v += mask->values[i * n + j];
      if (v > mx) mx = v;
    }
    if (mx == kNegInf) continue;  // fully masked row stays zero
    double denom = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      double v = a->values[i * n + j];
      if (mask) v += mask->values[i * n + j];
      const double e = v == kNegInf ? 0.0 : std::exp(v - mx);
      out->values[i * n + j] = e;
      denom += e;
    }
    for (std::int64_t j = 0; j < n; ++j) out->values[i * n + j] /= denom;
  }
  if (!out->grad.empty())
    record([a, out, m, n] {
      for (std::int64_t i = 0; i < m; ++i) {
        double dot = 0.0;
        for (std::int64_t j = 0; j < n; ++j)
          dot += out->grad[i * n + j] * out->values[i * n + j];
        for (std::int64_t j = 0; j < n; ++j) {
          const double w = out->values[i * n + j];
          a->grad[i * n + j] += w * (out->grad[i * n + j] - dot);
        }
      }
    });
  return out;
}

TensorPtr Tape::edge_scores(const TensorPtr& q, const TensorPtr& k,
                            const EdgeGroups& groups, double scale) {
  if (q->shape != k->shape || q->shape.size() != 2) shape_error("edge_scores", *q, *k);
  const std::int64_t h = q->cols();
  const std::int64_t e_total = groups.num_edges();
  TensorPtr out = make_output({e_total}, {&q, &k});
  for (std::int64_t g = 0; g < groups.num_groups(); ++g) {
    const std::int64_t d = groups.dst[g];
    for (std::int64_t e = groups.offsets[g]; e < groups.offsets[g + 1]; ++e) {
      const std::int64_t s = groups.src[e];
      double dot = 0.0;
      for (std::int64_t j = 0; j < h; ++j)
        dot += q->values[d * h + j] * k->values[s * h + j];
      out->values[e] = dot * scale;
    }
  }
  if (!out->grad.empty())
    record([q, k, out, groups, scale, h] {
      for (std::int64_t g = 0; g < groups.num_groups(); ++g) {
        const std::int64_t d = groups.dst[g];
        for (std::int64_t e = groups.offsets[g]; e < groups.offsets[g + 1]; ++e) {
          const std::int64_t s = groups.src[e];
          const double gv = out->grad[e] * scale;
          if (gv == 0.0) continue;
          if (wants_grad(q))
            for (std::int64_t j = 0; j < h; ++j)
              q->grad[d * h + j] += gv * k->values[s * h + j];
          if (wants_grad(k))
            for (std::int64_t j = 0; j < h; ++j)
              k->grad[s * h + j] += gv * q->values[d * h + j];
        }
      }
    });
  return out;
}

TensorPtr Tape::neighbor_softmax(const TensorPtr& scores, const EdgeGroups& groups) {
  if (scores->size() != groups.num_edges())
    throw std::invalid_argument("neighbor_softmax: " + std::to_string(scores->size()) +
                                " scores for " + std::to_string(groups.num_edges()) +
                                " edges");
  TensorPtr out = make_output(scores->shape, {&scores});
  for (std::int64_t g = 0; g < groups.num_groups(); ++g) {
    const std::int64_t lo = groups.offsets[g], hi = groups.offsets[g + 1];
    if (lo == hi) continue;
    double mx = kNegInf;
    for (std::int64_t e = lo; e < hi; ++e) mx = std::max(mx, scores->values[e]);
    double denom = 0.0;
    for (std::int64_t e = lo; e < hi; ++e) {
      out->values[e] = std::exp(scores->values[e] - mx);
      denom += out->values[e];
    }
    for (std::int64_t e = lo; e < hi; ++e) out->values[e] /= denom;
  }
  if (!out->grad.empty())
    record([scores, out, groups] {
      for (std::int64_t g = 0; g < groups.num_groups(); ++g) {
        const std::int64_t lo = groups.offsets[g], hi = groups.offsets[g + 1];
        double dot = 0.0;
        for (std::int64_t e = lo; e < hi; ++e) dot += out->grad[e] * out->values[e];
        for (std::int64_t e = lo; e < hi; ++e)
          scores->grad[e] += out->values[e] * (out->grad[e] - dot);
      }
    });
  return out;
}

TensorPtr Tape::edge_weighted_sum(const TensorPtr& weights, const TensorPtr& v,
                                  const EdgeGroups& groups, std::int64_t num_rows) {
  if (weights->size() != groups.num_edges())
    throw std::invalid_argument("edge_weighted_sum: " + std::to_string(weights->size()) +
                                " weights for " + std::to_string(groups.num_edges()) +
                                " edges");
  const std::int64_t h = v->cols();
  TensorPtr out = make_output({num_rows, h}, {&weights, &v});
  for (std::int64_t g = 0; g < groups.num_groups(); ++g) {
    const std::int64_t d = groups.dst[g];
    for (std::int64_t e = groups.offsets[g]; e < groups.offsets[g + 1]; ++e) {
      const std::int64_t s = groups.src[e];
      const double w = weights->values[e];
      for (std::int64_t j = 0; j < h; ++j)
        out->values[d * h + j] += w * v->values[s * h + j];
    }
  }
  if (!out->grad.empty())
    record([weights, v, out, groups, h] {
      for (std::int64_t g = 0; g < groups.num_groups(); ++g) {
        const std::int64_t d = groups.dst[g];
        for (std::int64_t e = groups.offsets[g]; e < groups.offsets[g + 1]; ++e) {
          const std::int64_t s = groups.src[e];
          if (wants_grad(weights)) {
            double dot = 0.0;
            for (std::int64_t j = 0; j < h; ++j)
              dot += out->grad[d * h + j] * v->values[s * h + j];
            weights->grad[e] += dot;
          }
          if (wants_grad(v)) {
            const double w = weights->values[e];
            for (std::int64_t j = 0; j < h; ++j)
              v->grad[s * h + j] += w * out->grad[d * h + j];
          }
        }
      }
    });
  return out;
}

TensorPtr Tape::binary_cross_entropy(const TensorPtr& probs, const std::vector<int>& labels,
                                     double eps) {
  const std::int64_t m = probs->rows();
  if (probs->shape.size() != 2 || probs->cols() != 2)
    throw std::invalid_argument("binary_cross_entropy: [m x 2] probabilities required, got " +
                                probs->shape_str());
  if (static_cast<std::int64_t>(labels.size()) != m)
    throw std::invalid_argument("binary_cross_entropy: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(m) + " rows");
  TensorPtr out = make_output({1}, {&probs});
  double total = 0.0;
  for (std::int64_t i = 0; i < m; ++i) {
    const double p = std::clamp(probs->values[i * 2 + 1], eps, 1.0 - eps);
    total += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  out->values[0] = total / static_cast<double>(m);
  if (!out->grad.empty())
    record([probs, out, labels, eps, m] {
      const double g = out->grad[0] / static_cast<double>(m);
      for (std::int64_t i = 0; i < m; ++i) {
        const double raw = probs->values[i * 2 + 1];
        if (raw < eps || raw > 1.0 - eps) continue;  // clamp region: flat
        probs->grad[i * 2 + 1] +=
            labels[i] == 1 ? -g / raw : g / (1.0 - raw);
      }
    });
  return out;
}

void Tape::backward(const TensorPtr& loss) {
  if (loss->size() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " + loss->shape_str());
  if (loss->grad.empty())
    loss->grad.assign(1, 0.0);
  loss->grad[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->back();
}

}  // namespace botdgt::ad
