#include "botdgt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace botdgt::ad {

GradCheckReport finite_difference_check(const std::function<double()>& f,
                                        const std::vector<TensorPtr>& params,
                                        double h, double tol,
                                        std::int64_t max_coords,
                                        std::uint64_t sample_seed) {
  GradCheckReport report;
  std::mt19937_64 rng(sample_seed);
  for (const auto& p : params) {
    GradCheckEntry entry;
    entry.tensor = p->name.empty() ? p->shape_str() : p->name;

    std::vector<std::int64_t> coords(p->size());
    std::iota(coords.begin(), coords.end(), 0);
    if (p->size() > max_coords) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(max_coords);
      std::sort(coords.begin(), coords.end());
    }

    for (std::int64_t c : coords) {
      const double saved = p->values[c];
      p->values[c] = saved + h;
      const double f_plus = f();
      p->values[c] = saved - h;
      const double f_minus = f();
      p->values[c] = saved;
      const double fd = (f_plus - f_minus) / (2.0 * h);
      const double g = p->grad[c];
      const double rel = std::abs(fd - g) / std::max(std::abs(fd) + std::abs(g), 1e-4);
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
      ++entry.coords_checked;
    }
    entry.pass = entry.max_rel_error < tol;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace botdgt::ad
