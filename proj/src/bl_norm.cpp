#include "evodyn/measures.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace evodyn {
namespace {

struct Vertex {
  double x;
  double y;
};

// Value of the segment p-q at abscissa c (p.x <= c <= q.x).
double lerp_at(const Vertex& p, const Vertex& q, double c) {
  if (q.x - p.x <= 0.0) return std::max(p.y, q.y);
  const double t = (c - p.x) / (q.x - p.x);
  return p.y + t * (q.y - p.y);
}

// Restrict a piecewise-linear function whose breakpoints span a superset of
// [-1, 1] to exactly [-1, 1].
std::vector<Vertex> clip_unit(const std::vector<Vertex>& f) {
  std::vector<Vertex> out;
  out.reserve(f.size());
  for (std::size_t j = 0; j + 1 < f.size(); ++j) {
    const Vertex& p = f[j];
    const Vertex& q = f[j + 1];
    if (q.x < -1.0 || p.x > 1.0) continue;
    if (out.empty()) out.push_back({-1.0, p.x >= -1.0 ? p.y : lerp_at(p, q, -1.0)});
    if (q.x <= 1.0) {
      out.push_back(q);
    } else {
      out.push_back({1.0, lerp_at(p, q, 1.0)});
      break;
    }
  }
  // Drop breakpoints that coincide in x (keep the larger value; the function is
  // continuous so they agree up to rounding).
  std::vector<Vertex> merged;
  merged.reserve(out.size());
  for (const Vertex& v : out) {
    if (!merged.empty() && v.x - merged.back().x <= 1e-15) {
      merged.back().y = std::max(merged.back().y, v.y);
      merged.back().x = v.x;
    } else {
      merged.push_back(v);
    }
  }
  return merged;
}

}  // namespace

double bl_norm_weights(const StrategyGrid& grid, const Eigen::Ref<const Vector>& nu) {
  if (nu.size() != grid.size()) throw ValidationError("bl_norm: weights do not match grid");
  const Index n = nu.size();
  if (n == 0) return 0.0;

  std::vector<Vertex> value{{-1.0, -nu(0)}, {1.0, nu(0)}};
  std::vector<Vertex> shifted;
  for (Index i = 1; i < n; ++i) {
    const double d = grid[i] - grid[i - 1];
    std::size_t peak = 0;
    for (std::size_t j = 1; j < value.size(); ++j)
      if (value[j].y > value[peak].y) peak = j;

    // Window maximum of a concave function: the rising part moves left by d,
    // the falling part moves right by d, and the peak becomes a plateau.
    shifted.clear();
    for (std::size_t j = 0; j <= peak; ++j) shifted.push_back({value[j].x - d, value[j].y});
    for (std::size_t j = peak; j < value.size(); ++j) shifted.push_back({value[j].x + d, value[j].y});

    value = clip_unit(shifted);
    for (Vertex& v : value) v.y += nu(i) * v.x;
  }
  double best = value.front().y;
  for (const Vertex& v : value) best = std::max(best, v.y);
  return best;
}

}  // namespace evodyn
