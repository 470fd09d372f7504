// Brute-force reference implementations used only by tests. Nothing here
// calls into the library's kernels; they share only the data types.
#ifndef THERMORPH_TESTS_ORACLES_HPP
#define THERMORPH_TESTS_ORACLES_HPP

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <vector>

#include "thermorph/grid.hpp"

namespace oracle {

using thermorph::ScalarGrid;

inline bool in_window(int dx, int dy, int connectivity) {
  if (dx == 0 && dy == 0) return true;
  if (connectivity == 4) return std::abs(dx) + std::abs(dy) == 1;
  return std::abs(dx) <= 1 && std::abs(dy) <= 1;
}

/// Sliding-window max (or min) over the centre and its in-frame, in-ROI
/// neighbours; out-of-ROI pixels pass through.
inline std::vector<double> window_filter(const ScalarGrid& g, int connectivity, bool take_max) {
  const int w = static_cast<int>(g.width());
  const int h = static_cast<int>(g.height());
  std::vector<double> out(g.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y * w + x);
      if (!g.in_roi(i)) {
        out[i] = g[i];
        continue;
      }
      double acc = g[i];
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!in_window(dx, dy, connectivity)) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const auto j = static_cast<std::size_t>(ny * w + nx);
          if (!g.in_roi(j)) continue;
          acc = take_max ? std::max(acc, g[j]) : std::min(acc, g[j]);
        }
      }
      out[i] = acc;
    }
  }
  return out;
}

/// Literal fixpoint iteration of (dilate then clip by mask).
inline std::vector<double> reconstruct(const ScalarGrid& marker, const ScalarGrid& mask, int connectivity,
                                       int* steps = nullptr) {
  std::vector<double> cur(marker.values().begin(), marker.values().end());
  int n = 0;
  while (true) {
    auto dil = window_filter(mask.with_values(cur), connectivity, true);
    for (std::size_t i = 0; i < dil.size(); ++i) dil[i] = std::min(dil[i], mask[i]);
    if (dil == cur) break;
    cur = std::move(dil);
    ++n;
  }
  if (steps) *steps = n;
  return cur;
}

/// Pixels on plateaus whose every outside neighbour is strictly lower.
inline std::vector<int> regional_maxima(const ScalarGrid& g, int connectivity) {
  const int w = static_cast<int>(g.width());
  const int h = static_cast<int>(g.height());
  std::vector<int> plateau(g.size(), -1);
  std::vector<int> result(g.size(), 0);
  int next_id = 0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (plateau[s] >= 0 || !g.in_roi(s)) continue;
    std::vector<std::size_t> stack{s};
    std::vector<std::size_t> members;
    plateau[s] = next_id;
    bool is_max = true;
    while (!stack.empty()) {
      const auto p = stack.back();
      stack.pop_back();
      members.push_back(p);
      const int x = static_cast<int>(p) % w;
      const int y = static_cast<int>(p) / w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || !in_window(dx, dy, connectivity)) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const auto q = static_cast<std::size_t>(ny * w + nx);
          if (!g.in_roi(q)) continue;
          if (g[q] > g[p]) is_max = false;
          if (g[q] == g[p] && plateau[q] < 0) {
            plateau[q] = next_id;
            stack.push_back(q);
          }
        }
      }
    }
    for (auto p : members) result[p] = is_max ? 1 : 0;
    ++next_id;
  }
  return result;
}

/// Component id per pixel (-1 for background) by depth-first flood fill.
inline std::vector<int> flood_fill_labels(const std::vector<int>& fg, int w, int h, int connectivity, int* count) {
  std::vector<int> id(fg.size(), -1);
  int n = 0;
  for (std::size_t s = 0; s < fg.size(); ++s) {
    if (!fg[s] || id[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    id[s] = n;
    while (!stack.empty()) {
      const auto p = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(p) % w;
      const int y = static_cast<int>(p) / w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || !in_window(dx, dy, connectivity)) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const auto q = static_cast<std::size_t>(ny * w + nx);
          if (fg[q] && id[q] < 0) {
            id[q] = n;
            stack.push_back(q);
          }
        }
      }
    }
    ++n;
  }
  if (count) *count = n;
  return id;
}

struct TwoPartition {
  double low_mean;
  double high_mean;
  double split;  // values <= split go low
};

/// Minimum within-class sum of squares over every threshold split of the
/// sorted values.
inline TwoPartition best_two_partition(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double best = std::numeric_limits<double>::infinity();
  TwoPartition bp{};
  for (std::size_t cut = 1; cut < v.size(); ++cut) {
    if (v[cut] == v[cut - 1]) continue;
    double m0 = 0, m1 = 0;
    for (std::size_t i = 0; i < cut; ++i) m0 += v[i];
    for (std::size_t i = cut; i < v.size(); ++i) m1 += v[i];
    m0 /= static_cast<double>(cut);
    m1 /= static_cast<double>(v.size() - cut);
    double sse = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - (i < cut ? m0 : m1);
      sse += d * d;
    }
    if (sse < best) {
      best = sse;
      bp = {m0, m1, v[cut - 1]};
    }
  }
  return bp;
}

}  // namespace oracle

#endif  // THERMORPH_TESTS_ORACLES_HPP
