// Randomized law checks. Each case draws its own size, connectivity, ROI and
// values from a seeded generator, so failures are reproducible by seed.
#include <gtest/gtest.h>

#include <vector>

#include "oracles.hpp"
#include "thermorph/morphology.hpp"
#include "thermorph/synthgen.hpp"

namespace thermorph {
namespace {

constexpr int kCases = 300;

struct Case {
  ScalarGrid grid;
  StructuringElement se;
  SplitMix64 rng;
};

Case draw(std::uint64_t seed) {
  SplitMix64 rng(seed * 7919 + 13);
  const auto w = static_cast<std::size_t>(rng.uniform_int(1, 24));
  const auto h = static_cast<std::size_t>(rng.uniform_int(1, 24));
  const bool integers = rng.uniform() < 0.3;
  auto g = random_grid(w, h, 0, integers ? 6 : 10, seed, integers);
  if (rng.uniform() < 0.3) {
    const auto rx = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(w - 1)));
    const auto ry = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(h - 1)));
    const auto rw = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(w - rx)));
    const auto rh = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(h - ry)));
    g = g.with_roi(make_roi(w, h, RoiRect{rx, ry, rw, rh}));
  }
  const auto se = rng.uniform() < 0.5 ? StructuringElement::four() : StructuringElement::eight();
  return {std::move(g), se, rng};
}

ScalarGrid shifted(const ScalarGrid& g, double by) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = g.in_roi(i) ? g[i] - by : g[i];
  return g.with_values(std::move(v));
}

ScalarGrid negated(const ScalarGrid& g) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = -g[i];
  return g.with_values(std::move(v));
}

/// Random marker at or below the mask inside the ROI.
ScalarGrid random_marker(const ScalarGrid& mask, SplitMix64& rng) {
  std::vector<double> v(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    v[i] = mask.in_roi(i) ? mask[i] - rng.uniform(0.0, 5.0) : mask[i];
  }
  return mask.with_values(std::move(v));
}

TEST(MorphologyLaws, Extensivity) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    const auto d = dilate(c.grid, c.se);
    const auto e = erode(c.grid, c.se);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      ASSERT_GE(d[i], c.grid[i]) << "seed " << s;
      ASSERT_LE(e[i], c.grid[i]) << "seed " << s;
    }
  }
}

TEST(MorphologyLaws, Duality) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    const auto lhs = erode(c.grid, c.se);
    const auto rhs = negated(dilate(negated(c.grid), c.se));
    ASSERT_EQ(lhs, rhs) << "seed " << s;
  }
}

TEST(MorphologyLaws, DilateMatchesWindowOracle) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    const int conn = static_cast<int>(c.se.connectivity());
    const auto d = dilate(c.grid, c.se);
    ASSERT_EQ(std::vector<double>(d.values().begin(), d.values().end()), oracle::window_filter(c.grid, conn, true))
        << "seed " << s;
  }
}

TEST(MorphologyLaws, Ordering) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    const auto lower = random_marker(c.grid, c.rng);
    const auto d_lo = dilate(lower, c.se);
    const auto d_hi = dilate(c.grid, c.se);
    const auto m2 = random_marker(lower, c.rng);
    const auto r_lo = reconstruct_by_dilation(m2, c.grid, c.se);
    const auto r_hi = reconstruct_by_dilation(lower, c.grid, c.se);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      ASSERT_LE(d_lo[i], d_hi[i]) << "seed " << s;
      ASSERT_LE(r_lo[i], r_hi[i]) << "seed " << s;
    }
  }
}

TEST(MorphologyLaws, Sandwich) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    const auto marker = random_marker(c.grid, c.rng);
    const auto r = reconstruct_by_dilation(marker, c.grid, c.se);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      ASSERT_LE(marker[i], r[i]) << "seed " << s;
      ASSERT_LE(r[i], c.grid[i]) << "seed " << s;
    }
  }
}

TEST(MorphologyLaws, Idempotence) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    const auto marker = random_marker(c.grid, c.rng);
    const auto r = reconstruct_by_dilation(marker, c.grid, c.se);
    ASSERT_EQ(reconstruct_by_dilation(r, c.grid, c.se), r) << "seed " << s;
    ASSERT_EQ(geodesic_dilate(r, c.grid, c.se), r) << "seed " << s;
  }
}

TEST(MorphologyLaws, QueueEqualsNaive) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    const auto marker = random_marker(c.grid, c.rng);
    ASSERT_EQ(reconstruct_by_dilation(marker, c.grid, c.se, ReconstructionMethod::queue),
              reconstruct_by_dilation(marker, c.grid, c.se, ReconstructionMethod::naive))
        << "seed " << s;
  }
}

TEST(MorphologyLaws, HDomeBound) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    const double h = c.rng.uniform(0.01, 6.0);
    const auto d = h_dome(c.grid, h, c.se);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      ASSERT_GE(d[i], 0.0) << "seed " << s;
      ASSERT_LE(d[i], h) << "seed " << s;
    }
  }
}

TEST(MorphologyLaws, HDomeIsPositiveOnRegionalMaxima) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    const double h = c.rng.uniform(0.01, 6.0);
    const auto d = h_dome(c.grid, h, c.se);
    const auto maxima = oracle::regional_maxima(c.grid, static_cast<int>(c.se.connectivity()));
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      if (maxima[i]) {
        ASSERT_GT(d[i], 0.0) << "seed " << s;
      }
    }
  }
}

TEST(MorphologyLaws, RegionalMaximaMatchPlateauOracle) {
  for (std::uint64_t s = 0; s < kCases; ++s) {
    auto c = draw(s);
    ASSERT_EQ(regional_maxima(c.grid, c.se).labels(),
              oracle::regional_maxima(c.grid, static_cast<int>(c.se.connectivity())))
        << "seed " << s;
  }
}

TEST(MorphologyLaws, ShiftedGridReconstruction) {
  // R(g - h, g) for the specific marker used by the background loop.
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto c = draw(s);
    const double h = c.rng.uniform(0.1, 3.0);
    const auto marker = shifted(c.grid, h);
    const auto r = reconstruct_by_dilation(marker, c.grid, c.se);
    ASSERT_EQ(std::vector<double>(r.values().begin(), r.values().end()),
              oracle::reconstruct(marker, c.grid, static_cast<int>(c.se.connectivity())))
        << "seed " << s;
  }
}

}  // namespace
}  // namespace thermorph
