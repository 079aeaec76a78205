#include "wstokes/corpus.hpp"

#include "wstokes/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace wstokes {

namespace {

// Uniform draw on [lo, hi) from the raw 64-bit stream, independent of the
// standard library's distribution implementations.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::vector<double> random_in_ball(std::mt19937_64& rng, int dim, double radius) {
  std::vector<double> v(dim);
  while (true) {
    double r2 = 0.0;
    for (auto& c : v) {
      c = uniform(rng, -radius, radius);
      r2 += c * c;
    }
    if (r2 <= radius * radius) return v;
  }
}

}  // namespace

PotentialParams random_potential(int dim, int components, std::uint64_t seed) {
  require(dim >= 1 && components >= 1, "potential needs positive dimension and components");
  std::mt19937_64 rng(seed);
  PotentialParams p;
  p.sigma = uniform(rng, 0.8, 1.2);
  p.decay = uniform(rng, 0.0, 1.0);
  p.center = random_in_ball(rng, dim, 1.0);
  constexpr int modes = 3;
  for (int m = 0; m < modes; ++m) {
    p.wavevectors.push_back(random_in_ball(rng, dim, 1.5));
    p.phases.push_back(uniform(rng, 0.0, 2.0 * std::numbers::pi));
  }
  p.amplitudes.assign(components, std::vector<double>(modes));
  for (auto& row : p.amplitudes)
    for (auto& a : row) a = uniform(rng, -1.0, 1.0);
  return p;
}

Field sample_potential(const Grid& grid, const PotentialParams& p) {
  const int dim = grid.dim();
  require(static_cast<int>(p.center.size()) == dim, "potential center has the wrong dimension");
  const int comps = static_cast<int>(p.amplitudes.size());
  return Field::sample(grid, comps, [&](std::span<const double> x, std::span<double> out) {
    double r2 = 0.0;
    std::vector<double> y(dim);
    for (int d = 0; d < dim; ++d) {
      y[d] = x[d] - p.center[d];
      r2 += y[d] * y[d];
    }
    const double envelope = std::exp(-r2 / (2.0 * p.sigma * p.sigma)) * std::pow(1.0 + r2, -0.5 * p.decay);
    for (size_t m = 0; m < p.phases.size(); ++m) {
      double phase = p.phases[m];
      for (int d = 0; d < dim; ++d) phase += p.wavevectors[m][d] * y[d];
      const double wave = envelope * std::cos(phase);
      for (int c = 0; c < comps; ++c) out[c] += p.amplitudes[c][m] * wave;
    }
  });
}

std::vector<Field> solenoidal_corpus(const Grid& grid, std::uint64_t seed, int count) {
  require(grid.dim() == 3, "the solenoidal corpus is built from curls and needs n = 3");
  require(count >= 1, "corpus size must be positive");
  std::vector<Field> out;
  std::vector<std::uint64_t> seeds(count);
  {
    std::mt19937_64 master(seed);
    for (auto& s : seeds) s = master();
  }
  for (int i = 0; i < count; ++i) {
    Field u = curl(sample_potential(grid, random_potential(3, 3, seeds[i])));
    u *= 1.0 / l2_norm(u);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<Field> scalar_corpus(const Grid& grid, std::uint64_t seed, int count) {
  require(count >= 1, "corpus size must be positive");
  std::vector<Field> out;
  std::mt19937_64 master(seed ^ 0x5ca1a7f1e1d5ULL);
  for (int i = 0; i < count; ++i) {
    Field f = sample_potential(grid, random_potential(grid.dim(), 1, master()));
    f *= 1.0 / l2_norm(f);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace wstokes
