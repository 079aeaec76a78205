#pragma once

#include "wstokes/field.hpp"

#include <cstdint>
#include <vector>

namespace wstokes {

/// Name of the generator used for every seeded corpus.
inline constexpr const char* corpus_prng = "mt19937_64";

/// Parameters of one smooth, rapidly decaying potential
///   psi_c(x) = exp(-|x-x0|^2 / (2 sigma^2)) <x-x0>^{-a} sum_m A_{cm} cos(k_m.(x-x0) + phase_m).
struct PotentialParams {
  double sigma = 1.0;
  double decay = 0.0;  // the exponent a
  std::vector<double> center;
  std::vector<std::vector<double>> wavevectors;
  std::vector<double> phases;
  std::vector<std::vector<double>> amplitudes;  // amplitudes[c][m]
};

/// Draws potential parameters: sigma in [0.8, 1.2], |center| <= 1, a in [0, 1],
/// three modes with |k| <= 1.5.
PotentialParams random_potential(int dim, int components, std::uint64_t seed);

Field sample_potential(const Grid& grid, const PotentialParams& params);

/// `count` divergence-free fields u = curl psi (n = 3), normalized to unit L^2 norm.
std::vector<Field> solenoidal_corpus(const Grid& grid, std::uint64_t seed, int count = 10);

/// `count` smooth scalar fields psi (one component), normalized to unit L^2 norm.
std::vector<Field> scalar_corpus(const Grid& grid, std::uint64_t seed, int count = 10);

}  // namespace wstokes
