#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace wstokes {

namespace detail {
struct GridCache;
}

/// Uniform periodic sampling of the cube [-L, L)^n with N points per axis.
///
/// Sample i along an axis sits at x_i = -L + i h, h = 2L/N, so the origin is
/// the sample with index N/2. Spectral data use the real-to-complex layout:
/// axes 0..n-2 carry all N frequencies, the last axis carries N/2+1.
class Grid {
 public:
  Grid(int dim, int points_per_axis, double half_extent);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double half_extent() const { return half_extent_; }
  double spacing() const { return 2.0 * half_extent_ / n_; }
  double cell_volume() const;
  /// Angular frequency of integer wavenumber 1, i.e. 2*pi/(2L).
  double base_frequency() const;

  Eigen::Index num_points() const { return num_points_; }
  Eigen::Index num_modes() const { return num_modes_; }

  double coordinate(int i) const { return -half_extent_ + i * spacing(); }
  /// Writes the coordinates of a flat (row-major) point index into x.
  void point(Eigen::Index flat, std::span<double> x) const;
  /// Flat index of the multi-index (i_0, ..., i_{n-1}).
  Eigen::Index flat_index(std::span<const int> idx) const;
  /// |x|^2 for every sample.
  const Eigen::ArrayXd& radius_squared() const;

  /// Signed integer wavenumber of axis `axis` for every spectral mode.
  const Eigen::ArrayXi& mode_wavenumber(int axis) const;
  /// True where some axis sits on the Nyquist frequency.
  bool is_nyquist(Eigen::Index mode) const;
  bool is_nyquist_on_axis(Eigen::Index mode, int axis) const;
  /// xi_j of a mode as used by first derivatives: zero on the Nyquist frequency
  /// of axis j so that odd-order derivatives of real fields stay real.
  double derivative_wavenumber(Eigen::Index mode, int axis) const {
    return is_nyquist_on_axis(mode, axis) ? 0.0 : base_frequency() * mode_wavenumber(axis)[mode];
  }
  /// |xi|^2 of a mode.
  double mode_kappa(Eigen::Index mode) const;
  /// Multiplicity of a mode in the full (two-sided) spectrum: 1 or 2.
  double mode_multiplicity(Eigen::Index mode) const;
  /// Smallest nonzero |xi|^2 on the grid.
  double kappa_min() const;

  /// Raw transforms on one component: `in` has num_points reals, `out` num_modes
  /// complex values. No normalization is applied.
  void forward_raw(const double* in, std::complex<double>* out) const;
  /// Inverse raw transform; `in` is copied first and left untouched.
  void inverse_raw(const std::complex<double>* in, double* out) const;

  bool operator==(const Grid& other) const {
    return dim_ == other.dim_ && n_ == other.n_ && half_extent_ == other.half_extent_;
  }
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  int dim_;
  int n_;
  double half_extent_;
  Eigen::Index num_points_;
  Eigen::Index num_modes_;
  std::shared_ptr<const detail::GridCache> cache_;
};

}  // namespace wstokes
