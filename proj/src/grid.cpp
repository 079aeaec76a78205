#include "wstokes/grid.hpp"

#include "wstokes/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

namespace wstokes {

namespace detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct GridCache {
  Eigen::ArrayXd radius_squared;
  std::vector<Eigen::ArrayXi> wavenumber;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  GridCache() = default;
  GridCache(const GridCache&) = delete;
  GridCache& operator=(const GridCache&) = delete;
  ~GridCache() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

}  // namespace detail

Grid::Grid(int dim, int points_per_axis, double half_extent)
    : dim_(dim), n_(points_per_axis), half_extent_(half_extent) {
  require(dim >= 3, "grid dimension must be at least 3, got " + std::to_string(dim));
  require(points_per_axis >= 8 && points_per_axis % 2 == 0,
          "points per axis must be even and >= 8, got " + std::to_string(points_per_axis));
  require(std::isfinite(half_extent) && half_extent > 0.0, "half extent L must be positive");

  num_points_ = 1;
  for (int d = 0; d < dim; ++d) num_points_ *= n_;
  num_modes_ = num_points_ / n_ * (n_ / 2 + 1);

  auto cache = std::make_shared<detail::GridCache>();

  cache->radius_squared.resize(num_points_);
  std::vector<double> x(dim);
  for (Eigen::Index p = 0; p < num_points_; ++p) {
    point(p, x);
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    cache->radius_squared[p] = r2;
  }

  cache->wavenumber.assign(dim, Eigen::ArrayXi(num_modes_));
  const int half = n_ / 2 + 1;
  for (Eigen::Index m = 0; m < num_modes_; ++m) {
    Eigen::Index rest = m;
    const int last = static_cast<int>(rest % half);
    rest /= half;
    cache->wavenumber[dim - 1][m] = last;
    for (int d = dim - 2; d >= 0; --d) {
      const int k = static_cast<int>(rest % n_);
      rest /= n_;
      cache->wavenumber[d][m] = k < n_ / 2 ? k : k - n_;
    }
  }

  std::vector<int> dims(dim, n_);
  Eigen::ArrayXd real_buf(num_points_);
  Eigen::ArrayXcd complex_buf(num_modes_);
  {
    std::lock_guard lock(detail::planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    cache->forward = fftw_plan_dft_r2c(dim, dims.data(), real_buf.data(),
                                       reinterpret_cast<fftw_complex*>(complex_buf.data()), flags);
    cache->inverse = fftw_plan_dft_c2r(dim, dims.data(),
                                       reinterpret_cast<fftw_complex*>(complex_buf.data()),
                                       real_buf.data(), flags);
  }
  if (!cache->forward || !cache->inverse) throw std::runtime_error("FFTW planning failed");
  cache_ = std::move(cache);
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

double Grid::base_frequency() const { return std::numbers::pi / half_extent_; }

void Grid::point(Eigen::Index flat, std::span<double> x) const {
  for (int d = dim_ - 1; d >= 0; --d) {
    x[d] = coordinate(static_cast<int>(flat % n_));
    flat /= n_;
  }
}

Eigen::Index Grid::flat_index(std::span<const int> idx) const {
  Eigen::Index flat = 0;
  for (int d = 0; d < dim_; ++d) flat = flat * n_ + idx[d];
  return flat;
}

const Eigen::ArrayXd& Grid::radius_squared() const { return cache_->radius_squared; }

const Eigen::ArrayXi& Grid::mode_wavenumber(int axis) const { return cache_->wavenumber[axis]; }

bool Grid::is_nyquist_on_axis(Eigen::Index mode, int axis) const {
  const int k = cache_->wavenumber[axis][mode];
  return axis == dim_ - 1 ? k == n_ / 2 : k == -n_ / 2;
}

bool Grid::is_nyquist(Eigen::Index mode) const {
  for (int d = 0; d < dim_; ++d)
    if (is_nyquist_on_axis(mode, d)) return true;
  return false;
}

double Grid::mode_kappa(Eigen::Index mode) const {
  const double k0 = base_frequency();
  double s = 0.0;
  for (int d = 0; d < dim_; ++d) {
    const double k = cache_->wavenumber[d][mode];
    s += k * k;
  }
  return s * k0 * k0;
}

double Grid::mode_multiplicity(Eigen::Index mode) const {
  const int k = cache_->wavenumber[dim_ - 1][mode];
  return (k == 0 || k == n_ / 2) ? 1.0 : 2.0;
}

double Grid::kappa_min() const { return base_frequency() * base_frequency(); }

void Grid::forward_raw(const double* in, std::complex<double>* out) const {
  // r2c leaves its input untouched, so dropping const is safe here.
  fftw_execute_dft_r2c(cache_->forward, const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void Grid::inverse_raw(const std::complex<double>* in, double* out) const {
  Eigen::ArrayXcd scratch = Eigen::Map<const Eigen::ArrayXcd>(in, num_modes_);
  fftw_execute_dft_c2r(cache_->inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

}  // namespace wstokes
