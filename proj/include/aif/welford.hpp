#ifndef AIF_WELFORD_HPP
#define AIF_WELFORD_HPP

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace aif {

/// Single-pass mean and co-moment accumulator over a fixed-length vector of
/// observables. Co-moments are stored as the packed upper triangle.
/// merge() is the pairwise (Chan et al.) combination, so partial accumulators
/// from independent batches can be reduced in any grouping.
class CovarianceAccumulator {
 public:
  CovarianceAccumulator() = default;
  explicit CovarianceAccumulator(std::size_t dim)
      : dim_(dim), mean_(dim, 0.0), comoment_(dim * (dim + 1) / 2, 0.0), delta_(dim, 0.0) {}

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t count() const noexcept { return n_; }

  void add(std::span<const double> x) {
    assert(x.size() == dim_);
    ++n_;
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < dim_; ++i) {
      delta_[i] = x[i] - mean_[i];
      mean_[i] += delta_[i] * inv_n;
    }
    std::size_t p = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double di = delta_[i];
      for (std::size_t j = i; j < dim_; ++j, ++p) comoment_[p] += di * (x[j] - mean_[j]);
    }
  }

  void merge(const CovarianceAccumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    assert(other.dim_ == dim_);
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    for (std::size_t i = 0; i < dim_; ++i) delta_[i] = other.mean_[i] - mean_[i];
    std::size_t p = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = i; j < dim_; ++j, ++p) {
        comoment_[p] += other.comoment_[p] + delta_[i] * delta_[j] * na * nb / n;
      }
    }
    for (std::size_t i = 0; i < dim_; ++i) mean_[i] += delta_[i] * nb / n;
    n_ += other.n_;
  }

  double mean(std::size_t i) const { return mean_[i]; }

  /// Sample covariance (n - 1 denominator); zero for fewer than two samples.
  double covariance(std::size_t i, std::size_t j) const {
    if (n_ < 2) return 0.0;
    if (i > j) std::swap(i, j);
    return comoment_[packed(i, j)] / static_cast<double>(n_ - 1);
  }

  double variance(std::size_t i) const { return covariance(i, i); }

  Eigen::VectorXd mean_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(mean_.data(), static_cast<Eigen::Index>(dim_));
  }

  Eigen::MatrixXd covariance_matrix() const {
    Eigen::MatrixXd out(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = covariance(i, j);
    return out;
  }

 private:
  std::size_t packed(std::size_t i, std::size_t j) const { return i * dim_ - i * (i - 1) / 2 + (j - i); }

  std::size_t dim_ = 0;
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;
  std::vector<double> delta_;  // scratch
};

}  // namespace aif

#endif  // AIF_WELFORD_HPP
