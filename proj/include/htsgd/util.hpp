#ifndef HTSGD_UTIL_HPP
#define HTSGD_UTIL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

namespace htsgd {

using Vector = Eigen::VectorXd;

// Kahan (compensated) running sum; keeps 1e6-step accumulations accurate to
// ~1e-12 relative.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Component-wise compensated running mean of vectors (Polyak-Ruppert average).
class RunningMean {
 public:
  void add(const Eigen::Ref<const Vector>& x) {
    if (count_ == 0) {
      sums_ = Vector::Zero(x.size());
      comps_ = Vector::Zero(x.size());
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double y = x[i] - comps_[i];
      const double t = sums_[i] + y;
      comps_[i] = (t - sums_[i]) - y;
      sums_[i] = t;
    }
    ++count_;
  }
  long count() const { return count_; }
  Vector mean() const { return sums_ / static_cast<double>(count_); }

 private:
  Vector sums_;
  Vector comps_;
  long count_ = 0;
};

// Wilson score interval for a binomial proportion, two-sided with normal
// quantile z. Behaves sensibly at zero/full counts.
std::pair<double, double> wilson_interval(long successes, long n, double z);

// Two-sided normal quantiles used throughout.
inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;
// One-sided 99.9%.
inline constexpr double kZ999OneSided = 3.090232306167813;

// FNV-1a 64-bit content fingerprint (not cryptographic); used for the output
// manifest and byte-identity checks.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string fnv1a64_hex(const std::string& bytes);

// Shortest exact decimal formatting used for all emitted floats (17
// significant digits round-trips IEEE doubles).
std::string format_double(double v);

}  // namespace htsgd

#endif  // HTSGD_UTIL_HPP
