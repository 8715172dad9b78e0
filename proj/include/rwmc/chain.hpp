#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "rwmc/error.hpp"

namespace rwmc {

/// Read-only view of m feature vectors of dimension p stored row-major.
class ChainView {
 public:
  ChainView(std::span<const double> data, std::size_t p) : data_(data), p_(p) {
    if (p == 0) throw InvalidArgument("chain dimension must be positive");
    if (data.size() % p != 0) throw InvalidArgument("chain data is not a whole number of rows");
  }

  std::size_t dimension() const noexcept { return p_; }
  std::size_t length() const noexcept { return data_.size() / p_; }
  std::span<const double> row(std::size_t t) const { return data_.subspan(t * p_, p_); }
  double operator()(std::size_t t, std::size_t j) const { return data_[t * p_ + j]; }

  /// First `m` rows.
  ChainView prefix(std::size_t m) const { return {data_.first(m * p_), p_}; }

 private:
  std::span<const double> data_;
  std::size_t p_;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Componentwise compensated mean of every row in the chain.
inline std::vector<double> chain_mean(const ChainView& chain) {
  const std::size_t m = chain.length();
  if (m == 0) throw InvalidArgument("mean of an empty chain");
  std::vector<CompensatedSum> acc(chain.dimension());
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t j = 0; j < chain.dimension(); ++j) acc[j].add(chain(t, j));
  std::vector<double> out(chain.dimension());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = acc[j].value() / static_cast<double>(m);
  return out;
}

}  // namespace rwmc
