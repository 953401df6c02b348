#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace eos {

/// Flat coordinate vector of model parameters. Fixed length for the lifetime
/// of an experiment; arithmetic goes through the dispatched kernels.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  ParameterVector(std::initializer_list<double> values) : data_(values) {}
  explicit ParameterVector(std::vector<double> values) : data_(std::move(values)) {}

  static ParameterVector basis(std::size_t n, std::size_t i);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  operator std::span<const double>() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  const std::vector<double>& values() const noexcept { return data_; }

  bool all_finite() const noexcept;

  ParameterVector& operator+=(const ParameterVector& other);
  ParameterVector& operator-=(const ParameterVector& other);
  ParameterVector& operator*=(double a);

  // this += a * x
  ParameterVector& add_scaled(double a, const ParameterVector& x);

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  std::vector<double> data_;
};

ParameterVector operator+(ParameterVector a, const ParameterVector& b);
ParameterVector operator-(ParameterVector a, const ParameterVector& b);
ParameterVector operator*(double s, ParameterVector a);
ParameterVector operator-(ParameterVector a);

double dot(const ParameterVector& a, const ParameterVector& b);
double norm(const ParameterVector& a);
double norm_inf(const ParameterVector& a);

/// a / ‖a‖; the zero vector is returned unchanged.
ParameterVector normalized(ParameterVector a);

/// Component of v orthogonal to the unit vector u.
ParameterVector project_out(ParameterVector v, const ParameterVector& u);

}  // namespace eos
