#include "eos/vector.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "eos/kernels.hpp"

namespace eos {

ParameterVector ParameterVector::basis(std::size_t n, std::size_t i) {
  ParameterVector e(n);
  e[i] = 1.0;
  return e;
}

bool ParameterVector::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ParameterVector& ParameterVector::operator+=(const ParameterVector& other) {
  assert(other.size() == size());
  kernels::axpy(1.0, other.span(), span());
  return *this;
}

ParameterVector& ParameterVector::operator-=(const ParameterVector& other) {
  assert(other.size() == size());
  kernels::axpy(-1.0, other.span(), span());
  return *this;
}

ParameterVector& ParameterVector::operator*=(double a) {
  kernels::scale(a, span());
  return *this;
}

ParameterVector& ParameterVector::add_scaled(double a, const ParameterVector& x) {
  assert(x.size() == size());
  kernels::axpy(a, x.span(), span());
  return *this;
}

ParameterVector operator+(ParameterVector a, const ParameterVector& b) { return a += b; }
ParameterVector operator-(ParameterVector a, const ParameterVector& b) { return a -= b; }
ParameterVector operator*(double s, ParameterVector a) { return a *= s; }
ParameterVector operator-(ParameterVector a) { return a *= -1.0; }

double dot(const ParameterVector& a, const ParameterVector& b) {
  assert(a.size() == b.size());
  return kernels::dot(a.span(), b.span());
}

double norm(const ParameterVector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const ParameterVector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

ParameterVector normalized(ParameterVector a) {
  const double n = norm(a);
  if (n > 0.0) a *= 1.0 / n;
  return a;
}

ParameterVector project_out(ParameterVector v, const ParameterVector& u) {
  v.add_scaled(-dot(u, v), u);
  return v;
}

}  // namespace eos
