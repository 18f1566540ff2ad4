#pragma once

#include <Eigen/Core>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/rational.hpp>
#include <cmath>
#include <string>

#include "proxyvote/rng.hpp"

using Rational = boost::rational<long long>;

namespace Eigen {
template <>
struct NumTraits<Rational> : GenericNumTraits<Rational> {
  using Real = Rational;
  using NonInteger = Rational;
  using Literal = Rational;
  using Nested = Rational;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 3
  };
};
}  // namespace Eigen

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(PROXYVOTE_FIXTURES) + "/" + name; }

// Tanh-sinh quadrature; copes with integrable endpoint singularities.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-11) {
  if (a == b) return 0;
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  // Abscissae can round onto an endpoint where a density may be infinite.
  auto interior = [&](double x) { return x <= a || x >= b ? 0.0 : f(x); };
  return rule.integrate(interior, a, b, tol);
}

// Same, split at interior kinks.
template <typename F>
double integrate(F&& f, double a, double b, std::initializer_list<double> breaks, double tol = 1e-11) {
  double total = 0, lo = a;
  for (double c : breaks)
    if (lo < c && c < b) {
      total += integrate(f, lo, c, tol);
      lo = c;
    }
  return total + integrate(f, lo, b, tol);
}

inline Eigen::VectorXd uniform_vector(proxyvote::Stream& rng, Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = lo + (hi - lo) * rng.uniform();
  return v;
}

}  // namespace testing
