#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "qgnls/error.hpp"

namespace qgnls {

template <class F>
RootResult solve_increasing(const std::string& name, F&& f, double rhs) {
  RootResult r;
  r.equation = name;
  auto h = [&](double x) { return f(x) - rhs; };

  double lo = 1.0, hi = 1.0;
  int guard = 0;
  while (h(lo) >= 0.0) {
    lo *= 0.5;
    if (++guard > 2000 || lo == 0.0) throw RootBracketFailure(name);
  }
  guard = 0;
  while (h(hi) <= 0.0) {
    hi *= 2.0;
    if (++guard > 2000 || !std::isfinite(hi)) throw RootBracketFailure(name);
  }

  // The defining functions are increasing by construction; check it on a
  // log-spaced sample of the bracket before accepting the root.
  r.monotone = true;
  double prev = h(lo);
  for (int i = 1; i <= 64; ++i) {
    const double x = lo * std::pow(hi / lo, i / 64.0);
    const double v = h(x);
    if (!(v > prev)) r.monotone = false;
    prev = v;
  }
  if (!r.monotone) throw RootBracketFailure(name + " (not strictly increasing on the bracket)");

  std::uintmax_t iters = 200;
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
  auto [a, b] = boost::math::tools::toms748_solve(h, lo, hi, tol, iters);
  r.value = std::abs(h(a)) <= std::abs(h(b)) ? a : b;
  r.iterations = static_cast<int>(iters);
  r.residual = std::abs(h(r.value)) / std::abs(rhs);
  return r;
}

}  // namespace qgnls
