#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "boltzmann/types.hpp"

namespace boltzmann::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK tables).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <typename F>
Piece gauss_kronrod_15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [lo, hi]
/// (lo > hi integrates backwards). Bisects the worst piece until the summed
/// error estimate is below abs_tol. Throws QuadratureFailure past max_pieces.
template <typename F>
Result integrate(F f, double lo, double hi, double abs_tol = kTolQuad, int max_pieces = 4000) {
  if (lo == hi) return {};
  const double sign = hi > lo ? 1.0 : -1.0;
  if (sign < 0.0) std::swap(lo, hi);

  std::priority_queue<detail::Piece> pieces;
  detail::Piece first = detail::gauss_kronrod_15(f, lo, hi);
  double total = first.value;
  double error = first.error;
  pieces.push(first);
  while (error > abs_tol) {
    if (static_cast<int>(pieces.size()) >= max_pieces) {
      throw Error(ErrorCode::QuadratureFailure,
                  "error estimate " + std::to_string(error) + " after " +
                      std::to_string(pieces.size()) + " pieces");
    }
    const detail::Piece worst = pieces.top();
    pieces.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw Error(ErrorCode::QuadratureFailure, "interval underflow near " + std::to_string(mid));
    }
    const detail::Piece left = detail::gauss_kronrod_15(f, worst.lo, mid);
    const detail::Piece right = detail::gauss_kronrod_15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    pieces.push(left);
    pieces.push(right);
  }
  // Re-sum to shed the drift of the running total.
  double sum = 0.0;
  double err = 0.0;
  const int count = static_cast<int>(pieces.size());
  while (!pieces.empty()) {
    sum += pieces.top().value;
    err += pieces.top().error;
    pieces.pop();
  }
  if (!std::isfinite(sum)) throw Error(ErrorCode::QuadratureFailure, "non-finite integrand");
  return {sign * sum, err, count};
}

}  // namespace boltzmann::quadrature
