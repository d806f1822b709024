#pragma once

#include <array>
#include <cstddef>

namespace bvpcont::detail {

inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Eight-point Gauss-Legendre rule on [lo, hi].
template <class F>
double gauss(const F& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) acc += kGaussWeights[i] * f(mid + half * kGaussNodes[i]);
  return acc * half;
}

}  // namespace bvpcont::detail
