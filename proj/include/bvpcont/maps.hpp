#pragma once

#include <functional>
#include <span>

namespace bvpcont {

/// f(t, u) -> out, all of the problem dimension.
using FieldFn = std::function<void(double t, std::span<const double> u, std::span<double> out)>;
/// g(u) -> out.
using VectorMap = std::function<void(std::span<const double> u, std::span<double> out)>;

FieldFn scalar_field(std::function<double(double t, double u)> f);
VectorMap scalar_map(std::function<double(double)> g);

}  // namespace bvpcont
