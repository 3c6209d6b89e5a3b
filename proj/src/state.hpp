#pragma once

#include <vector>

namespace vardiss {

/// Generalized coordinates x, rates v = dx/dt and time t.
struct State {
  std::vector<double> x;
  std::vector<double> v;
  double t = 0.0;

  std::size_t dim() const noexcept { return x.size(); }
};

}  // namespace vardiss
