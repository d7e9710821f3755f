#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "compclass/bounds.hpp"

namespace compclass {

struct McResult {
  long long trials = 0;
  long long errors = 0;
  double p_hat = 0.0;
  double ci_half_width = 0.0;  // 95%
  std::uint64_t seed = 0;
};

/// One noise level of a sweep. The bound is kept as a logarithm because in the
/// exponential regime it underflows double precision long before the sweep ends.
struct CurveRow {
  double sigma2 = 0.0;
  double log_bound = 0.0;
  std::optional<McResult> mc;

  double bound() const { return std::exp(log_bound); }
};

struct ErrorCurve {
  Eigen::Index m = 0;
  UnionBoundVariant variant = UnionBoundVariant::AsPrinted;
  std::vector<CurveRow> rows;
};

}  // namespace compclass
