#pragma once

#include <functional>
#include <vector>

namespace siph {

// Both searches maximise and stop on a hard objective-call budget; they
// return the best point actually evaluated, so a caller that seeds the
// search with its current value can never regress by accepting the result.

struct LineResult {
  double x = 0.0;
  double value = 0.0;
  int evals = 0;
};

LineResult golden_max(const std::function<double(double)>& f, double lo, double hi,
                      int max_evals);

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evals = 0;
};

SimplexResult simplex_max(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0, double step, int max_evals);

}  // namespace siph
