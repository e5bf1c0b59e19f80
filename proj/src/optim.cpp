#include "siph/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace siph {

namespace {
constexpr double kGolden = 0.6180339887498949;
}

LineResult golden_max(const std::function<double(double)>& f, double lo, double hi,
                      int max_evals) {
  if (!(hi > lo)) throw std::invalid_argument("empty search interval");
  LineResult best{lo, -std::numeric_limits<double>::infinity(), 0};
  auto eval = [&](double x) {
    const double v = f(x);
    ++best.evals;
    if (v > best.value) {
      best.value = v;
      best.x = x;
    }
    return v;
  };
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  while (best.evals < max_evals) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = eval(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = eval(x1);
    }
  }
  return best;
}

SimplexResult simplex_max(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0, double step, int max_evals) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("empty start point");

  SimplexResult best{x0, -std::numeric_limits<double>::infinity(), 0};
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++best.evals;
    if (v > best.value) {
      best.value = v;
      best.x = x;
    }
    return v;
  };

  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i)
    pts[i + 1][i] += (x0[i] != 0.0) ? step * std::abs(x0[i]) : step;
  for (std::size_t i = 0; i <= n && best.evals < max_evals; ++i) vals[i] = eval(pts[i]);
  if (best.evals < static_cast<int>(n + 1)) return best;

  while (best.evals < max_evals) {
    // Order so pts[0] is best and pts[n] worst for a maximiser.
    std::vector<std::size_t> ord(n + 1);
    for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    std::vector<std::vector<double>> sp(n + 1);
    std::vector<double> sv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      sp[i] = pts[ord[i]];
      sv[i] = vals[ord[i]];
    }
    pts.swap(sp);
    vals.swap(sv);

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);

    auto blend = [&](double c) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + c * (pts[n][k] - centroid[k]);
      return x;
    };

    std::vector<double> xr = blend(-1.0);
    const double fr = eval(xr);
    if (best.evals >= max_evals) break;
    if (fr > vals[0]) {
      std::vector<double> xe = blend(-2.0);
      const double fe = eval(xe);
      if (fe > fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
    } else if (fr > vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
    } else {
      std::vector<double> xc = blend(0.5);
      const double fc = eval(xc);
      if (fc > vals[n]) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n && best.evals < max_evals; ++i) {
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = 0.5 * (pts[i][k] + pts[0][k]);
          vals[i] = eval(pts[i]);
        }
      }
    }
  }
  return best;
}

}  // namespace siph
