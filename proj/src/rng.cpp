#include "siph/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace siph {

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_pos() {
  double u;
  do { u = uniform(); } while (u == 0.0);
  return u;
}

double Rng::exponential() { return -std::log(uniform_pos()); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("Rng::gamma: shape <= 0");
  if (shape < 1.0) {
    const double u = uniform_pos();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

long Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("Rng::poisson: mean < 0");
  long n = 0;
  double acc = exponential();
  while (acc < mean) {
    ++n;
    acc += exponential();
  }
  return n;
}

double Rng::positive_stable(double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("Rng::positive_stable: alpha outside (0,1]");
  if (alpha == 1.0) return 1.0;
  const double u = M_PI * uniform_pos();
  const double w = exponential();
  // Kanter: S = (A(u)/W)^{(1-alpha)/alpha} with
  // A(u) = [sin(alpha u)^alpha sin((1-alpha)u)^(1-alpha) / sin u]^{1/(1-alpha)}
  const double log_a = (alpha * std::log(std::sin(alpha * u)) +
                        (1.0 - alpha) * std::log(std::sin((1.0 - alpha) * u)) -
                        std::log(std::sin(u))) /
                       (1.0 - alpha);
  return std::exp(((1.0 - alpha) / alpha) * (log_a - std::log(w)));
}

double Rng::inverse_gaussian(double sigma2) {
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("Rng::inverse_gaussian: sigma2 <= 0");
  // Michael-Schucany-Haas with mu = 1, lambda = 1/sigma2
  const double nu = normal();
  const double y = nu * nu;
  const double x =
      1.0 + 0.5 * sigma2 * y -
      0.5 * sigma2 * std::sqrt(4.0 * y / sigma2 + y * y);
  const double u = uniform();
  if (u <= 1.0 / (1.0 + x)) return x;
  return 1.0 / x;
}

}  // namespace siph
