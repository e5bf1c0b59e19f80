#pragma once

#include <cstdint>

namespace siph {

// xoshiro256++ seeded through splitmix64.  All samplers in the library draw
// from this generator only, so a run is reproducible from the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();

  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1)
  double exponential();  // rate 1
  double normal();       // standard, Box-Muller with one value cached

  // Gamma(shape, rate 1), Marsaglia-Tsang with the U^{1/shape} boost for
  // shape < 1.
  double gamma(double shape);

  // Poisson(mean) by counting unit-exponential arrivals; exact for any mean.
  long poisson(double mean);

  // Positive (one-sided) alpha-stable with Laplace transform exp(-u^alpha),
  // alpha in (0, 1]; alpha == 1 is the unit point mass.
  double positive_stable(double alpha);

  // Inverse Gaussian with mean 1 and shape 1/sigma2 (Laplace transform
  // exp((1 - sqrt(1 + 2 sigma2 u)) / sigma2)).
  double inverse_gaussian(double sigma2);

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace siph
