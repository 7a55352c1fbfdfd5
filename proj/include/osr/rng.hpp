#ifndef OSR_RNG_HPP
#define OSR_RNG_HPP

#include <cstdint>
#include <vector>

namespace osr {

// Deterministic in-repo generator: xoshiro256++ state seeded via splitmix64,
// uniform doubles from the top 53 bits, gaussians via the basic (rejection
// free) Box-Muller transform with one cached spare. Identical seed gives an
// identical sample stream, independent of platform RNG libraries.
class Rng {
  public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // uniform in [0, 1)
    double next_double();

    // uniform in [lo, hi)
    double uniform(double lo, double hi);

    // integer in [0, n), n >= 1
    int next_int(int n);

    // N(0, 1)
    double next_gaussian();

    uint64_t seed() const { return seed_; }

  private:
    uint64_t seed_;
    uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stable per-item seed derivation for worker-owned generators.
uint64_t derive_seed(uint64_t global_seed, uint64_t index);

// n i.i.d. samples from N(0, sigma^2); sigma == 0 yields exact zeros.
std::vector<double> sample_gaussian(Rng& rng, size_t n, double sigma);

} // namespace osr

#endif
