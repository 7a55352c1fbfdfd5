#include "osr/rng.hpp"

#include <cmath>

#include "osr/error.hpp"

namespace osr {

namespace {

uint64_t splitmix64(uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Rng::Rng(uint64_t seed) : seed_(seed) {
    uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

int Rng::next_int(int n) {
    if (n < 1) throw ContractError("next_int: n must be >= 1");
    int v = static_cast<int>(next_double() * n);
    return v < n ? v : n - 1;
}

double Rng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 nudged away from 0 so the log is finite.
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

uint64_t derive_seed(uint64_t global_seed, uint64_t index) {
    uint64_t x = global_seed ^ (0xA0761D6478BD642FULL + index * 0xE7037ED1A0B428DBULL);
    return splitmix64(x);
}

std::vector<double> sample_gaussian(Rng& rng, size_t n, double sigma) {
    if (sigma < 0.0) throw ContractError("sample_gaussian: sigma must be >= 0");
    std::vector<double> out(n, 0.0);
    if (sigma == 0.0) return out;
    for (size_t i = 0; i < n; ++i) out[i] = sigma * rng.next_gaussian();
    return out;
}

} // namespace osr
