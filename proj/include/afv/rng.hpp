#pragma once

#include <cstdint>
#include <random>

namespace afv {

// Explicit random stream; no global RNG anywhere in the engine. Substreams
// derived from (seed, index) make parallel path simulation reproducible.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    static RandomStream substream(std::uint64_t seed, std::uint64_t index) {
        // splitmix64 mix of (seed, index) to decorrelate consecutive indices
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return RandomStream(z);
    }

    double uniform() { return u01_(eng_); }
    double gauss() { return normal_(eng_); }
    double exponential() { return -std::log(1.0 - u01_(eng_)); }
    double gamma(double shape, double scale) {
        std::gamma_distribution<double> g(shape, scale);
        return g(eng_);
    }
    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
    std::uniform_real_distribution<double> u01_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace afv
