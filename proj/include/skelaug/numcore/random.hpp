#pragma once

#include <cstdint>
#include <random>

namespace skelaug::num {

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream id for (base seed, sample index, copy index). Streams are
// decorrelated regardless of the order they are consumed in.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// mt19937_64 wrapper; distribution objects are constructed per call so no
// state is carried between draws besides the engine itself.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal(double mean, double stddev) {
        std::normal_distribution<double> d(mean, stddev);
        return d(gen_);
    }
    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive
        std::uniform_int_distribution<std::int64_t> d(lo, hi);
        return d(gen_);
    }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace skelaug::num
