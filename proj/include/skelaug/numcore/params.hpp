#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "skelaug/numcore/array.hpp"
#include "skelaug/numcore/random.hpp"
#include "skelaug/numcore/tape.hpp"

namespace skelaug::num {

struct Param {
    std::string name;
    NDArray value;
    NDArray grad;          // same shape as value when present
    bool has_grad = false;
};

// Named trainable parameters with gradient slots. Iteration order is the
// insertion order, which keeps optimizer updates and serialization stable.
class ParamSet {
public:
    ParamSet() = default;
    explicit ParamSet(std::uint64_t rng_seed) : rng_seed_(rng_seed) {}

    Param& add(const std::string& name, NDArray value);
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    std::vector<Param>& entries() { return entries_; }
    const std::vector<Param>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    std::uint64_t rng_seed() const { return rng_seed_; }
    void set_rng_seed(std::uint64_t s) { rng_seed_ = s; }

    void clear_grads();
    bool all_finite() const;

private:
    std::vector<Param> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    std::uint64_t rng_seed_ = 0;
};

// Glorot-uniform weight init: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
NDArray glorot_uniform(Shape shape, std::int64_t fan_in, std::int64_t fan_out, Rng& rng);

// Leaves for every parameter of a ParamSet on one tape, by name.
class ParamLeaves {
public:
    ParamLeaves(Tape& tape, ParamSet& params, bool requires_grad);

    Value operator[](const std::string& name) const;

    // Adds d(loss)/d(param) from the tape into the ParamSet gradient slots.
    void pull_grads();

private:
    ParamSet* params_;
    std::unordered_map<std::string, Value> leaves_;
};

}  // namespace skelaug::num
