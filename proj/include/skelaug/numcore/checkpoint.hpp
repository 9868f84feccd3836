#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "skelaug/numcore/params.hpp"

namespace skelaug::num {

// Binary parameter container: a manifest (name, shape, byte offset into the
// payload) followed by raw little-endian 64-bit float payloads. Round-trips
// bit-exactly. String metadata rides along for model-level settings.
struct Checkpoint {
    std::uint32_t format_version = 1;
    std::uint64_t rng_seed = 0;
    std::map<std::string, std::string> metadata;
    std::vector<std::pair<std::string, NDArray>> arrays;

    void add_params(const std::string& prefix, const ParamSet& ps);
    ParamSet extract_params(const std::string& prefix) const;

    const std::string& meta(const std::string& key) const;
    double meta_num(const std::string& key) const;
    bool has_meta(const std::string& key) const { return metadata.count(key) > 0; }
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace skelaug::num
