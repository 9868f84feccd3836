#include "skelaug/numcore/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace skelaug::num {

namespace {

constexpr char kMagic[8] = {'S', 'K', 'L', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

// The on-disk encoding is little-endian; this code assumes a little-endian
// host (checked at load via the magic + round-trip tests).
template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw data_error("checkpoint: truncated while reading " + what);
    return v;
}

void put_str(std::ostream& os, const std::string& s) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& is, const std::string& what) {
    const auto n = get<std::uint32_t>(is, what);
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw data_error("checkpoint: truncated while reading " + what);
    return s;
}

}  // namespace

void Checkpoint::add_params(const std::string& prefix, const ParamSet& ps) {
    for (const auto& p : ps.entries()) arrays.emplace_back(prefix + p.name, p.value);
    metadata[prefix + "rng_seed"] = std::to_string(ps.rng_seed());
}

ParamSet Checkpoint::extract_params(const std::string& prefix) const {
    ParamSet ps;
    for (const auto& [name, arr] : arrays)
        if (name.rfind(prefix, 0) == 0) ps.add(name.substr(prefix.size()), arr);
    if (ps.size() == 0) throw data_error("checkpoint: no arrays under prefix '" + prefix + "'");
    auto it = metadata.find(prefix + "rng_seed");
    if (it != metadata.end()) ps.set_rng_seed(std::stoull(it->second));
    return ps;
}

const std::string& Checkpoint::meta(const std::string& key) const {
    auto it = metadata.find(key);
    if (it == metadata.end()) throw data_error("checkpoint: missing metadata key '" + key + "'");
    return it->second;
}

double Checkpoint::meta_num(const std::string& key) const { return std::stod(meta(key)); }

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw data_error("checkpoint: cannot open '" + path + "' for writing");

    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kFormatVersion);
    put<std::uint64_t>(os, ckpt.rng_seed);

    put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.metadata.size()));
    for (const auto& [k, v] : ckpt.metadata) {
        put_str(os, k);
        put_str(os, v);
    }

    put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.arrays.size()));
    std::uint64_t offset = 0;
    for (const auto& [name, arr] : ckpt.arrays) {
        put_str(os, name);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(arr.shape().rank()));
        for (auto d : arr.shape().dims) put<std::int64_t>(os, d);
        put<std::uint64_t>(os, offset);
        offset += static_cast<std::uint64_t>(arr.size()) * sizeof(double);
    }
    for (const auto& [name, arr] : ckpt.arrays) {
        (void)name;
        os.write(reinterpret_cast<const char*>(arr.data()),
                 static_cast<std::streamsize>(arr.size() * static_cast<std::int64_t>(sizeof(double))));
    }
    if (!os) throw data_error("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("checkpoint: cannot open '" + path + "'");

    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw data_error("checkpoint: '" + path + "' is not a checkpoint file");
    Checkpoint ckpt;
    ckpt.format_version = get<std::uint32_t>(is, "version");
    if (ckpt.format_version != kFormatVersion)
        throw data_error("checkpoint: unsupported format version " + std::to_string(ckpt.format_version));
    ckpt.rng_seed = get<std::uint64_t>(is, "rng seed");

    const auto n_meta = get<std::uint32_t>(is, "metadata count");
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        std::string k = get_str(is, "metadata key");
        ckpt.metadata[k] = get_str(is, "metadata value");
    }

    const auto n_arrays = get<std::uint32_t>(is, "array count");
    std::vector<std::uint64_t> offsets;
    for (std::uint32_t i = 0; i < n_arrays; ++i) {
        std::string name = get_str(is, "array name");
        const auto rank = get<std::uint32_t>(is, "rank");
        Shape shape;
        for (std::uint32_t d = 0; d < rank; ++d) shape.dims.push_back(get<std::int64_t>(is, "dim"));
        offsets.push_back(get<std::uint64_t>(is, "offset"));
        ckpt.arrays.emplace_back(std::move(name), NDArray(shape));
    }
    std::uint64_t expect = 0;
    for (std::uint32_t i = 0; i < n_arrays; ++i) {
        auto& [name, arr] = ckpt.arrays[i];
        if (offsets[i] != expect)
            throw data_error("checkpoint: manifest offset mismatch for '" + name + "'");
        is.read(reinterpret_cast<char*>(arr.data()),
                static_cast<std::streamsize>(arr.size() * static_cast<std::int64_t>(sizeof(double))));
        if (!is) throw data_error("checkpoint: truncated payload for '" + name + "'");
        expect += static_cast<std::uint64_t>(arr.size()) * sizeof(double);
    }
    return ckpt;
}

}  // namespace skelaug::num
