#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>

#include "skelaug/numcore/params.hpp"

namespace testsupport {

using skelaug::num::NDArray;
using skelaug::num::ParamSet;
using skelaug::num::Rng;
using skelaug::num::Shape;

inline NDArray random_array(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    NDArray a(std::move(shape));
    for (std::int64_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(lo, hi);
    return a;
}

// Central finite differences against analytic gradients over every element of
// every parameter. `loss` must be a pure function of the ParamSet values.
// Returns the worst relative error seen.
inline double fd_check(const std::function<double(ParamSet&)>& loss, ParamSet& params,
                       const std::function<void(ParamSet&)>& compute_grads, double h = 1e-5) {
    compute_grads(params);
    std::vector<std::pair<std::string, NDArray>> analytic;
    for (auto& p : params.entries()) analytic.emplace_back(p.name, p.grad);

    double worst = 0.0;
    for (auto& p : params.entries()) {
        NDArray& g = analytic[static_cast<std::size_t>(&p - params.entries().data())].second;
        for (std::int64_t i = 0; i < p.value.size(); ++i) {
            const double keep = p.value[i];
            p.value[i] = keep + h;
            const double up = loss(params);
            p.value[i] = keep - h;
            const double dn = loss(params);
            p.value[i] = keep;
            const double fd = (up - dn) / (2.0 * h);
            const double an = g[i];
            const double rel = std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-6});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("skelaug-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string fixtures_root() {
    if (const char* env = std::getenv("SKELAUG_FIXTURES")) return env;
    return "tests/fixtures";
}

}  // namespace testsupport
