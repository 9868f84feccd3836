#include "skelaug/numcore/params.hpp"

#include <cmath>

namespace skelaug::num {

Param& ParamSet::add(const std::string& name, NDArray value) {
    if (index_.count(name)) throw contract_error("ParamSet: duplicate name '" + name + "'");
    index_[name] = entries_.size();
    entries_.push_back(Param{name, std::move(value), NDArray(), false});
    return entries_.back();
}

Param& ParamSet::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw contract_error("ParamSet: unknown name '" + name + "'");
    return entries_[it->second];
}

const Param& ParamSet::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw contract_error("ParamSet: unknown name '" + name + "'");
    return entries_[it->second];
}

void ParamSet::clear_grads() {
    for (auto& p : entries_) {
        p.grad = NDArray();
        p.has_grad = false;
    }
}

bool ParamSet::all_finite() const {
    for (const auto& p : entries_)
        if (!p.value.all_finite()) return false;
    return true;
}

NDArray glorot_uniform(Shape shape, std::int64_t fan_in, std::int64_t fan_out, Rng& rng) {
    NDArray out(std::move(shape));
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = rng.uniform(-a, a);
    return out;
}

ParamLeaves::ParamLeaves(Tape& tape, ParamSet& params, bool requires_grad) : params_(&params) {
    for (auto& p : params.entries()) leaves_.emplace(p.name, tape.leaf(p.value, requires_grad));
}

Value ParamLeaves::operator[](const std::string& name) const {
    auto it = leaves_.find(name);
    if (it == leaves_.end()) throw contract_error("ParamLeaves: unknown name '" + name + "'");
    return it->second;
}

void ParamLeaves::pull_grads() {
    for (auto& p : params_->entries()) {
        const NDArray& g = leaves_.at(p.name).grad();
        if (g.empty()) throw contract_error("pull_grads: backward has not run on this tape");
        if (!p.has_grad) {
            p.grad = g;
            p.has_grad = true;
        } else {
            for (std::int64_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g[i];
        }
    }
}

}  // namespace skelaug::num
