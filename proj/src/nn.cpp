#include "posegen/nn.hpp"

namespace posegen::nn {

ag::Var ParamStore::add(const std::string& name, std::vector<int> dims, Scalar std_dev,
                        Rng& rng) {
    for (const auto& [n, v] : entries_)
        require(n != name, ErrorClass::internal, "duplicate parameter name " + name);
    Tensor t = Tensor::zeros(std::move(dims));
    if (std_dev > 0)
        for (int i = 0; i < t.size(); ++i) t[i] = std_dev * rng.normal();
    ag::Var v = ag::Var::param(std::move(t));
    entries_.emplace_back(name, v);
    return v;
}

ag::Var ParamStore::find(const std::string& name) const {
    for (const auto& [n, v] : entries_)
        if (n == name) return v;
    throw Error(ErrorClass::internal, "unknown parameter " + name);
}

void ParamStore::set_value(const std::string& name, const Tensor& value) {
    ag::Var v = find(name);
    require(v.value().dims() == value.dims(), ErrorClass::checkpoint_mismatch,
            "parameter " + name + " has shape " + dims_str(v.value().dims()) +
                ", incoming tensor is " + dims_str(value.dims()));
    v.value_mut() = value;
}

void ParamStore::zero_grads() {
    for (auto& [n, v] : entries_) v.zero_grad();
}

int ParamStore::total_size() const {
    int total = 0;
    for (const auto& [n, v] : entries_) total += v.value().size();
    return total;
}

bool ParamStore::all_have_grads() const {
    for (const auto& [n, v] : entries_)
        if (v.grad().empty()) return false;
    return true;
}

Conv2d::Conv2d(ParamStore& ps, const std::string& name, int cin, int cout, int k,
               const ag::ConvSpec& spec_, Rng& rng)
    : spec(spec_) {
    w = ps.add(name + ".w", {cout, cin, k, k}, kWeightInitStd, rng);
    b = ps.add(name + ".b", {cout}, 0.0, rng);
}

Linear::Linear(ParamStore& ps, const std::string& name, int in, int out, Rng& rng) {
    w = ps.add(name + ".w", {out, in}, kWeightInitStd, rng);
    b = ps.add(name + ".b", {out}, 0.0, rng);
}

} // namespace posegen::nn
