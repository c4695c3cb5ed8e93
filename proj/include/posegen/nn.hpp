#pragma once

#include "posegen/autograd.hpp"
#include "posegen/rng.hpp"

#include <string>
#include <utility>
#include <vector>

namespace posegen::nn {

/** Named parameter table for one network. Insertion order is the
 *  serialization order; names make checkpoints self-describing. */
class ParamStore {
public:
    // std_dev == 0 gives zero init, otherwise N(0, std_dev) per element
    ag::Var add(const std::string& name, std::vector<int> dims, Scalar std_dev, Rng& rng);

    const std::vector<std::pair<std::string, ag::Var>>& entries() const { return entries_; }
    ag::Var find(const std::string& name) const;
    void set_value(const std::string& name, const Tensor& value); // shape-checked
    void zero_grads();
    int total_size() const;
    // true once every parameter has a gradient buffer (i.e. backward reached it)
    bool all_have_grads() const;

private:
    std::vector<std::pair<std::string, ag::Var>> entries_;
};

inline constexpr Scalar kWeightInitStd = 0.02;

struct Conv2d {
    ag::Var w, b;
    ag::ConvSpec spec;

    Conv2d() = default;
    Conv2d(ParamStore& ps, const std::string& name, int cin, int cout, int k,
           const ag::ConvSpec& spec_, Rng& rng);

    ag::Var operator()(const ag::Var& x) const { return ag::conv2d(x, w, b, spec); }
};

struct Linear {
    ag::Var w, b;

    Linear() = default;
    Linear(ParamStore& ps, const std::string& name, int in, int out, Rng& rng);

    ag::Var operator()(const ag::Var& x) const { return ag::linear(x, w, b); }
};

} // namespace posegen::nn
