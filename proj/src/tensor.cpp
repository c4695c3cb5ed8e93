#include "posegen/tensor.hpp"

#include <sstream>

namespace posegen {

int dims_count(const std::vector<int>& dims) {
    int n = 1;
    for (int d : dims) {
        require(d > 0, ErrorClass::internal, "tensor dims must be positive");
        n *= d;
    }
    return n;
}

std::string dims_str(const std::vector<int>& dims) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
    os << ")";
    return os.str();
}

Tensor::Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
    data_ = ArrayX::Zero(dims_count(dims_));
}

Tensor Tensor::full(std::vector<int> dims, Scalar v) {
    Tensor t(std::move(dims));
    t.data_.setConstant(v);
    return t;
}

Tensor Tensor::from_array(std::vector<int> dims, ArrayX values) {
    require(dims_count(dims) == int(values.size()), ErrorClass::internal,
            "from_array: size mismatch");
    Tensor t;
    t.dims_ = std::move(dims);
    t.data_ = std::move(values);
    return t;
}

Scalar Tensor::item() const {
    require(size() == 1, ErrorClass::internal, "item() on non-scalar tensor");
    return data_[0];
}

Tensor Tensor::reshaped(std::vector<int> dims) const {
    require(dims_count(dims) == size(), ErrorClass::internal,
            "reshape: size mismatch " + dims_str(dims_) + " -> " + dims_str(dims));
    Tensor t;
    t.dims_ = std::move(dims);
    t.data_ = data_;
    return t;
}

} // namespace posegen
