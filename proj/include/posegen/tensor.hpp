#pragma once

#include "posegen/common.hpp"

#include <initializer_list>
#include <vector>

namespace posegen {

/** Dense n-d array over Scalar, flat Eigen storage.
 *
 *  Layout conventions used across the project:
 *    images / activations  (C,H,W)  — channel planes contiguous, rows inside
 *    matrices              (R,C)    — row-major
 *    conv weights          (Cout,Cin,kh,kw)
 */
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> dims);

    static Tensor zeros(std::vector<int> dims) { return Tensor(std::move(dims)); }
    static Tensor full(std::vector<int> dims, Scalar v);
    static Tensor scalar(Scalar v) { return full({1}, v); }
    static Tensor from_array(std::vector<int> dims, ArrayX values);

    bool empty() const { return data_.size() == 0; }
    int size() const { return int(data_.size()); }
    int ndim() const { return int(dims_.size()); }
    int dim(int i) const { return dims_[size_t(i)]; }
    const std::vector<int>& dims() const { return dims_; }
    bool same_dims(const Tensor& o) const { return dims_ == o.dims_; }

    Scalar* data() { return data_.data(); }
    const Scalar* data() const { return data_.data(); }
    ArrayX& raw() { return data_; }
    const ArrayX& raw() const { return data_; }

    Scalar& operator[](int i) { return data_[i]; }
    Scalar operator[](int i) const { return data_[i]; }

    // (R,C) row-major accessor
    Scalar& at2(int r, int c) { return data_[r * dims_[1] + c]; }
    Scalar at2(int r, int c) const { return data_[r * dims_[1] + c]; }

    // (C,H,W) accessor
    Scalar& at3(int c, int y, int x) {
        return data_[(c * dims_[1] + y) * dims_[2] + x];
    }
    Scalar at3(int c, int y, int x) const {
        return data_[(c * dims_[1] + y) * dims_[2] + x];
    }

    Scalar item() const;

    bool all_finite() const { return data_.isFinite().all(); }

    void fill(Scalar v) { data_.setConstant(v); }
    void setZero() { data_.setZero(); }

    Tensor reshaped(std::vector<int> dims) const;

private:
    std::vector<int> dims_;
    ArrayX data_;
};

int dims_count(const std::vector<int>& dims);
std::string dims_str(const std::vector<int>& dims);

} // namespace posegen
