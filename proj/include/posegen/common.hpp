#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace posegen {

using Scalar = double;

using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using GridI = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic>;      // (H,W)
using GridS = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;   // (H,W)
using GridB = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;    // (H,W)

// Error classes surfaced by the CLI as "error: <cls>: <msg>".
enum class ErrorClass {
    config,
    io,
    data,
    checkpoint_mismatch,
    invalid_part_group,
    numeric,
    internal,
};

const char* to_string(ErrorClass cls);

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg)
        : std::runtime_error(std::string(to_string(cls)) + ": " + msg), cls_(cls) {}
    ErrorClass cls() const { return cls_; }

private:
    ErrorClass cls_;
};

inline void require(bool cond, ErrorClass cls, const std::string& msg) {
    if (!cond) throw Error(cls, msg);
}

} // namespace posegen
