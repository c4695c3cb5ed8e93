#include "posegen/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace posegen {

const char* to_string(ErrorClass cls) {
    switch (cls) {
        case ErrorClass::config: return "config";
        case ErrorClass::io: return "io";
        case ErrorClass::data: return "data";
        case ErrorClass::checkpoint_mismatch: return "checkpoint_mismatch";
        case ErrorClass::invalid_part_group: return "invalid_part_group";
        case ErrorClass::numeric: return "numeric";
        case ErrorClass::internal: return "internal";
    }
    return "internal";
}

Scalar Rng::uniform() {
    // 53-bit mantissa in [0,1)
    return Scalar(engine_() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int n) {
    require(n > 0, ErrorClass::internal, "uniform_int needs n > 0");
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % std::uint64_t(n);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return int(x % std::uint64_t(n));
}

Scalar Rng::normal() {
    const Scalar u1 = Scalar(1.0) - uniform(); // (0,1]
    const Scalar u2 = uniform();
    return std::sqrt(Scalar(-2.0) * std::log(u1)) *
           std::cos(Scalar(2.0) * std::numbers::pi_v<Scalar> * u2);
}

std::string Rng::save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
}

void Rng::load_state(const std::string& state) {
    std::istringstream is(state);
    is >> engine_;
    require(!is.fail(), ErrorClass::checkpoint_mismatch, "corrupt rng state");
}

std::uint64_t Rng::derive_seed(std::uint64_t base, const std::string& tag) {
    // FNV-1a over the tag, then splitmix64 finalizer
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL + h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace posegen
