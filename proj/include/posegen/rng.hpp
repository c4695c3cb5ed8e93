#pragma once

#include "posegen/common.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace posegen {

/** Seeded random source with a serializable stream position.
 *
 *  normal() is stateless per call (plain Box-Muller, the spare value is
 *  discarded), so the stream position is a pure function of the number of
 *  draws. That keeps checkpoint/resume continuations exact.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    // uniform in [0,1)
    Scalar uniform();
    // uniform integer in [0, n)
    int uniform_int(int n);
    // standard normal draw
    Scalar normal();

    std::uint64_t raw() { return engine_(); }

    std::string save_state() const;
    void load_state(const std::string& state);

    // Derive an independent sub-stream seed, stable across runs.
    static std::uint64_t derive_seed(std::uint64_t base, const std::string& tag);

private:
    std::mt19937_64 engine_;
};

} // namespace posegen
