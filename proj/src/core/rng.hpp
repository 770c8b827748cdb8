#pragma once

#include <cstdint>
#include <random>

#include "core/grid.hpp"

namespace stereodiff {

// mt19937_64 with a hand-rolled Box-Muller transform. std::normal_distribution's
// output is not pinned by the standard, so generated streams would differ across
// library implementations; this keeps seeds portable.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    // uniform in [0,1)
    double uniform() {
        return double(eng_() >> 11) * 0x1.0p-53;
    }

    double normal();

    Grid normal_grid(int c, int h, int w);

    uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace stereodiff
