#include "core/rng.hpp"

#include <cmath>
#include <numbers>

namespace stereodiff {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

Grid Rng::normal_grid(int c, int h, int w) {
    Grid g(c, h, w);
    for (auto& x : g.v) x = normal();
    return g;
}

} // namespace stereodiff
