#include "core/grid.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace stereodiff {

void check_same_shape(const Grid& a, const Grid& b, const std::string& ctx) {
    if (!a.same_shape(b)) {
        fail(ctx + ": shape mismatch (" + std::to_string(a.channels) + "x" + std::to_string(a.height) +
             "x" + std::to_string(a.width) + " vs " + std::to_string(b.channels) + "x" +
             std::to_string(b.height) + "x" + std::to_string(b.width) + ")");
    }
}

void check_nonempty(const Grid& g, const std::string& ctx) {
    check(g.channels > 0 && g.height > 0 && g.width > 0, ctx + ": empty grid");
}

bool all_finite(const Grid& g) {
    for (double x : g.v)
        if (!std::isfinite(x)) return false;
    return true;
}

void ensure_finite(const Grid& g, const std::string& ctx) {
    check(all_finite(g), ctx + ": non-finite values");
}

double max_abs_diff(const Grid& a, const Grid& b) {
    check_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
    return m;
}

double mean_sq_diff(const Grid& a, const Grid& b) {
    check_same_shape(a, b, "mean_sq_diff");
    check_nonempty(a, "mean_sq_diff");
    double s = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        double d = a.v[i] - b.v[i];
        s += d * d;
    }
    return s / double(a.v.size());
}

} // namespace stereodiff
