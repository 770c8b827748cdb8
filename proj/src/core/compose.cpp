#include "core/compose.hpp"

#include "core/errors.hpp"

namespace stereodiff {

namespace {

double luma(const Grid& g, int y, int x) {
    if (g.channels == 1) return g.at(0, y, x);
    return 0.299 * g.at(0, y, x) + 0.587 * g.at(1, y, x) + 0.114 * g.at(2, y, x);
}

void check_pair(const Grid& left, const Grid& right, const char* what) {
    check_nonempty(left, what);
    check_same_shape(left, right, what);
}

} // namespace

Grid side_by_side(const Grid& left, const Grid& right) {
    check_pair(left, right, "side_by_side");
    Grid out(left.channels, left.height, 2 * left.width);
    for (int c = 0; c < left.channels; ++c)
        for (int y = 0; y < left.height; ++y)
            for (int x = 0; x < left.width; ++x) {
                out.at(c, y, x) = left.at(c, y, x);
                out.at(c, y, x + left.width) = right.at(c, y, x);
            }
    return out;
}

Grid anaglyph(const Grid& left, const Grid& right) {
    check_pair(left, right, "anaglyph");
    check(left.channels == 1 || left.channels == 3, "anaglyph expects 1 or 3 channels");
    Grid out(3, left.height, left.width);
    for (int y = 0; y < left.height; ++y)
        for (int x = 0; x < left.width; ++x) {
            out.at(0, y, x) = luma(left, y, x);
            const double r = luma(right, y, x);
            out.at(1, y, x) = r;
            out.at(2, y, x) = r;
        }
    return out;
}

Grid compose_output(const Grid& left, const Grid& right, Layout layout) {
    return layout == Layout::side_by_side ? side_by_side(left, right) : anaglyph(left, right);
}

} // namespace stereodiff
