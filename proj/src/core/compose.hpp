#pragma once

#include "core/grid.hpp"

namespace stereodiff {

enum class Layout { side_by_side, anaglyph };

// left|right horizontal concatenation.
Grid side_by_side(const Grid& left, const Grid& right);

// Red/cyan encoding built from per-view luma: R = luma(left), G = B =
// luma(right), so an identical pair collapses to a grayscale image.
Grid anaglyph(const Grid& left, const Grid& right);

Grid compose_output(const Grid& left, const Grid& right, Layout layout);

} // namespace stereodiff
