#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/stereo_ops.hpp"

using namespace stereodiff;

namespace {

// gather-style oracle: for every target, enumerate all sources landing on it
// and keep the largest disparity (smallest column on ties)
struct OracleRow {
    std::vector<double> warped;
    std::vector<uint8_t> moved, hole;
    std::vector<std::vector<double>> competitors;  // disparities of all arrivals per target
};

OracleRow oracle_shift_row(const std::vector<double>& row, const std::vector<double>& D,
                           const std::vector<uint8_t>& valid, double s, int sign, double sentinel) {
    int w = (int)row.size();
    OracleRow r;
    r.warped.assign(w, sentinel);
    r.moved.assign(w, 0);
    r.hole.assign(w, 0);
    r.competitors.assign(w, {});
    for (int t = 0; t < w; ++t) {
        int best_u = -1;
        double best_d = -std::numeric_limits<double>::infinity();
        int best_delta = 0;
        for (int u = 0; u < w; ++u) {
            double d = valid[u] ? D[u] : 0.0;
            int delta = valid[u] ? sign * (int)std::lround(s * d) : 0;
            if (u + delta != t) continue;
            r.competitors[t].push_back(d);
            if (d > best_d) {
                best_d = d;
                best_u = u;
                best_delta = delta;
            }
        }
        if (best_u < 0) {
            r.hole[t] = 1;
        } else {
            r.warped[t] = row[best_u];
            r.moved[t] = best_delta != 0;
        }
    }
    return r;
}

DisparityField field_from(const std::vector<double>& vals, int h, int w) {
    DisparityField D(h, w, DisparitySpace::latent);
    D.values = vals;
    return D;
}

}  // namespace

TEST_CASE("shift identity when D=0 or s=0") {
    Rng rng(1);
    Grid x = rng.normal_grid(2, 3, 5);
    DisparityField zero(3, 5, DisparitySpace::latent);

    ShiftResult a = stereo_pixel_shift(x, zero, {1.5, +1, 0.0});
    CHECK(max_abs_diff(a.warped, x) == 0.0);
    CHECK(a.moved_mask.count() == 0);
    CHECK(a.hole_mask.count() == 0);

    DisparityField ramp(3, 5, DisparitySpace::latent);
    for (int y = 0; y < 3; ++y)
        for (int xx = 0; xx < 5; ++xx) ramp.at(y, xx) = xx / 4.0;
    ShiftResult b = stereo_pixel_shift(x, ramp, {0.0, +1, 0.0});
    CHECK(max_abs_diff(b.warped, x) == 0.0);
    CHECK(b.moved_mask.count() == 0);
    CHECK(b.hole_mask.count() == 0);
}

TEST_CASE("shift moves the tail of a row and drops out-of-bounds targets") {
    Grid x(1, 1, 4);
    x.v = {10, 20, 30, 40};  // a b c d
    DisparityField D = field_from({0, 0, 1, 1}, 1, 4);
    ShiftResult r = stereo_pixel_shift(x, D, {1.0, +1, -1.0});
    CHECK(r.warped.v == std::vector<double>{10, 20, -1.0, 30});
    CHECK(r.moved_mask.at(0, 3));
    CHECK(r.moved_mask.count() == 1);
    CHECK(r.hole_mask.at(0, 2));
    CHECK(r.hole_mask.count() == 1);
    CHECK(r.displacement == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("collision keeps the larger disparity") {
    // source 1 displaces two columns onto source 3's resting place
    Grid x(1, 1, 4);
    x.v = {10, 20, 30, 40};
    DisparityField D = field_from({0, 1, 0, 0}, 1, 4);
    ShiftResult r = stereo_pixel_shift(x, D, {2.0, +1, -1.0});
    CHECK(r.warped.v == std::vector<double>{10, -1.0, 30, 20});
    CHECK(r.moved_mask.at(0, 3));
    CHECK(r.hole_mask.at(0, 1));
    CHECK(r.moved_mask.count() == 1);
    CHECK(r.hole_mask.count() == 1);
}

TEST_CASE("shift input validation") {
    Grid x(1, 1, 4);
    DisparityField bad = field_from({0, 2.0, 0, 0}, 1, 4);
    CHECK_THROWS_AS(stereo_pixel_shift(x, bad, {1.0, +1, 0.0}), error);
    DisparityField wrong(2, 4, DisparitySpace::latent);
    CHECK_THROWS_AS(stereo_pixel_shift(x, wrong, {1.0, +1, 0.0}), error);
    DisparityField ok(1, 4, DisparitySpace::latent);
    CHECK_THROWS_AS(stereo_pixel_shift(x, ok, {-1.0, +1, 0.0}), error);
    CHECK_THROWS_AS(stereo_pixel_shift(x, ok, {1.0, +2, 0.0}), error);
}

TEST_CASE("shift matches the brute-force oracle on random rows") {
    Rng rng(77);
    for (int rep = 0; rep < 200; ++rep) {
        int w = 3 + int(rng.uniform() * 14);
        Grid x(1, 1, w);
        for (auto& v : x.v) v = rng.normal();
        DisparityField D(1, w, DisparitySpace::latent);
        for (int u = 0; u < w; ++u) {
            D.at(0, u) = rng.uniform();
            if (rng.uniform() < 0.15) D.set_valid(0, u, false);
        }
        double s = rng.uniform() * double(w);  // deliberately large: collisions + out-of-bounds
        int sign = rng.uniform() < 0.5 ? +1 : -1;
        ShiftConfig cfg{s, sign, 0.0};
        ShiftResult r = stereo_pixel_shift(x, D, cfg);
        OracleRow o = oracle_shift_row(x.v, D.values, D.valid, s, sign, 0.0);
        CHECK(r.warped.v == o.warped);
        for (int t = 0; t < w; ++t) {
            CHECK(r.moved_mask.at(0, t) == (o.moved[t] != 0));
            CHECK(r.hole_mask.at(0, t) == (o.hole[t] != 0));
            CHECK_FALSE((r.moved_mask.at(0, t) && r.hole_mask.at(0, t)));
        }
    }
}

TEST_CASE("gather form holds verbatim on constant-disparity rows") {
    Rng rng(31);
    Grid x(2, 2, 9);
    for (auto& v : x.v) v = rng.normal();
    DisparityField D(2, 9, DisparitySpace::latent);
    for (auto& v : D.values) v = 0.5;
    ShiftConfig cfg{4.0, +1, 0.0};  // delta = 2 everywhere
    ShiftResult r = stereo_pixel_shift(x, D, cfg);
    for (int c = 0; c < 2; ++c)
        for (int y = 0; y < 2; ++y)
            for (int t = 0; t < 9; ++t) {
                if (r.hole_mask.at(y, t)) {
                    CHECK(t < 2);
                    continue;
                }
                CHECK(r.warped.at(c, y, t) == x.at(c, y, t - 2));
            }
}

TEST_CASE("content conservation and monotone occlusion") {
    Rng rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        int w = 12;
        Grid x(1, 1, w);
        for (auto& v : x.v) v = rng.normal();
        DisparityField D(1, w, DisparitySpace::latent);
        for (auto& v : D.values) v = rng.uniform();
        double s = 1.0 + rng.uniform() * 5.0;
        ShiftResult r = stereo_pixel_shift(x, D, {s, +1, 0.0});
        OracleRow o = oracle_shift_row(x.v, D.values, D.valid, s, +1, 0.0);
        for (int t = 0; t < w; ++t) {
            if (r.hole_mask.at(0, t)) continue;
            bool from_row = false;
            for (int u = 0; u < w; ++u)
                if (x.v[u] == r.warped.v[t]) from_row = true;
            CHECK(from_row);
            // surviving disparity dominates every displaced competitor
            double winner = *std::max_element(o.competitors[t].begin(), o.competitors[t].end());
            for (double comp : o.competitors[t]) CHECK(winner >= comp);
        }
    }
}

TEST_CASE("width warning fires when s*max(D) exceeds 10% of width") {
    Grid x(1, 1, 32);
    DisparityField D(1, 32, DisparitySpace::latent);
    for (auto& v : D.values) v = 1.0;
    CHECK_FALSE(stereo_pixel_shift(x, D, {3.0, +1, 0.0}).width_warning);
    CHECK(stereo_pixel_shift(x, D, {4.0, +1, 0.0}).width_warning);
}

TEST_CASE("spsmd_paste select semantics") {
    Rng rng(55);
    Grid right = rng.normal_grid(2, 3, 8);
    Grid left = rng.normal_grid(2, 3, 8);
    DisparityField D(3, 8, DisparitySpace::latent);
    for (auto& v : D.values) v = rng.uniform();
    ShiftConfig cfg{3.0, +1, 0.0};

    Mask none(3, 8, false);
    Grid same = spsmd_paste(right, left, D, cfg, none);
    CHECK(max_abs_diff(same, right) == 0.0);

    // random mask vs a scratch elementwise select
    Mask mask(3, 8, false);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 8; ++x) mask.set(y, x, rng.uniform() < 0.5);
    Grid pasted = spsmd_paste(right, left, D, cfg, mask);
    ShiftResult sh = stereo_pixel_shift(left, D, cfg);
    for (int c = 0; c < 2; ++c)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 8; ++x) {
                double want = mask.at(y, x) ? sh.warped.at(c, y, x) : right.at(c, y, x);
                CHECK(pasted.at(c, y, x) == want);
            }

    // idempotence
    Grid twice = spsmd_paste(pasted, left, D, cfg, mask);
    CHECK(max_abs_diff(twice, pasted) == 0.0);
}

TEST_CASE("spsmd_paste with an all-true mask is the pure translation away from the seam") {
    Rng rng(2);
    Grid right = rng.normal_grid(1, 2, 6);
    Grid left = rng.normal_grid(1, 2, 6);
    DisparityField D(2, 6, DisparitySpace::latent);
    for (auto& v : D.values) v = 0.5;
    ShiftConfig cfg{2.0, +1, -7.0};  // delta = 1
    Mask all(2, 6, true);
    Grid pasted = spsmd_paste(right, left, D, cfg, all);
    for (int y = 0; y < 2; ++y) {
        CHECK(pasted.at(0, y, 0) == -7.0);  // disoccluded seam takes the sentinel
        for (int x = 1; x < 6; ++x) CHECK(pasted.at(0, y, x) == left.at(0, y, x - 1));
    }
}

TEST_CASE("deblur_fill: identity, statistics, determinism") {
    Rng rng(10);
    Grid x = rng.normal_grid(1, 4, 4);
    Mask empty(4, 4, false);
    Grid same = deblur_fill(x, empty, 9);
    CHECK(max_abs_diff(same, x) == 0.0);

    Grid big(1, 100, 100, 3.0);
    Mask all(100, 100, true);
    Grid filled = deblur_fill(big, all, 123);
    double mean = 0.0;
    for (double v : filled.v) mean += v;
    mean /= double(filled.v.size());
    double var = 0.0;
    for (double v : filled.v) var += (v - mean) * (v - mean);
    var /= double(filled.v.size());
    CHECK(std::fabs(mean) < 0.05);
    CHECK(std::fabs(var - 1.0) < 0.05);

    Grid filled2 = deblur_fill(big, all, 123);
    CHECK(max_abs_diff(filled, filled2) == 0.0);
    Grid filled3 = deblur_fill(big, all, 124);
    CHECK(max_abs_diff(filled, filled3) > 0.0);

    Mask wrong(3, 3, true);
    CHECK_THROWS_AS(deblur_fill(big, wrong, 1), error);
}
