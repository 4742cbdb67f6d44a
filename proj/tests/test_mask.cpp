#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "panens/detmath.hpp"
#include "panens/mask.hpp"
#include "panens/rng.hpp"

using namespace panens;

TEST_CASE("fixed-polynomial exp tracks std::exp to 1e-14 relative") {
    Rng rng(11);
    for (int i = 0; i < 5000; ++i) {
        const double x = rng.next_unit() * 60.0 - 30.0;
        const double got = detmath::exp(x);
        const double want = std::exp(x);
        CHECK(std::abs(got - want) <= 1e-14 * want);
    }
    CHECK(detmath::exp(0.0) == 1.0);
    CHECK(detmath::exp(-800.0) == 0.0);
    CHECK(detmath::sigmoid(0.0) == 0.5);
    // softmax sums to 1 and is order-preserving
    const float logits[4] = {1.0f, -2.0f, 0.5f, 3.0f};
    const auto p = detmath::softmax(logits, 4);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[3] > p[0]);
    CHECK(p[0] > p[2]);
    CHECK(p[2] > p[1]);
}

TEST_CASE("rle encode fixed examples") {
    const Dims d{2, 2};
    CHECK(rle_encode(d, std::vector<uint8_t>{0, 0, 0, 0}).runs == std::vector<uint32_t>{4});
    CHECK(rle_encode(d, std::vector<uint8_t>{1, 1, 1, 1}).runs == std::vector<uint32_t>{0, 4});
    // rows [1,0],[0,1] in row-major order
    CHECK(rle_encode(d, std::vector<uint8_t>{1, 0, 0, 1}).runs ==
          std::vector<uint32_t>{0, 1, 2, 1});
}

TEST_CASE("rle decode fixed examples and error") {
    const Dims d{2, 2};
    CHECK(rle_decode(BinaryMask{d, {4}}) == std::vector<uint8_t>{0, 0, 0, 0});
    CHECK(rle_decode(BinaryMask{d, {0, 4}}) == std::vector<uint8_t>{1, 1, 1, 1});
    CHECK_THROWS_AS(rle_decode(BinaryMask{d, {3}}), RunSumMismatch);
    CHECK_THROWS_AS(rle_decode(BinaryMask{d, {0, 5}}), RunSumMismatch);
}

TEST_CASE("rle round trip on 1000 random masks matches the naive encoder") {
    Rng rng(101);
    for (int i = 0; i < 1000; ++i) {
        const Dims d{rng.next_int(1, 12), rng.next_int(1, 12)};
        const auto bits = oracle::random_bits(rng, d.count(), rng.next_unit());
        const BinaryMask m = rle_encode(d, bits);
        CHECK(m.runs == oracle::naive_rle(bits));
        CHECK(rle_decode(m) == bits);
    }
}

TEST_CASE("threshold is strict at zero") {
    const Dims d{2, 3};
    CHECK(threshold(LogitGrid::constant(d, -1.0f)).area() == 0);
    CHECK(threshold(LogitGrid::constant(d, 3.0f)).area() == d.count());
    CHECK(threshold(LogitGrid::constant(d, 0.0f)).area() == 0);
}

TEST_CASE("iou_2d fixed examples") {
    const Dims d{4, 4};
    std::vector<uint8_t> a(16, 0), b(16, 0);
    for (int i = 0; i < 8; ++i) a[i] = 1;        // rows 0,1
    for (int i = 4; i < 12; ++i) b[i] = 1;       // rows 1,2
    const BinaryMask ma = rle_encode(d, a), mb = rle_encode(d, b);
    CHECK(iou_2d(ma, ma) == doctest::Approx(1.0));
    CHECK(iou_2d(ma, mb) == doctest::Approx(1.0 / 3.0));

    std::vector<uint8_t> c(16, 0);
    c[15] = 1;
    CHECK(iou_2d(ma, rle_encode(d, c)) == doctest::Approx(0.0));

    // both empty: defined as 0
    const BinaryMask e = rle_encode(d, std::vector<uint8_t>(16, 0));
    CHECK(iou_2d(e, e) == 0.0);

    CHECK_THROWS_AS(iou_2d(ma, rle_encode(Dims{2, 2}, std::vector<uint8_t>(4, 0))),
                    DimsMismatch);
}

TEST_CASE("iou_2d agrees with per-pixel counting on random masks") {
    Rng rng(202);
    for (int i = 0; i < 500; ++i) {
        const Dims d{rng.next_int(1, 10), rng.next_int(1, 10)};
        const auto a = oracle::random_bits(rng, d.count());
        const auto b = oracle::random_bits(rng, d.count());
        CHECK(iou_2d(rle_encode(d, a), rle_encode(d, b)) ==
              doctest::Approx(oracle::pixel_iou(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("iou_2d symmetry property") {
    Rng rng(303);
    for (int i = 0; i < 200; ++i) {
        const Dims d{rng.next_int(1, 8), rng.next_int(1, 8)};
        const BinaryMask a = rle_encode(d, oracle::random_bits(rng, d.count()));
        const BinaryMask b = rle_encode(d, oracle::random_bits(rng, d.count()));
        CHECK(iou_2d(a, b) == iou_2d(b, a));
        if (!a.empty()) CHECK(iou_2d(a, a) == 1.0);
    }
}

TEST_CASE("disjointness bound: two >0.5 matches of one mask must intersect") {
    Rng rng(404);
    int premise_hits = 0;
    for (int i = 0; i < 2000; ++i) {
        const Dims d{rng.next_int(2, 8), rng.next_int(2, 8)};
        const auto s = oracle::random_bits(rng, d.count());
        const auto a = oracle::random_bits(rng, d.count());
        const auto b = oracle::random_bits(rng, d.count());
        const BinaryMask ms = rle_encode(d, s), ma = rle_encode(d, a), mb = rle_encode(d, b);
        if (iou_2d(ms, ma) > 0.5 && iou_2d(ms, mb) > 0.5) {
            ++premise_hits;
            CHECK(intersection_union(ma, mb).first > 0);
        }
    }
    CHECK(premise_hits > 10);  // the premise must actually trigger
}

TEST_CASE("iou_tube sums over frames") {
    const Dims d{4, 4};
    std::vector<uint8_t> a(16, 0), b(16, 0);
    for (int i = 0; i < 8; ++i) a[i] = 1;
    for (int i = 4; i < 12; ++i) b[i] = 1;
    const BinaryMask empt = rle_encode(d, std::vector<uint8_t>(16, 0));

    MaskTube ta{d, {rle_encode(d, a), empt}};
    MaskTube tb{d, {rle_encode(d, b), empt}};
    CHECK(iou_tube(ta, ta) == 1.0);
    // empty second frames contribute 0/0
    CHECK(iou_tube(ta, tb) == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(iou_tube(ta, MaskTube{d, {empt}}), LengthMismatch);
    CHECK_THROWS_AS(iou_tube(ta, MaskTube{Dims{2, 2}, {rle_encode(Dims{2, 2}, std::vector<uint8_t>(4, 0)), empt}}),
                    DimsMismatch);
}

TEST_CASE("iou_tube equals brute-force pixel count on random tubes") {
    Rng rng(505);
    for (int i = 0; i < 200; ++i) {
        const Dims d{rng.next_int(1, 8), rng.next_int(1, 8)};
        const int t_len = rng.next_int(1, 5);
        std::vector<std::vector<uint8_t>> a, b;
        MaskTube ta{d, {}}, tb{d, {}};
        for (int t = 0; t < t_len; ++t) {
            a.push_back(oracle::random_bits(rng, d.count()));
            b.push_back(oracle::random_bits(rng, d.count()));
            ta.frames.push_back(rle_encode(d, a.back()));
            tb.frames.push_back(rle_encode(d, b.back()));
        }
        CHECK(iou_tube(ta, tb) ==
              doctest::Approx(oracle::pixel_tube_iou(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("iou_tube degenerates to iou_2d for single-frame tubes") {
    Rng rng(606);
    for (int i = 0; i < 100; ++i) {
        const Dims d{rng.next_int(1, 8), rng.next_int(1, 8)};
        const BinaryMask a = rle_encode(d, oracle::random_bits(rng, d.count()));
        const BinaryMask b = rle_encode(d, oracle::random_bits(rng, d.count()));
        CHECK(iou_tube(MaskTube{d, {a}}, MaskTube{d, {b}}) == iou_2d(a, b));
    }
}

TEST_CASE("hflip fixed examples and involution") {
    LogitGrid row{{1, 3}, {1.0f, 2.0f, 3.0f}};
    const LogitGrid flipped = hflip(row);
    CHECK(flipped.values == std::vector<float>{3.0f, 2.0f, 1.0f});

    LogitGrid narrow{{3, 1}, {1.0f, 2.0f, 3.0f}};
    CHECK(hflip(narrow).values == narrow.values);

    Rng rng(707);
    for (int i = 0; i < 100; ++i) {
        const Dims d{rng.next_int(1, 9), rng.next_int(1, 9)};
        const LogitGrid g = oracle::random_grid(rng, d);
        CHECK(hflip(hflip(g)).values == g.values);  // bit-identical
    }
}

TEST_CASE("threshold commutes with hflip") {
    Rng rng(808);
    for (int i = 0; i < 100; ++i) {
        const Dims d{rng.next_int(1, 9), rng.next_int(1, 9)};
        const LogitGrid g = oracle::random_grid(rng, d);
        CHECK(threshold(hflip(g)).runs == hflip_mask(threshold(g)).runs);
    }
}

TEST_CASE("resize_bilinear shape and constants") {
    const Dims d{5, 7};
    const LogitGrid g = LogitGrid::constant(d, 1.25f);
    CHECK(resize_bilinear(g, d).values == g.values);  // same dims: identity

    for (Dims target : {Dims{3, 4}, Dims{9, 13}, Dims{1, 1}}) {
        const LogitGrid r = resize_bilinear(g, target);
        CHECK(r.dims == target);
        for (float v : r.values) CHECK(v == 1.25f);  // constants preserved exactly
    }
}

TEST_CASE("resize_bilinear 2x2 -> 2x4 matches the scalar formula") {
    const LogitGrid g{{2, 2}, {0.0f, 1.0f, 0.0f, 1.0f}};
    const Dims target{2, 4};
    const LogitGrid r = resize_bilinear(g, target);
    for (int y = 0; y < target.height; ++y)
        for (int x = 0; x < target.width; ++x)
            CHECK(r.at(y, x) ==
                  doctest::Approx(oracle::bilinear_formula(g, target, y, x)).epsilon(1e-6));
}

TEST_CASE("resize_bilinear matches the scalar formula on random grids") {
    Rng rng(909);
    for (int i = 0; i < 50; ++i) {
        const Dims d{rng.next_int(1, 10), rng.next_int(1, 10)};
        const Dims target{rng.next_int(1, 14), rng.next_int(1, 14)};
        const LogitGrid g = oracle::random_grid(rng, d);
        const LogitGrid r = resize_bilinear(g, target);
        REQUIRE(r.dims == target);
        for (int y = 0; y < target.height; ++y)
            for (int x = 0; x < target.width; ++x)
                CHECK(r.at(y, x) ==
                      doctest::Approx(oracle::bilinear_formula(g, target, y, x)).epsilon(1e-5));
    }
}
