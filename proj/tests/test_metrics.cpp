#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <tuple>

#include "oracles.hpp"
#include "panens/metrics.hpp"
#include "panens/synth.hpp"

using namespace panens;

namespace {

CategoryTable table(int things, int stuff) {
    CategoryTable t;
    for (int i = 0; i < things; ++i) t.entries.push_back({i, true});
    for (int i = 0; i < stuff; ++i) t.entries.push_back({things + i, false});
    return t;
}

BinaryMask box_mask(Dims d, int r0, int r1, int c0, int c1) {
    std::vector<uint8_t> bits(d.count(), 0);
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) bits[static_cast<std::size_t>(r) * d.width + c] = 1;
    return rle_encode(d, bits);
}

// Panoptic video with one segment per entry, each a box over all frames.
PanopticVideo pan_video(Dims d, int t_len,
                        const std::vector<std::tuple<int, bool, std::array<int, 4>>>& segs) {
    PanopticVideo v;
    v.video_id = "pan";
    v.dims = d;
    v.frames.resize(t_len);
    uint16_t next_instance = 1;
    uint32_t next_id = 1;
    for (auto& [cat, thing, box] : segs) {
        SegmentInfo s{next_id++, cat, thing, thing ? next_instance++ : uint16_t{0}};
        v.segments.push_back(s);
    }
    for (PanopticFrame& f : v.frames) {
        f.dims = d;
        f.semantic.assign(d.count(), kVoidSemantic);
        f.instance.assign(d.count(), 0);
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const auto& [cat, thing, box] = segs[i];
            for (int r = box[0]; r < box[1]; ++r)
                for (int c = box[2]; c < box[3]; ++c) {
                    const std::size_t p = static_cast<std::size_t>(r) * d.width + c;
                    f.semantic[p] = static_cast<uint16_t>(cat);
                    f.instance[p] = v.segments[i].instance;
                }
        }
    }
    return v;
}

GroundTruthVideo gt_video(Dims d, int t_len,
                          const std::vector<std::tuple<int, bool, std::array<int, 4>>>& segs,
                          const CategoryTable& cats) {
    GroundTruthVideo gt;
    gt.video_id = "gt";
    gt.dims = d;
    gt.length = t_len;
    gt.categories = cats;
    uint32_t next_id = 1;
    for (auto& [cat, thing, box] : segs) {
        GtSegment s;
        s.id = next_id++;
        s.category = cat;
        s.is_thing = thing;
        for (int t = 0; t < t_len; ++t)
            s.frames.push_back(box_mask(d, box[0], box[1], box[2], box[3]));
        gt.segments.push_back(std::move(s));
    }
    return gt;
}

void random_instance(Rng& rng, PanopticVideo& pred, GroundTruthVideo& gt) {
    oracle::random_tiny_instance(rng, pred, gt);
}

}  // namespace

TEST_CASE("identical pred and gt match every segment at IoU 1") {
    const Dims d{8, 8};
    const CategoryTable cats = table(2, 1);
    const std::vector<std::tuple<int, bool, std::array<int, 4>>> layout = {
        {0, true, {0, 4, 0, 4}}, {1, true, {4, 8, 0, 4}}, {2, false, {0, 8, 4, 8}}};
    const PanopticVideo pred = pan_video(d, 3, layout);
    const GroundTruthVideo gt = gt_video(d, 3, layout, cats);

    const MatchResult m = match_segments(pred, gt, 0, 3);
    CHECK(m.matches.size() == 3);
    CHECK(m.unmatched_pred.empty());
    CHECK(m.unmatched_gt.empty());
    for (const SegmentMatch& sm : m.matches) CHECK(sm.iou == 1.0);
}

TEST_CASE("category mismatch with perfect overlap yields FP + FN") {
    const Dims d{6, 6};
    const CategoryTable cats = table(2, 0);
    const PanopticVideo pred = pan_video(d, 1, {{0, true, {0, 6, 0, 6}}});
    const GroundTruthVideo gt = gt_video(d, 1, {{1, true, {0, 6, 0, 6}}}, cats);
    const MatchResult m = match_segments(pred, gt, 0, 1);
    CHECK(m.matches.empty());
    CHECK(m.unmatched_pred.size() == 1);
    CHECK(m.unmatched_gt.size() == 1);

    // vpq_1: both categories present, each with PQ 0.
    CHECK(vpq_k(pred, gt, 1) == 0.0);
}

TEST_CASE("perfect prediction scores 1.0 for every window size") {
    const Dims d{8, 10};
    const CategoryTable cats = table(2, 1);
    const std::vector<std::tuple<int, bool, std::array<int, 4>>> layout = {
        {0, true, {0, 4, 0, 5}}, {2, false, {4, 8, 0, 10}}};
    const PanopticVideo pred = pan_video(d, 6, layout);
    const GroundTruthVideo gt = gt_video(d, 6, layout, cats);
    const VpqReport rep = vpq_mean(pred, gt);
    for (const auto& [k, v] : rep.vpq_by_k) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.vpq == doctest::Approx(1.0).epsilon(1e-12));
    const StqReport s = stq(pred, gt);
    CHECK(s.aq == doctest::Approx(1.0));
    CHECK(s.sq == doctest::Approx(1.0));
    CHECK(s.stq == doctest::Approx(1.0));
}

TEST_CASE("60 percent overlap single segment gives vpq_1 = 0.6; 40 percent gives 0") {
    const Dims d{10, 10};
    const CategoryTable cats = table(1, 0);
    // GT: rows [0,10) x cols [0,5): area 50.
    const GroundTruthVideo gt = gt_video(d, 1, {{0, true, {0, 10, 0, 5}}}, cats);

    // Pred covering 60% of GT and nothing else: IoU = 30/50 = 0.6.
    const PanopticVideo p60 = pan_video(d, 1, {{0, true, {0, 6, 0, 5}}});
    CHECK(vpq_k(p60, gt, 1) == doctest::Approx(0.6));

    // IoU 0.4: no match, PQ = 0 / (0 + 0.5 + 0.5).
    const PanopticVideo p40 = pan_video(d, 1, {{0, true, {0, 4, 0, 5}}});
    CHECK(vpq_k(p40, gt, 1) == doctest::Approx(0.0));
}

TEST_CASE("gt void pixels are excluded from IoU denominators") {
    const Dims d{4, 8};
    const CategoryTable cats = table(1, 0);
    GroundTruthVideo gt = gt_video(d, 1, {{0, true, {0, 4, 0, 4}}}, cats);
    // Right half is void; prediction spills into it without penalty.
    gt.void_masks.push_back(box_mask(d, 0, 4, 4, 8));
    const PanopticVideo pred = pan_video(d, 1, {{0, true, {0, 4, 0, 8}}});
    const MatchResult m = match_segments(pred, gt, 0, 1);
    REQUIRE(m.matches.size() == 1);
    CHECK(m.matches[0].iou == 1.0);
    CHECK(vpq_k(pred, gt, 1) == doctest::Approx(1.0));
}

TEST_CASE("windows shorter than the video slide with stride 1") {
    const Dims d{4, 4};
    const CategoryTable cats = table(1, 0);
    // One static gt segment over 4 frames; pred matches in all frames.
    const GroundTruthVideo gt = gt_video(d, 4, {{0, true, {0, 4, 0, 4}}}, cats);
    const PanopticVideo pred = pan_video(d, 4, {{0, true, {0, 4, 0, 4}}});
    for (int k : {1, 2, 3, 4, 6}) CHECK(vpq_k(pred, gt, k) == doctest::Approx(1.0));
    CHECK_THROWS_AS(vpq_k(pred, gt, 0), InvalidWindow);
}

TEST_CASE("identity swap halves long-window quality but not vpq_1") {
    const Dims d{12, 24};
    const CategoryTable cats = table(1, 0);
    const int t_len = 8;
    // Two same-category squares; instance ids swap from frame 4 onward.
    GroundTruthVideo gt = gt_video(
        d, t_len, {{0, true, {2, 8, 2, 8}}, {0, true, {2, 8, 14, 20}}}, cats);
    PanopticVideo pred = pan_video(d, t_len, {{0, true, {2, 8, 2, 8}}, {0, true, {2, 8, 14, 20}}});
    for (int t = 4; t < t_len; ++t)
        for (std::size_t p = 0; p < d.count(); ++p) {
            uint16_t& inst = pred.frames[t].instance[p];
            if (inst == 1) inst = 2;
            else if (inst == 2) inst = 1;
        }

    const double v1 = vpq_k(pred, gt, 1);
    const double v2 = vpq_k(pred, gt, 2);
    const double v4 = vpq_k(pred, gt, 4);
    const double v6 = vpq_k(pred, gt, 6);
    CHECK(v1 == doctest::Approx(1.0));
    CHECK(v1 > v2);
    CHECK(v2 >= v4);
    CHECK(v4 >= v6);
    CHECK(v6 < 1.0);
}

TEST_CASE("report mean is exactly the mean of its components") {
    SceneSpec spec;
    spec.seed = 5;
    spec.dims = {24, 32};
    spec.frames = 6;
    const Scene scene = generate(spec);
    const PanopticVideo pred = fuse(scene.ideal, scene.categories, {});
    const VpqReport rep = vpq_mean(pred, scene.gt);
    double mean = 0.0;
    for (const auto& [k, v] : rep.vpq_by_k) mean += v;
    mean /= static_cast<double>(rep.vpq_by_k.size());
    CHECK(rep.vpq == mean);
}

TEST_CASE("matching equals brute force on random tiny instances") {
    Rng rng(777);
    for (int i = 0; i < 200; ++i) {
        PanopticVideo pred;
        GroundTruthVideo gt;
        random_instance(rng, pred, gt);
        const MatchResult m = match_segments(pred, gt, 0, gt.length);
        std::set<std::pair<int, int>> got;
        for (const SegmentMatch& sm : m.matches) {
            CHECK(got.insert({sm.pred_index, sm.gt_index}).second);  // uniqueness
        }
        CHECK(got == oracle::brute_force_matches(pred, gt, 0, gt.length));
    }
}

TEST_CASE("consistent instance-id shuffles leave all metrics unchanged") {
    SceneSpec spec;
    spec.seed = 9;
    spec.dims = {24, 32};
    spec.frames = 5;
    spec.n_things = 3;
    const Scene scene = generate(spec);
    PanopticVideo pred = fuse(scene.ideal, scene.categories, {});

    PanopticVideo renamed = pred;
    for (SegmentInfo& s : renamed.segments)
        if (s.is_thing) s.instance = static_cast<uint16_t>(s.instance + 7);
    for (PanopticFrame& f : renamed.frames)
        for (uint16_t& inst : f.instance)
            if (inst > 0) inst = static_cast<uint16_t>(inst + 7);

    const VpqReport a = vpq_mean(pred, scene.gt);
    const VpqReport b = vpq_mean(renamed, scene.gt);
    for (const auto& [k, v] : a.vpq_by_k) CHECK(b.vpq_by_k.at(k) == v);
    const StqReport sa = stq(pred, scene.gt);
    const StqReport sb = stq(renamed, scene.gt);
    CHECK(sa.aq == sb.aq);
    CHECK(sa.sq == sb.sq);
}

TEST_CASE("vpq_1 equals the mean of single-frame PQ") {
    Rng rng(888);
    PanopticVideo pred;
    GroundTruthVideo gt;
    random_instance(rng, pred, gt);
    double manual = 0.0;
    int counted = 0;
    for (int t = 0; t < gt.length; ++t) {
        // Reuse vpq_k on a single-frame slice.
        PanopticVideo p1;
        p1.video_id = pred.video_id;
        p1.dims = pred.dims;
        p1.segments = pred.segments;
        p1.frames = {pred.frames[t]};
        GroundTruthVideo g1;
        g1.video_id = gt.video_id;
        g1.dims = gt.dims;
        g1.length = 1;
        g1.categories = gt.categories;
        for (const GtSegment& s : gt.segments) {
            GtSegment c = s;
            c.frames = {s.frames[t]};
            g1.segments.push_back(std::move(c));
        }
        manual += vpq_k(p1, g1, 1);
        ++counted;
    }
    CHECK(vpq_k(pred, gt, 1) == doctest::Approx(manual / counted).epsilon(1e-12));
}

TEST_CASE("stq agrees with the naive pixel-enumeration oracle") {
    SUBCASE("half-overlap single object") {
        const Dims d{4, 8};
        const CategoryTable cats = table(1, 1);
        // Fully labeled GT: one thing on the left half, stuff on the right.
        const GroundTruthVideo gt = gt_video(
            d, 2, {{0, true, {0, 4, 0, 4}}, {1, false, {0, 4, 4, 8}}}, cats);
        // Prediction: one thing box shifted right by half its width.
        const PanopticVideo pred = pan_video(d, 2, {{0, true, {0, 4, 2, 6}}});
        const StqReport got = stq(pred, gt);
        const StqReport want = oracle::naive_stq(pred, gt);
        CHECK(got.aq == doctest::Approx(want.aq).epsilon(1e-12));
        CHECK(got.sq == doctest::Approx(want.sq).epsilon(1e-12));
        CHECK(got.stq == doctest::Approx(want.stq).epsilon(1e-12));
        // Hand numbers per tube: |p| = 32, |g| = 32, TPA = 16.
        // SQ: thing IoU 16/48 = 1/3, stuff IoU 0 -> mean 1/6.
        // AQ: (16/32) * (16/48) = 1/6.
        CHECK(got.sq == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        CHECK(got.aq == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        CHECK(got.stq == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    }
    SUBCASE("random instances") {
        Rng rng(999);
        for (int i = 0; i < 100; ++i) {
            PanopticVideo pred;
            GroundTruthVideo gt;
            random_instance(rng, pred, gt);
            const StqReport got = stq(pred, gt);
            const StqReport want = oracle::naive_stq(pred, gt);
            CHECK(got.aq == doctest::Approx(want.aq).epsilon(1e-10));
            CHECK(got.sq == doctest::Approx(want.sq).epsilon(1e-10));
            CHECK((got.aq >= 0.0 && got.aq <= 1.0));
            CHECK((got.sq >= 0.0 && got.sq <= 1.0));
            CHECK((got.stq >= 0.0 && got.stq <= 1.0));
            const VpqReport rep = vpq_mean(pred, gt);
            for (const auto& [k, v] : rep.vpq_by_k) CHECK((v >= 0.0 && v <= 1.0));
            CHECK((rep.vpq >= 0.0 && rep.vpq <= 1.0));
        }
    }
}

TEST_CASE("all-void prediction scores zero") {
    const Dims d{6, 6};
    const CategoryTable cats = table(1, 0);
    const GroundTruthVideo gt = gt_video(d, 2, {{0, true, {0, 6, 0, 6}}}, cats);
    PanopticVideo pred;
    pred.dims = d;
    pred.frames.resize(2);
    for (PanopticFrame& f : pred.frames) {
        f.dims = d;
        f.semantic.assign(d.count(), kVoidSemantic);
        f.instance.assign(d.count(), 0);
    }
    const VpqReport rep = vpq_mean(pred, gt);
    for (const auto& [k, v] : rep.vpq_by_k) CHECK(v == 0.0);
    const StqReport s = stq(pred, gt);
    CHECK(s.aq == 0.0);
    CHECK(s.sq == 0.0);
    CHECK(s.stq == 0.0);
}

TEST_CASE("dims mismatches are rejected") {
    const CategoryTable cats = table(1, 0);
    const GroundTruthVideo gt = gt_video({4, 4}, 1, {{0, true, {0, 4, 0, 4}}}, cats);
    const PanopticVideo pred = pan_video({4, 5}, 1, {{0, true, {0, 4, 0, 4}}});
    CHECK_THROWS_AS(vpq_k(pred, gt, 1), DimsMismatch);
}
