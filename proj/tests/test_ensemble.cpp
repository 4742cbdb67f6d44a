#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>

#include "oracles.hpp"
#include "panens/ensemble.hpp"
#include "panens/synth.hpp"

using namespace panens;

namespace {

TrackSet box_set(Dims d, int t_len, std::vector<std::array<int, 4>> boxes, float inside,
                 float outside, int n_classes) {
    TrackSet ts;
    ts.video_id = "boxes";
    ts.dims = d;
    ts.length = t_len;
    uint32_t id = 0;
    for (const auto& [r0, r1, c0, c1] : boxes) {
        QueryTrack tr;
        tr.track_id = id++;
        for (int t = 0; t < t_len; ++t) {
            LogitGrid g = LogitGrid::constant(d, outside);
            for (int r = r0; r < r1; ++r)
                for (int c = c0; c < c1; ++c)
                    g.values[static_cast<std::size_t>(r) * d.width + c] = inside;
            tr.mask_logits.push_back(std::move(g));
        }
        tr.class_logits.assign(n_classes + 1, 0.0f);
        tr.class_logits[id % n_classes] = 8.0f;
        ts.tracks.push_back(std::move(tr));
    }
    return ts;
}

bool same_grids(const TrackSet& a, const TrackSet& b) {
    if (a.tracks.size() != b.tracks.size()) return false;
    for (std::size_t i = 0; i < a.tracks.size(); ++i) {
        if (a.tracks[i].class_logits != b.tracks[i].class_logits) return false;
        for (int t = 0; t < a.length; ++t)
            if (a.tracks[i].mask_logits[t].values != b.tracks[i].mask_logits[t].values)
                return false;
    }
    return true;
}

}  // namespace

TEST_CASE("align identity is a no-op") {
    const TrackSet ts = oracle::random_track_set(1, {10, 12}, 2, 3, 3);
    const TrackSet aligned = align_member(ts, {AugKind::identity, ts.dims}, ts.dims);
    CHECK(same_grids(ts, aligned));
}

TEST_CASE("align hflip twice restores the member bit-exactly") {
    const TrackSet ts = oracle::random_track_set(2, {9, 13}, 3, 3, 3);
    const AugmentationSpec spec{AugKind::hflip, ts.dims};
    const TrackSet once = align_member(ts, spec, ts.dims);
    const TrackSet twice = align_member(once, spec, ts.dims);
    CHECK(same_grids(ts, twice));
}

TEST_CASE("align rescale brings every frame to reference dims") {
    const Dims native{20, 28};
    const Dims reference{18, 25};
    const TrackSet ts = oracle::random_track_set(3, native, 2, 3, 3);
    const TrackSet aligned = align_member(ts, {AugKind::rescale, native}, reference);
    CHECK(aligned.dims == reference);
    for (const QueryTrack& tr : aligned.tracks)
        for (const LogitGrid& g : tr.mask_logits) CHECK(g.dims == reference);
}

TEST_CASE("align validates member dims against the spec") {
    const TrackSet ts = oracle::random_track_set(4, {10, 10}, 1, 2, 3);
    CHECK_THROWS_AS(align_member(ts, {AugKind::hflip, {11, 10}}, {10, 10}), DimsMismatch);
    CHECK_THROWS_AS(align_member(ts, {AugKind::hflip, {10, 10}}, {12, 12}), DimsMismatch);
}

TEST_CASE("self-merge keeps count and grids (mean of identical values)") {
    for (uint64_t seed : {10, 11, 12}) {
        const TrackSet p = oracle::random_track_set(seed, {14, 17}, 3, 4, 3);
        MergeStats stats;
        const TrackSet merged = query_wise_merge(p, p, {}, &stats);
        CHECK(merged.tracks.size() == p.tracks.size());
        CHECK(stats.merged == static_cast<int>(p.tracks.size()));
        CHECK(stats.appended == 0);
        CHECK(same_grids(p, merged));
    }
}

TEST_CASE("matched pair averages logits elementwise: mean of 2 and 4 is 3") {
    const Dims d{4, 4};
    const TrackSet orig = box_set(d, 1, {{0, 4, 0, 4}}, 2.0f, 2.0f, 2);  // constant 2
    const TrackSet supp = box_set(d, 1, {{0, 4, 0, 4}}, 4.0f, 4.0f, 2);  // constant 4
    const TrackSet merged = query_wise_merge(orig, supp, {});
    REQUIRE(merged.tracks.size() == 1);
    for (float v : merged.tracks[0].mask_logits[0].values) CHECK(v == 3.0f);
}

TEST_CASE("mean of 2.0 and 0.0 is exactly 1.0 on a merged pixel") {
    // Shared-support boxes trigger the merge; one supplementary pixel inside
    // the box carries logit 0, so that pixel's mean is (2 + 0) / 2.
    const Dims d{4, 4};
    const TrackSet orig = box_set(d, 1, {{0, 4, 0, 4}}, 2.0f, -6.0f, 2);
    TrackSet supp = orig;
    supp.tracks[0].mask_logits[0].values[5] = 0.0f;
    const TrackSet merged = query_wise_merge(orig, supp, {});
    REQUIRE(merged.tracks.size() == 1);
    CHECK(merged.tracks[0].mask_logits[0].values[5] == 1.0f);
    CHECK(merged.tracks[0].mask_logits[0].values[6] == 2.0f);
}

TEST_CASE("disjoint supplementary is appended verbatim under a fresh id") {
    const Dims d{8, 8};
    const TrackSet orig = box_set(d, 2, {{0, 4, 0, 4}}, 6.0f, -6.0f, 2);
    const TrackSet supp = box_set(d, 2, {{4, 8, 4, 8}}, 6.0f, -6.0f, 2);
    MergeStats stats;
    const TrackSet merged = query_wise_merge(orig, supp, {}, &stats);
    REQUIRE(merged.tracks.size() == 2);
    CHECK(stats.appended == 1);
    CHECK(merged.tracks[1].mask_logits[0].values == supp.tracks[0].mask_logits[0].values);
    CHECK(merged.tracks[1].track_id != merged.tracks[0].track_id);
    CHECK(merged.tracks[1].source_tag == supp.tracks[0].source_tag);
}

TEST_CASE("iou_threshold 1.0 appends everything (strictly bigger-than)") {
    const TrackSet p = oracle::random_track_set(20, {12, 12}, 2, 3, 3);
    EnsembleConfig cfg;
    cfg.iou_threshold = 1.0;
    MergeStats stats;
    const TrackSet merged = query_wise_merge(p, p, cfg, &stats);
    CHECK(stats.merged == 0);
    CHECK(stats.appended == static_cast<int>(p.tracks.size()));
    CHECK(merged.tracks.size() == 2 * p.tracks.size());
}

TEST_CASE("append branch grows coverage by the appended tube") {
    const Dims d{8, 8};
    const TrackSet orig = box_set(d, 1, {{0, 4, 0, 4}}, 6.0f, -6.0f, 2);
    const TrackSet supp = box_set(d, 1, {{5, 8, 5, 8}}, 6.0f, -6.0f, 2);
    const TrackSet merged = query_wise_merge(orig, supp, {});

    auto coverage = [](const TrackSet& ts) {
        std::set<std::size_t> covered;
        for (const QueryTrack& tr : ts.tracks) {
            const auto bits = rle_decode(threshold(tr.mask_logits[0]));
            for (std::size_t p = 0; p < bits.size(); ++p)
                if (bits[p]) covered.insert(p);
        }
        return covered;
    };
    const auto before = coverage(orig);
    const auto after = coverage(merged);
    const auto appended = coverage(supp);
    CHECK(after.size() == before.size() + appended.size());
    for (std::size_t p : before) CHECK(after.count(p) == 1);
    for (std::size_t p : appended) CHECK(after.count(p) == 1);
}

TEST_CASE("sequential absorption: second twin compares against updated masks") {
    // Original box [0,4); two supplementaries: one shifted by 1, one by 2.
    // After absorbing the first, the merged support shifts, which changes the
    // IoU the second sees. The test pins the multi-match accumulate-once mean.
    const Dims d{6, 12};
    TrackSet orig = box_set(d, 1, {{0, 6, 0, 6}}, 4.0f, -4.0f, 2);
    TrackSet supp = box_set(d, 1, {{0, 6, 1, 7}, {0, 6, 2, 8}}, 4.0f, -4.0f, 2);
    const TrackSet merged = query_wise_merge(orig, supp, {});
    REQUIRE(merged.tracks.size() == 1);
    // All three boxes overlap the original enough; final grid must be the
    // three-way mean: columns covered by k of 3 boxes get (4k - 4(3-k))/3.
    const auto& vals = merged.tracks[0].mask_logits[0].values;
    auto expect = [&](int covers) {
        return static_cast<float>((4.0 * covers - 4.0 * (3 - covers)) / 3.0);
    };
    CHECK(vals[0 * 12 + 0] == expect(1));   // only original
    CHECK(vals[0 * 12 + 1] == expect(2));   // original + first
    CHECK(vals[0 * 12 + 2] == expect(3));   // all three
    CHECK(vals[0 * 12 + 6] == expect(2));   // first + second
    CHECK(vals[0 * 12 + 7] == expect(1));   // only second
    CHECK(vals[0 * 12 + 8] == expect(0));   // none
}

TEST_CASE("ensemble_pipeline with no members returns the reference unchanged") {
    const TrackSet p = oracle::random_track_set(30, {10, 10}, 2, 3, 3);
    const TrackSet out = ensemble_pipeline(p, {}, {});
    CHECK(same_grids(p, out));
}

TEST_CASE("ensemble_pipeline single identity member equal to reference") {
    const TrackSet p = oracle::random_track_set(31, {10, 10}, 2, 3, 3);
    std::vector<MergeStats> stats;
    const TrackSet out =
        ensemble_pipeline(p, {{p, {AugKind::identity, p.dims}}}, {}, &stats);
    CHECK(same_grids(p, out));
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].merged == static_cast<int>(p.tracks.size()));
}

TEST_CASE("member order changes the fold but both orders are valid merges") {
    const TrackSet ref = oracle::random_track_set(32, {12, 12}, 2, 3, 3);
    const TrackSet m1 = oracle::random_track_set(33, {12, 12}, 2, 2, 3);
    const TrackSet m2 = oracle::random_track_set(34, {12, 12}, 2, 2, 3);
    const AugmentationSpec id{AugKind::identity, ref.dims};
    const TrackSet ab = ensemble_pipeline(ref, {{m1, id}, {m2, id}}, {});
    const TrackSet ba = ensemble_pipeline(ref, {{m2, id}, {m1, id}}, {});
    // Determinism per order:
    CHECK(same_grids(ab, ensemble_pipeline(ref, {{m1, id}, {m2, id}}, {})));
    CHECK(same_grids(ba, ensemble_pipeline(ref, {{m2, id}, {m1, id}}, {})));
    // Both outputs carry at least every original track.
    CHECK(ab.tracks.size() >= ref.tracks.size());
    CHECK(ba.tracks.size() >= ref.tracks.size());
}

TEST_CASE("append soundness: output count is |original| + unmatched supplementaries") {
    Rng rng(500);
    for (int i = 0; i < 20; ++i) {
        const Dims d{rng.next_int(8, 20), rng.next_int(8, 20)};
        const int t_len = rng.next_int(1, 3);
        const TrackSet orig = oracle::random_track_set(rng.next_u64(), d, t_len,
                                                       rng.next_int(1, 5), 3);
        const TrackSet supp = oracle::random_track_set(rng.next_u64(), d, t_len,
                                                       rng.next_int(1, 5), 3);
        MergeStats stats;
        const TrackSet merged = query_wise_merge(orig, supp, {}, &stats);
        CHECK(stats.merged + stats.appended == static_cast<int>(supp.tracks.size()));
        CHECK(merged.tracks.size() == orig.tracks.size() + stats.appended);
        // Appended tracks sit at the end, verbatim.
        for (int a = 0; a < stats.appended; ++a) {
            const QueryTrack& tr = merged.tracks[orig.tracks.size() + a];
            bool verbatim = false;
            for (const QueryTrack& s : supp.tracks) {
                bool same = s.class_logits == tr.class_logits;
                for (int t = 0; same && t < t_len; ++t)
                    same = s.mask_logits[t].values == tr.mask_logits[t].values;
                verbatim |= same;
            }
            CHECK(verbatim);
        }
    }
}

TEST_CASE("length and dims mismatches are rejected") {
    const TrackSet a = oracle::random_track_set(40, {8, 8}, 2, 2, 3);
    const TrackSet b = oracle::random_track_set(41, {8, 8}, 3, 2, 3);
    CHECK_THROWS_AS(query_wise_merge(a, b, {}), LengthMismatch);
    const TrackSet c = oracle::random_track_set(42, {8, 9}, 2, 2, 3);
    CHECK_THROWS_AS(query_wise_merge(a, c, {}), DimsMismatch);
}

TEST_CASE("per-frame matching merges frame-wise without cross-frame identity") {
    const Dims d{6, 6};
    // Original: box steady at [0,3). Supplementary: frame 0 matches the
    // original, frame 1 is somewhere else entirely.
    TrackSet orig = box_set(d, 2, {{0, 3, 0, 3}}, 4.0f, -4.0f, 2);
    TrackSet supp = orig;
    supp.tracks[0].mask_logits[1] = LogitGrid::constant(d, -4.0f);
    for (int r = 3; r < 6; ++r)
        for (int c = 3; c < 6; ++c)
            supp.tracks[0].mask_logits[1].values[static_cast<std::size_t>(r) * d.width + c] =
                4.0f;

    EnsembleConfig cfg;
    cfg.matching_level = MatchingLevel::per_frame;
    MergeStats stats;
    const TrackSet merged = query_wise_merge(orig, supp, cfg, &stats);
    // Frame 0 merged into the original; frame 1 appended as a residual.
    REQUIRE(merged.tracks.size() == 2);
    CHECK(stats.appended == 1);
    // Original frame 0 is the mean of two identical grids.
    CHECK(merged.tracks[0].mask_logits[0].values == orig.tracks[0].mask_logits[0].values);
    // Residual has no support in frame 0, full support of the new box in frame 1.
    CHECK(threshold(merged.tracks[1].mask_logits[0]).empty());
    CHECK(threshold(merged.tracks[1].mask_logits[1]).area() == 9);
}
