#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "panens/fusion.hpp"
#include "panens/mask.hpp"

namespace panens {

struct GtSegment {
    uint32_t id = 0;
    int category = 0;
    bool is_thing = false;
    std::vector<BinaryMask> frames;  // one mask per frame
};

/// Segment-level video annotation. Pixels covered by no segment are treated
/// like VOID pixels during evaluation (excluded from every denominator).
struct GroundTruthVideo {
    std::string video_id;
    Dims dims;
    int length = 0;
    CategoryTable categories;
    std::vector<GtSegment> segments;
    std::vector<BinaryMask> void_masks;  // may be empty => no explicit void

    void validate() const;  // throws SpecInvalid on overlap or shape errors
};

struct SegmentMatch {
    int pred_index = 0;  // index into PanopticVideo::segments
    int gt_index = 0;    // index into GroundTruthVideo::segments
    double iou = 0.0;
};

struct MatchResult {
    std::vector<SegmentMatch> matches;
    std::vector<int> unmatched_pred;
    std::vector<int> unmatched_gt;
};

struct CategoryPq {
    int category = 0;
    double iou_sum = 0.0;
    int64_t tp = 0, fp = 0, fn = 0;
    double pq = 0.0;
};

struct VpqReport {
    std::map<int, double> vpq_by_k;
    double vpq = 0.0;  // unweighted mean of the per-k values
    std::vector<CategoryPq> per_category;
};

struct StqReport {
    double aq = 0.0;
    double sq = 0.0;
    double stq = 0.0;  // sqrt(aq * sq)
};

/// Category-consistent segment matching over the frame window
/// [frame_begin, frame_end). A pair matches iff tube IoU > 0.5, which makes
/// the matching unique. Segments with no pixels inside the window do not
/// participate. GT VOID pixels are excluded from all areas.
MatchResult match_segments(const PanopticVideo& pred, const GroundTruthVideo& gt,
                           int frame_begin, int frame_end);

/// Panoptic quality over sliding windows of k frames (stride 1; videos
/// shorter than k use the whole video as one window): per window, PQ is
/// averaged over the categories present in that window, then vpq_k averages
/// over windows.
double vpq_k(const PanopticVideo& pred, const GroundTruthVideo& gt, int k);

VpqReport vpq_mean(const PanopticVideo& pred, const GroundTruthVideo& gt,
                   const std::vector<int>& windows = {1, 2, 4, 6});

/// STQ = sqrt(AQ * SQ). SQ is the mean category-level tube IoU; AQ averages
/// id-level association quality over GT thing tubes, class-agnostically.
StqReport stq(const PanopticVideo& pred, const GroundTruthVideo& gt);

}  // namespace panens
