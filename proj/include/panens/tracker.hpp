#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "panens/assignment.hpp"
#include "panens/mask.hpp"

namespace panens {

struct FrameQuery {
    LogitGrid mask_logits;
    std::vector<float> class_logits;  // length C+1, last slot = "no object"
};

struct FrameQuerySet {
    int frame_index = 0;
    std::vector<FrameQuery> queries;
};

/// One object hypothesis across the whole video.
struct QueryTrack {
    uint32_t track_id = 0;
    std::vector<LogitGrid> mask_logits;  // one grid per frame
    std::vector<float> class_logits;     // length C+1
    std::string source_tag = "original";

    MaskTube thresholded_tube() const;
};

struct TrackSet {
    std::string video_id;
    Dims dims;
    int length = 0;  // T
    std::vector<QueryTrack> tracks;
};

/// Cost for matching query i of the previous frame to query j of the current:
///   1 - iou(threshold(prev_i), threshold(curr_j))
///   + lambda * (1 - cosine(softmax(prev class logits), softmax(curr class logits)))
/// solved to optimality with hungarian_solve.
Assignment match_adjacent(const FrameQuerySet& prev, const FrameQuerySet& curr,
                          double lambda = 0.5);

/// Chains adjacent-frame assignments into video-level tracks. Requires the
/// same query count N in every frame; track k starts at query k of frame 0.
/// Track class logits are the arithmetic mean of the per-frame vectors.
TrackSet build_tracks(const std::vector<FrameQuerySet>& frames,
                      const std::string& video_id = "");

/// Inverse of build_tracks up to query order: slices a track set into
/// per-frame query sets, optionally with a deterministic per-frame shuffle
/// (what a set-prediction segmenter would emit).
std::vector<FrameQuerySet> slice_tracks(const TrackSet& tracks, bool shuffle = false,
                                        uint64_t seed = 0);

}  // namespace panens
