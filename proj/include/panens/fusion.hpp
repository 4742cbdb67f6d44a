#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "panens/tracker.hpp"

namespace panens {

struct CategoryEntry {
    int id = 0;
    bool is_thing = false;
};

/// Contiguous category ids starting at 0; every id is either thing or stuff.
struct CategoryTable {
    std::vector<CategoryEntry> entries;

    int count() const { return static_cast<int>(entries.size()); }
    bool is_thing(int category) const { return entries[category].is_thing; }
    void validate() const;
};

struct FusionConfig {
    double min_object_score = 0.3;
    double min_pixel_score = 0.25;
    double min_overlap_ratio = 0.8;

    void validate() const;
};

/// Semantic value for pixels no confident track claims.
constexpr uint16_t kVoidSemantic = 0xFFFF;

struct PanopticFrame {
    Dims dims;
    std::vector<uint16_t> semantic;  // category id or kVoidSemantic
    std::vector<uint16_t> instance;  // > 0 only for thing pixels
};

struct SegmentInfo {
    uint32_t id = 0;       // registry id, 1-based
    int category = 0;
    bool is_thing = false;
    uint16_t instance = 0;  // 0 for stuff
};

struct PanopticVideo {
    std::string video_id;
    Dims dims;
    std::vector<PanopticFrame> frames;
    std::vector<SegmentInfo> segments;

    /// Registry index for a (semantic, instance) pixel pair, or -1 for void.
    int segment_index(uint16_t semantic, uint16_t instance) const;
};

/// Decodes a track set into per-pixel panoptic labels:
///  - track category/score from softmax over C+1 class logits,
///  - per-pixel argmax of score * sigmoid(mask logit), void below the pixel
///    threshold,
///  - one-pass deletion of tracks that claim too little of their own
///    thresholded tube, with their pixels re-assigned among the survivors,
///  - thing tracks get 1-based instance ids in track order; stuff tracks of
///    one category collapse into a single segment.
PanopticVideo fuse(const TrackSet& tracks, const CategoryTable& cats, const FusionConfig& cfg);

}  // namespace panens
