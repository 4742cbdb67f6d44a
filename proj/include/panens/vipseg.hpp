#pragma once

#include <string>
#include <vector>

#include "panens/fusion.hpp"

namespace panens::vipseg {

// Metadata-only reader for VIPSeg-style annotation JSON
// ({"videos": [...], "categories": [...]}). Pixel masks live in image files
// the toolkit does not decode; this surfaces the structure so real
// annotations can be inventoried and cross-checked against containers.

struct SegmentInfo {
    int id = 0;
    int category_id = 0;
};

struct VideoInfo {
    std::string video_id;
    int num_frames = 0;
    std::vector<SegmentInfo> segments;  // union over frames, unique ids
};

struct AnnotationIndex {
    CategoryTable categories;
    std::vector<VideoInfo> videos;
};

AnnotationIndex parse_annotations(const std::string& json_text);
AnnotationIndex read_annotations(const std::string& path);

}  // namespace panens::vipseg
