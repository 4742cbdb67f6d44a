#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "panens/ensemble.hpp"
#include "panens/fusion.hpp"
#include "panens/metrics.hpp"
#include "panens/tracker.hpp"

namespace panens {

// One self-describing file format for every stage boundary:
//   magic "PANENSC1" | u32 manifest length | manifest JSON | sections,
// each section length-prefixed with a u64, all integers and floats
// little-endian. The manifest records section offsets (relative to the end
// of the manifest) and lengths; readers verify both and ignore unknown
// manifest fields.

enum class ContainerKind { frame_queries, track_set, panoptic, ground_truth };

const char* container_kind_name(ContainerKind k);

struct FrameQueriesPayload {
    std::string video_id;
    Dims dims;
    CategoryTable categories;
    AugmentationSpec augmentation{AugKind::identity, {}};
    std::string source_tag = "original";  // provenance carried into built tracks
    std::vector<FrameQuerySet> frames;
};

struct TrackSetPayload {
    TrackSet tracks;
    CategoryTable categories;
    AugmentationSpec augmentation{AugKind::identity, {}};
};

struct PanopticPayload {
    PanopticVideo video;
    CategoryTable categories;
};

struct GroundTruthPayload {
    GroundTruthVideo gt;
};

using ContainerPayload =
    std::variant<FrameQueriesPayload, TrackSetPayload, PanopticPayload, GroundTruthPayload>;

ContainerKind payload_kind(const ContainerPayload& p);

std::vector<uint8_t> serialize_container(const ContainerPayload& payload);

/// Throws FormatError on any structural inconsistency.
ContainerPayload parse_container(const uint8_t* data, std::size_t size);

void write_container(const std::string& path, const ContainerPayload& payload);
ContainerPayload read_container(const std::string& path);

}  // namespace panens
