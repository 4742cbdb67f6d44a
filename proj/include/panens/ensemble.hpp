#pragma once

#include <string>
#include <utility>
#include <vector>

#include "panens/tracker.hpp"

namespace panens {

enum class AugKind { identity, hflip, rescale };

const char* aug_kind_name(AugKind k);
AugKind aug_kind_from_name(const std::string& name);

/// How a member's predictions were produced relative to the reference video.
/// Photometric augmentations (brightness/contrast) need no geometric undo and
/// map to `identity`.
struct AugmentationSpec {
    AugKind kind = AugKind::identity;
    Dims native_dims;  // dims the member was produced at
};

enum class MatchingLevel { tube, per_frame };

struct EnsembleConfig {
    double iou_threshold = 0.5;  // "bigger than" is strict
    MatchingLevel matching_level = MatchingLevel::tube;
};

struct MergeStats {
    int merged = 0;
    int appended = 0;
};

/// Undo a member's augmentation so its grids live in the reference geometry:
/// identity passes through, hflip flips every grid back, rescale resizes
/// every grid bilinearly. Class logits are never altered.
TrackSet align_member(const TrackSet& member, const AugmentationSpec& spec, Dims reference);

/// Query-wise ensemble of one supplementary set into the original set.
/// Each supplementary track is compared by thresholded-mask IoU against the
/// originals (tube IoU by default); the best match above the threshold
/// absorbs it (mask and class logits become the running arithmetic mean of
/// everything absorbed so far, divided once), otherwise the track is appended
/// under a fresh id. Later supplementaries see the updated thresholded masks
/// of already-merged originals.
TrackSet query_wise_merge(const TrackSet& original, const TrackSet& supplementary,
                          const EnsembleConfig& cfg, MergeStats* stats = nullptr);

/// Aligns then merges every member into the reference, in list order.
TrackSet ensemble_pipeline(const TrackSet& reference,
                           const std::vector<std::pair<TrackSet, AugmentationSpec>>& members,
                           const EnsembleConfig& cfg,
                           std::vector<MergeStats>* per_member_stats = nullptr);

}  // namespace panens
