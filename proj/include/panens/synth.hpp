#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panens/metrics.hpp"
#include "panens/tracker.hpp"

namespace panens {

/// Deterministic scene description: moving rectangles/ellipses ("things")
/// over horizontal bands ("stuff"). Everything unspecified is drawn from the
/// seed, so (spec, seed) fully determines the output.
struct SceneSpec {
    std::string video_id;
    uint64_t seed = 0;
    Dims dims{64, 96};
    int frames = 4;
    int n_things = 2;
    int n_stuff_bands = 2;
    int thing_categories = 4;   // category ids [0, thing_categories)
    int stuff_categories = 3;   // category ids [thing_categories, ...)
    std::vector<std::pair<double, double>> motion;  // per thing (dx, dy); empty = random
    std::vector<int> thing_category_ids;            // empty = random
    std::vector<int> band_category_ids;             // empty = random

    void validate() const;  // throws SpecInvalid naming the offending field
    CategoryTable category_table() const;
};

struct CorruptionSpec {
    double drop_track_prob = 0.0;
    int boundary_jitter_px = 0;
    double logit_noise_sigma = 0.0;
    double class_confusion_prob = 0.0;
    std::optional<int> id_swap_at_frame;

    void validate() const;
};

struct Scene {
    GroundTruthVideo gt;
    TrackSet ideal;  // one track per GT segment, saturated logits
    CategoryTable categories;
};

/// GT assembly uses painter's order: bands first, then things in index
/// order; every pixel belongs to the topmost shape, uncovered pixels go to
/// the GT void mask. Segments that end up with zero total area (fully
/// occluded everywhere) are omitted, along with their tracks. Ideal tracks
/// carry +6/-6 mask logits and a +8 one-hot class vector.
Scene generate(const SceneSpec& spec);

/// Applies the corruption phases in order: track drops, boundary
/// dilation/erosion (expressed as +/-3 logit flips), additive logit noise,
/// class confusion, and the optional id swap of two random tracks from the
/// given frame onward. Each phase draws from its own forked stream.
TrackSet corrupt(const TrackSet& tracks, const CorruptionSpec& spec, uint64_t seed);

}  // namespace panens
