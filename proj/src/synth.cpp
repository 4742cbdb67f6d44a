#include "panens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "panens/rng.hpp"

namespace panens {

namespace {

constexpr float kInsideLogit = 6.0f;
constexpr float kOutsideLogit = -6.0f;
constexpr float kClassLogit = 8.0f;
constexpr float kJitterLogit = 3.0f;

struct Thing {
    bool ellipse = false;
    double half_w = 0, half_h = 0;   // half extents
    double x0 = 0, y0 = 0;           // center at frame 0
    double dx = 0, dy = 0;           // velocity, pixels/frame
    int category = 0;
};

// Paint the thing at frame t into `owner` with label `value` (painter's
// order: the caller invokes in back-to-front order).
void paint_thing(const Thing& th, int t, Dims dims, std::vector<int>& owner, int value) {
    const double cx = th.x0 + th.dx * t;
    const double cy = th.y0 + th.dy * t;
    const int rmin = std::max(0, static_cast<int>(std::floor(cy - th.half_h)));
    const int rmax = std::min(dims.height - 1, static_cast<int>(std::ceil(cy + th.half_h)));
    const int cmin = std::max(0, static_cast<int>(std::floor(cx - th.half_w)));
    const int cmax = std::min(dims.width - 1, static_cast<int>(std::ceil(cx + th.half_w)));
    for (int r = rmin; r <= rmax; ++r) {
        for (int c = cmin; c <= cmax; ++c) {
            bool inside;
            if (th.ellipse) {
                const double ny = (r - cy) / th.half_h;
                const double nx = (c - cx) / th.half_w;
                inside = nx * nx + ny * ny <= 1.0;
            } else {
                inside = std::abs(r - cy) <= th.half_h && std::abs(c - cx) <= th.half_w;
            }
            if (inside) owner[static_cast<std::size_t>(r) * dims.width + c] = value;
        }
    }
}

LogitGrid grid_from_bits(Dims dims, const std::vector<uint8_t>& bits) {
    LogitGrid g;
    g.dims = dims;
    g.values.resize(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        g.values[i] = bits[i] ? kInsideLogit : kOutsideLogit;
    return g;
}

// Chebyshev dilation/erosion by `r` passes of the 8-neighborhood.
std::vector<uint8_t> morph(const std::vector<uint8_t>& bits, Dims dims, int r, bool dilate) {
    std::vector<uint8_t> cur = bits;
    std::vector<uint8_t> next(bits.size());
    for (int pass = 0; pass < r; ++pass) {
        for (int y = 0; y < dims.height; ++y) {
            for (int x = 0; x < dims.width; ++x) {
                uint8_t v = dilate ? 0 : 1;
                for (int oy = -1; oy <= 1; ++oy) {
                    for (int ox = -1; ox <= 1; ++ox) {
                        const int ny = y + oy, nx = x + ox;
                        uint8_t nb = 0;
                        if (ny >= 0 && ny < dims.height && nx >= 0 && nx < dims.width)
                            nb = cur[static_cast<std::size_t>(ny) * dims.width + nx];
                        else
                            nb = dilate ? 0 : 1;  // border behaves as outside/clamped
                        if (dilate && nb) v = 1;
                        if (!dilate && !nb) v = 0;
                    }
                }
                next[static_cast<std::size_t>(y) * dims.width + x] = v;
            }
        }
        cur.swap(next);
    }
    return cur;
}

}  // namespace

void SceneSpec::validate() const {
    if (!dims.valid()) throw SpecInvalid("dims: height and width must be >= 1");
    if (frames < 1) throw SpecInvalid("frames: must be >= 1");
    if (n_things < 0) throw SpecInvalid("things: must be >= 0");
    if (n_stuff_bands < 0) throw SpecInvalid("stuff_bands: must be >= 0");
    if (thing_categories < 1) throw SpecInvalid("thing_categories: must be >= 1");
    if (stuff_categories < 1) throw SpecInvalid("stuff_categories: must be >= 1");
    if (!motion.empty() && motion.size() != static_cast<std::size_t>(n_things))
        throw SpecInvalid("motion: list length must equal things");
    for (int c : thing_category_ids)
        if (c < 0 || c >= thing_categories)
            throw SpecInvalid("thing_category_ids: id out of range");
    for (int c : band_category_ids)
        if (c < thing_categories || c >= thing_categories + stuff_categories)
            throw SpecInvalid("band_category_ids: id out of range");
    if (!thing_category_ids.empty() &&
        thing_category_ids.size() != static_cast<std::size_t>(n_things))
        throw SpecInvalid("thing_category_ids: list length must equal things");
    if (!band_category_ids.empty() &&
        band_category_ids.size() != static_cast<std::size_t>(n_stuff_bands))
        throw SpecInvalid("band_category_ids: list length must equal stuff_bands");
}

CategoryTable SceneSpec::category_table() const {
    CategoryTable t;
    for (int i = 0; i < thing_categories; ++i) t.entries.push_back({i, true});
    for (int i = 0; i < stuff_categories; ++i) t.entries.push_back({thing_categories + i, false});
    return t;
}

void CorruptionSpec::validate() const {
    if (drop_track_prob < 0 || drop_track_prob > 1)
        throw SpecInvalid("drop_track_prob: must be in [0,1]");
    if (class_confusion_prob < 0 || class_confusion_prob > 1)
        throw SpecInvalid("class_confusion_prob: must be in [0,1]");
    if (boundary_jitter_px < 0) throw SpecInvalid("boundary_jitter_px: must be >= 0");
    if (logit_noise_sigma < 0) throw SpecInvalid("logit_noise_sigma: must be >= 0");
    if (id_swap_at_frame && *id_swap_at_frame < 0)
        throw SpecInvalid("id_swap_at_frame: must be >= 0");
}

Scene generate(const SceneSpec& spec) {
    spec.validate();
    Rng rng = Rng(spec.seed).fork(0x5ce7e);
    const Dims dims = spec.dims;
    const int t_len = spec.frames;

    // Band layout: equal heights, remainder to the last band.
    std::vector<int> band_cat(spec.n_stuff_bands);
    for (int b = 0; b < spec.n_stuff_bands; ++b)
        band_cat[b] = spec.band_category_ids.empty()
                          ? spec.thing_categories +
                                static_cast<int>(rng.next_below(spec.stuff_categories))
                          : spec.band_category_ids[b];

    // Things: size floors keep boundary jitter survivable in tests.
    const int min_half = std::max(4, std::min(dims.height, dims.width) / 10);
    const int max_half = std::max(min_half + 1, std::min(dims.height, dims.width) / 4);
    std::vector<Thing> things(spec.n_things);
    for (int i = 0; i < spec.n_things; ++i) {
        Thing& th = things[i];
        th.ellipse = rng.next_below(2) == 1;
        th.half_h = rng.next_int(min_half, max_half);
        th.half_w = rng.next_int(min_half, max_half);
        th.x0 = rng.next_int(0, dims.width - 1);
        th.y0 = rng.next_int(0, dims.height - 1);
        if (spec.motion.empty()) {
            th.dx = rng.next_int(-3, 3);
            th.dy = rng.next_int(-3, 3);
        } else {
            th.dx = spec.motion[i].first;
            th.dy = spec.motion[i].second;
        }
        th.category = spec.thing_category_ids.empty()
                          ? static_cast<int>(rng.next_below(spec.thing_categories))
                          : spec.thing_category_ids[i];
    }

    // Owner labels per pixel: -1 void, [0, bands) a band, bands + i thing i.
    const std::size_t n_px = dims.count();
    std::vector<std::vector<int>> owner(t_len, std::vector<int>(n_px, -1));
    for (int t = 0; t < t_len; ++t) {
        if (spec.n_stuff_bands > 0) {
            const int band_h = dims.height / spec.n_stuff_bands;
            for (int r = 0; r < dims.height; ++r) {
                int b = band_h == 0 ? spec.n_stuff_bands - 1 : r / band_h;
                b = std::min(b, spec.n_stuff_bands - 1);
                for (int c = 0; c < dims.width; ++c)
                    owner[t][static_cast<std::size_t>(r) * dims.width + c] = b;
            }
        }
        for (int i = 0; i < spec.n_things; ++i)
            paint_thing(things[i], t, dims, owner[t], spec.n_stuff_bands + i);
    }

    // Segment keys: stuff segments are keyed by category (same-category bands
    // merge into one segment), things stay separate.
    struct SegDef {
        int category;
        bool is_thing;
        std::vector<int> labels;  // owner labels that belong to this segment
    };
    std::vector<SegDef> defs;
    std::map<int, int> stuff_seg_by_cat;
    for (int b = 0; b < spec.n_stuff_bands; ++b) {
        auto it = stuff_seg_by_cat.find(band_cat[b]);
        if (it == stuff_seg_by_cat.end()) {
            it = stuff_seg_by_cat.emplace(band_cat[b], static_cast<int>(defs.size())).first;
            defs.push_back({band_cat[b], false, {}});
        }
        defs[it->second].labels.push_back(b);
    }
    for (int i = 0; i < spec.n_things; ++i)
        defs.push_back({things[i].category, true, {spec.n_stuff_bands + i}});

    std::vector<int> seg_of_label(spec.n_stuff_bands + spec.n_things, -1);
    for (std::size_t s = 0; s < defs.size(); ++s)
        for (int l : defs[s].labels) seg_of_label[l] = static_cast<int>(s);

    // Rasterize per segment per frame.
    std::vector<std::vector<std::vector<uint8_t>>> seg_bits(
        defs.size(), std::vector<std::vector<uint8_t>>(t_len, std::vector<uint8_t>(n_px, 0)));
    std::vector<std::vector<uint8_t>> void_bits(t_len, std::vector<uint8_t>(n_px, 0));
    for (int t = 0; t < t_len; ++t) {
        for (std::size_t p = 0; p < n_px; ++p) {
            const int l = owner[t][p];
            if (l < 0)
                void_bits[t][p] = 1;
            else
                seg_bits[seg_of_label[l]][t][p] = 1;
        }
    }

    Scene scene;
    scene.categories = spec.category_table();
    scene.gt.video_id = spec.video_id;
    scene.gt.dims = dims;
    scene.gt.length = t_len;
    scene.gt.categories = scene.categories;
    scene.ideal.video_id = spec.video_id;
    scene.ideal.dims = dims;
    scene.ideal.length = t_len;

    const int n_classes = scene.categories.count();
    uint32_t next_id = 1;
    for (std::size_t s = 0; s < defs.size(); ++s) {
        uint64_t total = 0;
        for (int t = 0; t < t_len; ++t)
            for (std::size_t p = 0; p < n_px; ++p) total += seg_bits[s][t][p];
        if (total == 0) continue;  // fully occluded everywhere: not annotated

        GtSegment seg;
        seg.id = next_id;
        seg.category = defs[s].category;
        seg.is_thing = defs[s].is_thing;
        for (int t = 0; t < t_len; ++t) seg.frames.push_back(rle_encode(dims, seg_bits[s][t]));
        scene.gt.segments.push_back(std::move(seg));

        QueryTrack track;
        track.track_id = next_id - 1;
        track.source_tag = "original";
        for (int t = 0; t < t_len; ++t)
            track.mask_logits.push_back(grid_from_bits(dims, seg_bits[s][t]));
        track.class_logits.assign(n_classes + 1, 0.0f);
        track.class_logits[defs[s].category] = kClassLogit;
        scene.ideal.tracks.push_back(std::move(track));
        ++next_id;
    }
    for (int t = 0; t < t_len; ++t)
        scene.gt.void_masks.push_back(rle_encode(dims, void_bits[t]));
    return scene;
}

TrackSet corrupt(const TrackSet& tracks, const CorruptionSpec& spec, uint64_t seed) {
    spec.validate();
    const Rng root(seed);
    TrackSet out = tracks;

    // Phase 1: drops.
    if (spec.drop_track_prob > 0.0) {
        Rng rng = root.fork(1);
        std::vector<QueryTrack> kept;
        for (QueryTrack& t : out.tracks) {
            const bool drop = rng.next_unit() < spec.drop_track_prob;
            if (!drop) kept.push_back(std::move(t));
        }
        out.tracks = std::move(kept);
    }

    // Phase 2: boundary jitter as +/-3 logit flips on grown/shrunk pixels.
    if (spec.boundary_jitter_px > 0) {
        Rng rng = root.fork(2);
        for (QueryTrack& tr : out.tracks) {
            for (LogitGrid& g : tr.mask_logits) {
                const int j = rng.next_int(-spec.boundary_jitter_px, spec.boundary_jitter_px);
                if (j == 0) continue;
                std::vector<uint8_t> bits(g.values.size());
                for (std::size_t p = 0; p < bits.size(); ++p)
                    bits[p] = g.values[p] > 0.0f ? 1 : 0;
                const auto jittered = morph(bits, g.dims, std::abs(j), j > 0);
                for (std::size_t p = 0; p < bits.size(); ++p) {
                    if (jittered[p] && !bits[p]) g.values[p] = kJitterLogit;
                    if (!jittered[p] && bits[p]) g.values[p] = -kJitterLogit;
                }
            }
        }
    }

    // Phase 3: additive noise.
    if (spec.logit_noise_sigma > 0.0) {
        Rng rng = root.fork(3);
        for (QueryTrack& tr : out.tracks)
            for (LogitGrid& g : tr.mask_logits)
                for (float& v : g.values)
                    v += static_cast<float>(rng.next_gaussian() * spec.logit_noise_sigma);
    }

    // Phase 4: class confusion swaps the argmax slot with a random wrong one.
    if (spec.class_confusion_prob > 0.0) {
        Rng rng = root.fork(4);
        for (QueryTrack& tr : out.tracks) {
            if (rng.next_unit() >= spec.class_confusion_prob) continue;
            const int n_classes = static_cast<int>(tr.class_logits.size()) - 1;
            if (n_classes < 2) continue;
            int arg = 0;
            for (int c = 1; c < n_classes; ++c)
                if (tr.class_logits[c] > tr.class_logits[arg]) arg = c;
            int other = static_cast<int>(rng.next_below(n_classes - 1));
            if (other >= arg) ++other;
            std::swap(tr.class_logits[arg], tr.class_logits[other]);
        }
    }

    // Phase 5: consistent identity swap of two tracks' grids.
    if (spec.id_swap_at_frame && out.tracks.size() >= 2) {
        Rng rng = root.fork(5);
        const std::size_t a = rng.next_below(out.tracks.size());
        std::size_t b = rng.next_below(out.tracks.size() - 1);
        if (b >= a) ++b;
        const int from = *spec.id_swap_at_frame;
        for (std::size_t t = static_cast<std::size_t>(std::max(from, 0));
             t < out.tracks[a].mask_logits.size(); ++t)
            std::swap(out.tracks[a].mask_logits[t], out.tracks[b].mask_logits[t]);
    }
    return out;
}

}  // namespace panens
