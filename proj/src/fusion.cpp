#include "panens/fusion.hpp"

#include <algorithm>
#include <map>

#include "panens/detmath.hpp"
#include "panens/kernels.hpp"

namespace panens {

void CategoryTable::validate() const {
    if (entries.empty()) throw SpecInvalid("category table is empty");
    if (entries.size() >= kVoidSemantic)
        throw SpecInvalid("too many categories for u16 semantic ids");
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].id != static_cast<int>(i))
            throw SpecInvalid("category ids must be contiguous from 0");
}

void FusionConfig::validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(min_object_score) || !in_unit(min_pixel_score) || !in_unit(min_overlap_ratio))
        throw SpecInvalid("fusion thresholds must be in [0, 1]");
}

int PanopticVideo::segment_index(uint16_t semantic, uint16_t instance) const {
    if (semantic == kVoidSemantic) return -1;
    for (std::size_t i = 0; i < segments.size(); ++i)
        if (segments[i].category == semantic && segments[i].instance == instance)
            return static_cast<int>(i);
    return -1;
}

namespace {

struct KeptTrack {
    int track_index;
    int category;
    double score;
};

// Argmax assignment of one frame restricted to the given tracks; winner[p]
// indexes into `kept`.
void assign_frame(const TrackSet& tracks, const std::vector<KeptTrack>& kept, int t,
                  std::vector<int32_t>& winner, std::vector<double>& value) {
    const std::size_t n = tracks.dims.count();
    std::vector<const float*> grids(kept.size());
    std::vector<double> weights(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
        grids[k] = tracks.tracks[kept[k].track_index].mask_logits[t].values.data();
        weights[k] = kept[k].score;
    }
    winner.assign(n, -1);
    value.assign(n, 0.0);
    if (!kept.empty())
        kern::argmax_fuse(grids.data(), weights.data(), kept.size(), n, winner.data(),
                          value.data());
}

}  // namespace

PanopticVideo fuse(const TrackSet& tracks, const CategoryTable& cats, const FusionConfig& cfg) {
    cats.validate();
    cfg.validate();
    const int n_classes = cats.count();
    for (const QueryTrack& tr : tracks.tracks) {
        if (tr.class_logits.size() != static_cast<std::size_t>(n_classes) + 1)
            throw ClassLogitLengthMismatch(
                "track " + std::to_string(tr.track_id) + " has " +
                std::to_string(tr.class_logits.size()) + " class logits, expected " +
                std::to_string(n_classes + 1));
        if (tr.mask_logits.size() != static_cast<std::size_t>(tracks.length))
            throw LengthMismatch("track " + std::to_string(tr.track_id) +
                                 " grid count differs from video length");
        for (const LogitGrid& g : tr.mask_logits)
            if (g.dims != tracks.dims)
                throw DimsMismatch("track grid dims differ from track set dims");
    }

    // Track-level gate: softmax over C+1, drop no-object argmax and weak scores.
    std::vector<KeptTrack> kept;
    for (std::size_t i = 0; i < tracks.tracks.size(); ++i) {
        const QueryTrack& tr = tracks.tracks[i];
        const auto p = detmath::softmax(tr.class_logits.data(), tr.class_logits.size());
        int full_argmax = 0;
        for (std::size_t c = 1; c < p.size(); ++c)
            if (p[c] > p[full_argmax]) full_argmax = static_cast<int>(c);
        if (full_argmax == n_classes) continue;  // no-object slot wins
        int cat = 0;
        for (int c = 1; c < n_classes; ++c)
            if (p[c] > p[cat]) cat = c;
        const double score = p[cat];
        if (score < cfg.min_object_score) continue;
        kept.push_back({static_cast<int>(i), cat, score});
    }

    const int t_len = tracks.length;
    const std::size_t n_px = tracks.dims.count();

    // First pass: per-pixel winners and per-track claimed area.
    std::vector<std::vector<int32_t>> winners(t_len);
    std::vector<uint64_t> claimed(kept.size(), 0);
    {
        std::vector<double> value;
        for (int t = 0; t < t_len; ++t) {
            assign_frame(tracks, kept, t, winners[t], value);
            for (std::size_t p = 0; p < n_px; ++p) {
                if (winners[t][p] >= 0 && value[p] < cfg.min_pixel_score) winners[t][p] = -1;
                if (winners[t][p] >= 0) ++claimed[winners[t][p]];
            }
        }
    }

    // One-pass overlap filter: a track owning too little of its thresholded
    // tube is deleted; surviving set is fixed before re-assignment.
    std::vector<char> survives(kept.size(), 1);
    bool any_deleted = false;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const uint64_t tube_area =
            tracks.tracks[kept[k].track_index].thresholded_tube().area();
        if (static_cast<double>(claimed[k]) <
            cfg.min_overlap_ratio * static_cast<double>(tube_area)) {
            survives[k] = 0;
            any_deleted = true;
        }
    }

    if (any_deleted) {
        std::vector<KeptTrack> surv;
        std::vector<int> surv_of_kept(kept.size(), -1);
        for (std::size_t k = 0; k < kept.size(); ++k)
            if (survives[k]) {
                surv_of_kept[k] = static_cast<int>(surv.size());
                surv.push_back(kept[k]);
            }
        std::vector<int32_t> re_winner;
        std::vector<double> re_value;
        for (int t = 0; t < t_len; ++t) {
            bool needed = false;
            for (std::size_t p = 0; p < n_px && !needed; ++p)
                if (winners[t][p] >= 0 && !survives[winners[t][p]]) needed = true;
            if (!needed) {
                for (std::size_t p = 0; p < n_px; ++p)
                    if (winners[t][p] >= 0) winners[t][p] = surv_of_kept[winners[t][p]];
                continue;
            }
            assign_frame(tracks, surv, t, re_winner, re_value);
            for (std::size_t p = 0; p < n_px; ++p) {
                if (winners[t][p] >= 0 && !survives[winners[t][p]]) {
                    winners[t][p] =
                        (re_winner[p] >= 0 && re_value[p] >= cfg.min_pixel_score)
                            ? re_winner[p]
                            : -1;
                } else if (winners[t][p] >= 0) {
                    winners[t][p] = surv_of_kept[winners[t][p]];
                }
            }
        }
        kept = std::move(surv);
    }

    // Pixel ownership per final kept index.
    std::vector<uint64_t> owned(kept.size(), 0);
    for (int t = 0; t < t_len; ++t)
        for (std::size_t p = 0; p < n_px; ++p)
            if (winners[t][p] >= 0) ++owned[winners[t][p]];

    // Registry: ids in track order, restricted to tracks that own pixels.
    // Stuff tracks of one category share a single segment with instance 0.
    PanopticVideo out;
    out.video_id = tracks.video_id;
    out.dims = tracks.dims;
    std::vector<uint16_t> instance_of_kept(kept.size(), 0);
    std::vector<int> segment_of_kept(kept.size(), -1);
    std::map<int, int> stuff_segment_by_cat;
    uint32_t next_registry_id = 1;
    uint16_t next_instance = 1;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        if (owned[k] == 0) continue;
        const int cat = kept[k].category;
        if (cats.is_thing(cat)) {
            SegmentInfo seg{next_registry_id++, cat, true, next_instance};
            instance_of_kept[k] = next_instance++;
            segment_of_kept[k] = static_cast<int>(out.segments.size());
            out.segments.push_back(seg);
        } else {
            auto it = stuff_segment_by_cat.find(cat);
            if (it == stuff_segment_by_cat.end()) {
                SegmentInfo seg{next_registry_id++, cat, false, 0};
                it = stuff_segment_by_cat.emplace(cat, static_cast<int>(out.segments.size()))
                         .first;
                out.segments.push_back(seg);
            }
            segment_of_kept[k] = it->second;
        }
    }

    out.frames.resize(t_len);
    for (int t = 0; t < t_len; ++t) {
        PanopticFrame& f = out.frames[t];
        f.dims = tracks.dims;
        f.semantic.assign(n_px, kVoidSemantic);
        f.instance.assign(n_px, 0);
        for (std::size_t p = 0; p < n_px; ++p) {
            const int32_t w = winners[t][p];
            if (w < 0 || segment_of_kept[w] < 0) continue;
            f.semantic[p] = static_cast<uint16_t>(kept[w].category);
            f.instance[p] = instance_of_kept[w];
        }
    }
    return out;
}

}  // namespace panens
