#include "panens/ensemble.hpp"

#include <algorithm>

#include "panens/kernels.hpp"

namespace panens {

namespace {

// Logit written into the frames a per-frame residual lost to merging; far
// below any threshold so the residual is empty there.
constexpr float kAbsentLogit = -12.0f;

void check_compatible(const TrackSet& a, const TrackSet& b) {
    if (a.dims != b.dims)
        throw DimsMismatch("query_wise_merge: track sets have different dims");
    if (a.length != b.length)
        throw LengthMismatch("query_wise_merge: track sets have different lengths");
}

// Running mean over the original track plus every absorbed supplementary.
// Sums are kept in double and divided once per readout.
struct TrackAccumulator {
    std::vector<std::vector<double>> grid_sums;  // per frame
    std::vector<double> class_sum;
    double weight = 0.0;

    void init(const QueryTrack& base) {
        grid_sums.resize(base.mask_logits.size());
        for (std::size_t t = 0; t < base.mask_logits.size(); ++t) {
            grid_sums[t].assign(base.mask_logits[t].values.size(), 0.0);
            kern::add_into(grid_sums[t].data(), base.mask_logits[t].values.data(),
                           grid_sums[t].size());
        }
        class_sum.assign(base.class_logits.begin(), base.class_logits.end());
        weight = 1.0;
    }

    void absorb_grids(const QueryTrack& s) {
        for (std::size_t t = 0; t < grid_sums.size(); ++t)
            kern::add_into(grid_sums[t].data(), s.mask_logits[t].values.data(),
                           grid_sums[t].size());
    }

    void absorb_frame(const LogitGrid& g, int t) {
        kern::add_into(grid_sums[t].data(), g.values.data(), grid_sums[t].size());
    }

    void write_mean(QueryTrack& dst, const std::vector<double>& frame_weight) const {
        for (std::size_t t = 0; t < grid_sums.size(); ++t)
            kern::divide_into(dst.mask_logits[t].values.data(), grid_sums[t].data(),
                              frame_weight[t], grid_sums[t].size());
        for (std::size_t c = 0; c < class_sum.size(); ++c)
            dst.class_logits[c] = static_cast<float>(class_sum[c] / weight);
    }
};

uint32_t next_free_id(const TrackSet& set) {
    uint32_t next = 0;
    for (const QueryTrack& t : set.tracks) next = std::max(next, t.track_id + 1);
    return next;
}

TrackSet merge_tube_level(const TrackSet& original, const TrackSet& supplementary,
                          const EnsembleConfig& cfg, MergeStats* stats) {
    TrackSet out = original;
    const std::size_t n_orig = out.tracks.size();

    std::vector<MaskTube> cur_tubes(n_orig);
    for (std::size_t o = 0; o < n_orig; ++o) cur_tubes[o] = out.tracks[o].thresholded_tube();

    std::vector<TrackAccumulator> acc(n_orig);
    std::vector<double> counts(n_orig, 1.0);
    uint32_t next_id = std::max(next_free_id(original), next_free_id(supplementary));

    for (const QueryTrack& s : supplementary.tracks) {
        const MaskTube s_tube = s.thresholded_tube();

        std::vector<double> ious(n_orig, 0.0);
        if (n_orig > 0)
            kern::tube_iou_matrix(&s_tube, 1, cur_tubes.data(), n_orig, ious.data());

        int best = -1;
        double best_iou = -1.0;
        for (std::size_t o = 0; o < n_orig; ++o) {
            if (ious[o] > best_iou) {  // strict: ties keep the lowest index
                best_iou = ious[o];
                best = static_cast<int>(o);
            }
        }

        if (best >= 0 && best_iou > cfg.iou_threshold) {
            if (acc[best].weight == 0.0) acc[best].init(original.tracks[best]);
            acc[best].absorb_grids(s);
            for (std::size_t c = 0; c < acc[best].class_sum.size(); ++c)
                acc[best].class_sum[c] += s.class_logits[c];
            acc[best].weight += 1.0;
            counts[best] += 1.0;
            // Refresh the merged track so later supplementaries compare
            // against its updated thresholded masks.
            const std::vector<double> fw(out.length, counts[best]);
            acc[best].write_mean(out.tracks[best], fw);
            cur_tubes[best] = out.tracks[best].thresholded_tube();
            if (stats) ++stats->merged;
        } else {
            QueryTrack appended = s;
            appended.track_id = next_id++;
            out.tracks.push_back(std::move(appended));
            if (stats) ++stats->appended;
        }
    }
    return out;
}

TrackSet merge_per_frame(const TrackSet& original, const TrackSet& supplementary,
                         const EnsembleConfig& cfg, MergeStats* stats) {
    TrackSet out = original;
    const std::size_t n_orig = out.tracks.size();
    const int t_len = out.length;

    // Current thresholded mask per (original, frame).
    std::vector<std::vector<BinaryMask>> cur(n_orig);
    for (std::size_t o = 0; o < n_orig; ++o) {
        cur[o].reserve(t_len);
        for (const LogitGrid& g : out.tracks[o].mask_logits) cur[o].push_back(threshold(g));
    }

    std::vector<TrackAccumulator> acc(n_orig);
    std::vector<std::vector<double>> frame_counts(n_orig, std::vector<double>(t_len, 1.0));
    uint32_t next_id = std::max(next_free_id(original), next_free_id(supplementary));

    for (const QueryTrack& s : supplementary.tracks) {
        std::vector<char> matched(t_len, 0);
        // Class contribution is weighted by the fraction of frames absorbed
        // into each original.
        std::vector<double> class_frames(n_orig, 0.0);

        for (int t = 0; t < t_len; ++t) {
            const BinaryMask s_mask = threshold(s.mask_logits[t]);
            int best = -1;
            double best_iou = -1.0;
            for (std::size_t o = 0; o < n_orig; ++o) {
                const double v = iou_2d(s_mask, cur[o][t]);
                if (v > best_iou) {
                    best_iou = v;
                    best = static_cast<int>(o);
                }
            }
            if (best >= 0 && best_iou > cfg.iou_threshold) {
                if (acc[best].weight == 0.0) acc[best].init(original.tracks[best]);
                acc[best].absorb_frame(s.mask_logits[t], t);
                frame_counts[best][t] += 1.0;
                acc[best].write_mean(out.tracks[best], frame_counts[best]);
                cur[best][t] = threshold(out.tracks[best].mask_logits[t]);
                class_frames[best] += 1.0;
                matched[t] = 1;
            }
        }

        for (std::size_t o = 0; o < n_orig; ++o) {
            if (class_frames[o] == 0.0) continue;
            const double w = class_frames[o] / t_len;
            for (std::size_t c = 0; c < acc[o].class_sum.size(); ++c)
                acc[o].class_sum[c] += w * s.class_logits[c];
            acc[o].weight += w;
        }

        // Residual: the frames no original claimed. Appended only when they
        // carry mask signal.
        bool residual_signal = false;
        for (int t = 0; t < t_len && !residual_signal; ++t)
            if (!matched[t] && !threshold(s.mask_logits[t]).empty()) residual_signal = true;

        if (residual_signal) {
            QueryTrack residual = s;
            residual.track_id = next_id++;
            for (int t = 0; t < t_len; ++t)
                if (matched[t])
                    residual.mask_logits[t] =
                        LogitGrid::constant(out.dims, kAbsentLogit);
            out.tracks.push_back(std::move(residual));
            if (stats) ++stats->appended;
        } else if (stats) {
            ++stats->merged;
        }
    }

    // Final class means for originals that absorbed anything.
    for (std::size_t o = 0; o < n_orig; ++o) {
        if (acc[o].weight == 0.0) continue;
        for (std::size_t c = 0; c < acc[o].class_sum.size(); ++c)
            out.tracks[o].class_logits[c] =
                static_cast<float>(acc[o].class_sum[c] / acc[o].weight);
    }
    return out;
}

}  // namespace

const char* aug_kind_name(AugKind k) {
    switch (k) {
        case AugKind::identity: return "identity";
        case AugKind::hflip: return "hflip";
        case AugKind::rescale: return "rescale";
    }
    return "identity";
}

AugKind aug_kind_from_name(const std::string& name) {
    if (name == "identity") return AugKind::identity;
    if (name == "hflip") return AugKind::hflip;
    if (name == "rescale") return AugKind::rescale;
    throw SpecInvalid("unknown augmentation kind: " + name);
}

TrackSet align_member(const TrackSet& member, const AugmentationSpec& spec, Dims reference) {
    if (member.dims != spec.native_dims)
        throw DimsMismatch("align_member: member dims do not match spec.native_dims");
    if (spec.kind != AugKind::rescale && spec.native_dims != reference)
        throw DimsMismatch("align_member: non-rescale member must already be at reference dims");

    TrackSet out = member;
    switch (spec.kind) {
        case AugKind::identity:
            break;
        case AugKind::hflip:
            for (QueryTrack& t : out.tracks)
                for (LogitGrid& g : t.mask_logits) g = hflip(g);
            break;
        case AugKind::rescale:
            for (QueryTrack& t : out.tracks)
                for (LogitGrid& g : t.mask_logits) g = resize_bilinear(g, reference);
            out.dims = reference;
            break;
    }
    return out;
}

TrackSet query_wise_merge(const TrackSet& original, const TrackSet& supplementary,
                          const EnsembleConfig& cfg, MergeStats* stats) {
    check_compatible(original, supplementary);
    if (cfg.iou_threshold <= 0.0 || cfg.iou_threshold > 1.0)
        throw SpecInvalid("iou_threshold must be in (0, 1]");
    return cfg.matching_level == MatchingLevel::tube
               ? merge_tube_level(original, supplementary, cfg, stats)
               : merge_per_frame(original, supplementary, cfg, stats);
}

TrackSet ensemble_pipeline(const TrackSet& reference,
                           const std::vector<std::pair<TrackSet, AugmentationSpec>>& members,
                           const EnsembleConfig& cfg,
                           std::vector<MergeStats>* per_member_stats) {
    TrackSet merged = reference;
    for (const auto& [member, spec] : members) {
        MergeStats stats;
        const TrackSet aligned = align_member(member, spec, reference.dims);
        merged = query_wise_merge(merged, aligned, cfg, &stats);
        if (per_member_stats) per_member_stats->push_back(stats);
    }
    return merged;
}

}  // namespace panens
