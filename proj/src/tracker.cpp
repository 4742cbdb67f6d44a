#include "panens/tracker.hpp"

#include <cmath>
#include <numeric>

#include "panens/detmath.hpp"
#include "panens/kernels.hpp"
#include "panens/rng.hpp"

namespace panens {

namespace {

double class_cosine(const std::vector<float>& a, const std::vector<float>& b) {
    const auto pa = detmath::softmax(a.data(), a.size());
    const auto pb = detmath::softmax(b.data(), b.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        dot += pa[i] * pb[i];
        na += pa[i] * pa[i];
        nb += pb[i] * pb[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

void validate_frame(const FrameQuerySet& f, Dims dims, std::size_t class_len) {
    for (const FrameQuery& q : f.queries) {
        if (q.mask_logits.dims != dims)
            throw DimsMismatch("query grid dims differ within video at frame " +
                               std::to_string(f.frame_index));
        if (q.class_logits.size() != class_len)
            throw ClassLogitLengthMismatch("class logit vectors differ in length at frame " +
                                           std::to_string(f.frame_index));
    }
}

}  // namespace

MaskTube QueryTrack::thresholded_tube() const {
    MaskTube tube;
    tube.dims = mask_logits.empty() ? Dims{} : mask_logits.front().dims;
    tube.frames.reserve(mask_logits.size());
    for (const LogitGrid& g : mask_logits) tube.frames.push_back(threshold(g));
    return tube;
}

Assignment match_adjacent(const FrameQuerySet& prev, const FrameQuerySet& curr, double lambda) {
    if (prev.queries.empty() || curr.queries.empty())
        throw InconsistentQueryCount("match_adjacent: empty query set");
    const Dims dims = prev.queries.front().mask_logits.dims;
    const std::size_t class_len = prev.queries.front().class_logits.size();
    validate_frame(prev, dims, class_len);
    validate_frame(curr, dims, class_len);

    const int np = static_cast<int>(prev.queries.size());
    const int nc = static_cast<int>(curr.queries.size());

    // Thresholded masks as single-frame tubes so the pairwise IoU kernel applies.
    std::vector<MaskTube> pv(np), cv(nc);
    for (int i = 0; i < np; ++i)
        pv[i] = MaskTube{dims, {threshold(prev.queries[i].mask_logits)}};
    for (int j = 0; j < nc; ++j)
        cv[j] = MaskTube{dims, {threshold(curr.queries[j].mask_logits)}};

    std::vector<double> iou(static_cast<std::size_t>(np) * nc);
    kern::tube_iou_matrix(pv.data(), pv.size(), cv.data(), cv.size(), iou.data());

    CostMatrix m;
    m.rows = np;
    m.cols = nc;
    m.costs.resize(iou.size());
    for (int i = 0; i < np; ++i) {
        for (int j = 0; j < nc; ++j) {
            const double cos = class_cosine(prev.queries[i].class_logits,
                                            curr.queries[j].class_logits);
            m.at(i, j) = (1.0 - iou[static_cast<std::size_t>(i) * nc + j]) +
                         lambda * (1.0 - cos);
        }
    }
    return hungarian_solve(m);
}

TrackSet build_tracks(const std::vector<FrameQuerySet>& frames, const std::string& video_id) {
    if (frames.empty()) throw InconsistentQueryCount("build_tracks: no frames");
    const std::size_t n = frames.front().queries.size();
    if (n == 0) throw InconsistentQueryCount("build_tracks: zero queries per frame");
    for (const FrameQuerySet& f : frames)
        if (f.queries.size() != n)
            throw InconsistentQueryCount("build_tracks: frame " + std::to_string(f.frame_index) +
                                         " has " + std::to_string(f.queries.size()) +
                                         " queries, expected " + std::to_string(n));

    const Dims dims = frames.front().queries.front().mask_logits.dims;
    const std::size_t class_len = frames.front().queries.front().class_logits.size();
    const int t_len = static_cast<int>(frames.size());

    // chain[t][k] = index of chain k's query in frame t
    std::vector<std::vector<int>> chain(t_len, std::vector<int>(n));
    for (std::size_t k = 0; k < n; ++k) chain[0][k] = static_cast<int>(k);
    for (int t = 1; t < t_len; ++t) {
        const Assignment a = match_adjacent(frames[t - 1], frames[t]);
        std::vector<int> prev_to_curr(n, -1);
        for (const auto& [i, j] : a.pairs) prev_to_curr[i] = j;
        for (std::size_t k = 0; k < n; ++k) chain[t][k] = prev_to_curr[chain[t - 1][k]];
    }

    TrackSet out;
    out.video_id = video_id;
    out.dims = dims;
    out.length = t_len;
    out.tracks.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        QueryTrack& tr = out.tracks[k];
        tr.track_id = static_cast<uint32_t>(k);
        tr.mask_logits.reserve(t_len);
        std::vector<double> cls_sum(class_len, 0.0);
        for (int t = 0; t < t_len; ++t) {
            const FrameQuery& q = frames[t].queries[chain[t][k]];
            tr.mask_logits.push_back(q.mask_logits);
            for (std::size_t c = 0; c < class_len; ++c) cls_sum[c] += q.class_logits[c];
        }
        tr.class_logits.resize(class_len);
        for (std::size_t c = 0; c < class_len; ++c)
            tr.class_logits[c] = static_cast<float>(cls_sum[c] / t_len);
    }
    return out;
}

std::vector<FrameQuerySet> slice_tracks(const TrackSet& tracks, bool shuffle, uint64_t seed) {
    std::vector<FrameQuerySet> out(tracks.length);
    const std::size_t n = tracks.tracks.size();
    for (int t = 0; t < tracks.length; ++t) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (shuffle) {
            Rng rng = Rng(seed).fork(static_cast<uint64_t>(t));
            for (std::size_t i = n; i > 1; --i)
                std::swap(order[i - 1], order[rng.next_below(i)]);
        }
        out[t].frame_index = t;
        out[t].queries.reserve(n);
        for (std::size_t k : order) {
            const QueryTrack& tr = tracks.tracks[k];
            out[t].queries.push_back({tr.mask_logits[t], tr.class_logits});
        }
    }
    return out;
}

}  // namespace panens
