#include "panens/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "panens/parallel.hpp"

namespace panens {

void GroundTruthVideo::validate() const {
    if (!dims.valid() || length < 1) throw SpecInvalid("ground truth: invalid dims or length");
    if (!void_masks.empty() && void_masks.size() != static_cast<std::size_t>(length))
        throw SpecInvalid("ground truth: void mask count differs from video length");
    for (const GtSegment& s : segments) {
        if (s.frames.size() != static_cast<std::size_t>(length))
            throw SpecInvalid("ground truth: segment " + std::to_string(s.id) +
                              " frame count differs from video length");
        for (const BinaryMask& m : s.frames)
            if (m.dims != dims) throw SpecInvalid("ground truth: segment mask dims differ");
    }
    // Disjointness: no pixel may belong to two segments or to a segment and void.
    std::vector<uint8_t> owner(dims.count());
    for (int t = 0; t < length; ++t) {
        std::fill(owner.begin(), owner.end(), 0);
        for (const GtSegment& s : segments) {
            const auto bits = rle_decode(s.frames[t]);
            for (std::size_t p = 0; p < bits.size(); ++p) {
                if (!bits[p]) continue;
                if (owner[p]) throw SpecInvalid("ground truth: overlapping segments at frame " +
                                                std::to_string(t));
                owner[p] = 1;
            }
        }
        if (!void_masks.empty()) {
            const auto bits = rle_decode(void_masks[t]);
            for (std::size_t p = 0; p < bits.size(); ++p)
                if (bits[p] && owner[p])
                    throw SpecInvalid("ground truth: void overlaps a segment at frame " +
                                      std::to_string(t));
        }
    }
}

namespace {

// Per-frame integer tallies between pred and gt segments, with GT VOID (and
// GT-unlabeled) pixels excluded everywhere. Window statistics are sums of
// these, and integer sums are order-independent, so parallel construction is
// exact.
struct FrameStats {
    std::vector<uint64_t> pred_area;               // per pred segment
    std::vector<uint64_t> gt_area;                 // per gt segment
    std::unordered_map<uint64_t, uint64_t> inter;  // key = pred * n_gt + gt
};

struct EvalIndex {
    const PanopticVideo* pred = nullptr;
    const GroundTruthVideo* gt = nullptr;
    int t_len = 0;
    std::vector<FrameStats> frames;

    uint64_t key(int p, int g) const {
        return static_cast<uint64_t>(p) * gt->segments.size() + g;
    }
};

void check_compatible(const PanopticVideo& pred, const GroundTruthVideo& gt) {
    if (pred.dims != gt.dims) throw DimsMismatch("eval: pred and gt dims differ");
    if (static_cast<int>(pred.frames.size()) != gt.length)
        throw DimsMismatch("eval: pred and gt video lengths differ");
}

EvalIndex build_index(const PanopticVideo& pred, const GroundTruthVideo& gt) {
    check_compatible(pred, gt);
    EvalIndex idx;
    idx.pred = &pred;
    idx.gt = &gt;
    idx.t_len = gt.length;
    idx.frames.resize(idx.t_len);

    // (semantic, instance) -> pred segment index
    std::unordered_map<uint32_t, int> pred_lookup;
    for (std::size_t i = 0; i < pred.segments.size(); ++i) {
        const SegmentInfo& s = pred.segments[i];
        pred_lookup[(static_cast<uint32_t>(s.category) << 16) | s.instance] =
            static_cast<int>(i);
    }

    const std::size_t n_px = gt.dims.count();
    const bool use_omp = par::mode() == par::Mode::openmp && par::openmp_available();

#pragma omp parallel for schedule(dynamic) if (use_omp)
    for (int t = 0; t < idx.t_len; ++t) {
        FrameStats& fs = idx.frames[t];
        fs.pred_area.assign(pred.segments.size(), 0);
        fs.gt_area.assign(gt.segments.size(), 0);

        std::vector<int> gt_idx(n_px, -1);
        for (std::size_t g = 0; g < gt.segments.size(); ++g) {
            const auto bits = rle_decode(gt.segments[g].frames[t]);
            for (std::size_t p = 0; p < n_px; ++p)
                if (bits[p]) gt_idx[p] = static_cast<int>(g);
        }
        std::vector<uint8_t> voided(n_px, 0);
        if (!gt.void_masks.empty()) voided = rle_decode(gt.void_masks[t]);

        const PanopticFrame& pf = pred.frames[t];
        for (std::size_t p = 0; p < n_px; ++p) {
            if (voided[p] || gt_idx[p] < 0) continue;  // excluded from evaluation
            const int g = gt_idx[p];
            ++fs.gt_area[g];
            if (pf.semantic[p] == kVoidSemantic) continue;
            const auto it = pred_lookup.find(
                (static_cast<uint32_t>(pf.semantic[p]) << 16) | pf.instance[p]);
            if (it == pred_lookup.end()) continue;
            ++fs.pred_area[it->second];
            ++fs.inter[idx.key(it->second, g)];
        }
    }
    return idx;
}

struct WindowStats {
    std::vector<uint64_t> pred_area;
    std::vector<uint64_t> gt_area;
    std::vector<std::pair<uint64_t, uint64_t>> inter;  // (key, count), sorted by key
};

WindowStats sum_window(const EvalIndex& idx, int begin, int end) {
    WindowStats w;
    w.pred_area.assign(idx.pred->segments.size(), 0);
    w.gt_area.assign(idx.gt->segments.size(), 0);
    std::unordered_map<uint64_t, uint64_t> inter;
    for (int t = begin; t < end; ++t) {
        const FrameStats& fs = idx.frames[t];
        for (std::size_t i = 0; i < w.pred_area.size(); ++i) w.pred_area[i] += fs.pred_area[i];
        for (std::size_t i = 0; i < w.gt_area.size(); ++i) w.gt_area[i] += fs.gt_area[i];
        for (const auto& [k, c] : fs.inter) inter[k] += c;
    }
    w.inter.assign(inter.begin(), inter.end());
    std::sort(w.inter.begin(), w.inter.end());
    return w;
}

MatchResult match_window(const EvalIndex& idx, const WindowStats& w) {
    MatchResult out;
    const auto& pred_segs = idx.pred->segments;
    const auto& gt_segs = idx.gt->segments;
    std::vector<char> pred_matched(pred_segs.size(), 0), gt_matched(gt_segs.size(), 0);

    for (const auto& [key, inter] : w.inter) {
        const int p = static_cast<int>(key / gt_segs.size());
        const int g = static_cast<int>(key % gt_segs.size());
        if (pred_segs[p].category != gt_segs[g].category) continue;
        const uint64_t uni = w.pred_area[p] + w.gt_area[g] - inter;
        const double iou = uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
        if (iou > 0.5) {  // strict majority => at most one partner each
            out.matches.push_back({p, g, iou});
            pred_matched[p] = 1;
            gt_matched[g] = 1;
        }
    }
    std::sort(out.matches.begin(), out.matches.end(),
              [](const SegmentMatch& a, const SegmentMatch& b) {
                  return a.pred_index != b.pred_index ? a.pred_index < b.pred_index
                                                      : a.gt_index < b.gt_index;
              });
    for (std::size_t p = 0; p < pred_segs.size(); ++p)
        if (!pred_matched[p] && w.pred_area[p] > 0) out.unmatched_pred.push_back(static_cast<int>(p));
    for (std::size_t g = 0; g < gt_segs.size(); ++g)
        if (!gt_matched[g] && w.gt_area[g] > 0) out.unmatched_gt.push_back(static_cast<int>(g));
    return out;
}

struct PqAccumulator {
    std::map<int, CategoryPq> by_category;

    CategoryPq& cat(int c) {
        auto it = by_category.find(c);
        if (it == by_category.end()) {
            it = by_category.emplace(c, CategoryPq{c, 0.0, 0, 0, 0, 0.0}).first;
        }
        return it->second;
    }

    void add(const EvalIndex& idx, const MatchResult& m) {
        for (const SegmentMatch& sm : m.matches) {
            CategoryPq& c = cat(idx.pred->segments[sm.pred_index].category);
            ++c.tp;
            c.iou_sum += sm.iou;
        }
        for (int p : m.unmatched_pred) ++cat(idx.pred->segments[p].category).fp;
        for (int g : m.unmatched_gt) ++cat(idx.gt->segments[g].category).fn;
    }
};

// PQ of one window: mean over categories present in it; no categories => no
// contribution (the window is skipped).
bool window_pq(const EvalIndex& idx, const WindowStats& w, double* out_pq,
               PqAccumulator* breakdown) {
    const MatchResult m = match_window(idx, w);
    PqAccumulator acc;
    acc.add(idx, m);
    if (breakdown) breakdown->add(idx, m);
    if (acc.by_category.empty()) return false;
    double sum = 0.0;
    for (auto& [c, pq] : acc.by_category) {
        const double denom = pq.tp + 0.5 * pq.fp + 0.5 * pq.fn;
        sum += denom == 0.0 ? 0.0 : pq.iou_sum / denom;
    }
    *out_pq = sum / static_cast<double>(acc.by_category.size());
    return true;
}

double vpq_for_k(const EvalIndex& idx, int k, PqAccumulator* breakdown) {
    if (k < 1) throw InvalidWindow("window length must be >= 1");
    const int t_len = idx.t_len;
    const int n_windows = t_len >= k ? t_len - k + 1 : 1;
    const int span = t_len >= k ? k : t_len;

    double sum = 0.0;
    int counted = 0;
    for (int b = 0; b < n_windows; ++b) {
        const WindowStats w = sum_window(idx, b, b + span);
        double pq = 0.0;
        if (window_pq(idx, w, &pq, breakdown)) {
            sum += pq;
            ++counted;
        }
    }
    // No content anywhere: vacuously perfect agreement.
    return counted == 0 ? 1.0 : sum / counted;
}

}  // namespace

MatchResult match_segments(const PanopticVideo& pred, const GroundTruthVideo& gt,
                           int frame_begin, int frame_end) {
    if (frame_begin < 0 || frame_end > gt.length || frame_begin >= frame_end)
        throw InvalidWindow("match_segments: bad frame window");
    const EvalIndex idx = build_index(pred, gt);
    return match_window(idx, sum_window(idx, frame_begin, frame_end));
}

double vpq_k(const PanopticVideo& pred, const GroundTruthVideo& gt, int k) {
    const EvalIndex idx = build_index(pred, gt);
    return vpq_for_k(idx, k, nullptr);
}

VpqReport vpq_mean(const PanopticVideo& pred, const GroundTruthVideo& gt,
                   const std::vector<int>& windows) {
    if (windows.empty()) throw InvalidWindow("vpq_mean: empty window list");
    const EvalIndex idx = build_index(pred, gt);
    VpqReport rep;
    PqAccumulator breakdown;
    double sum = 0.0;
    for (int k : windows) {
        const double v = vpq_for_k(idx, k, &breakdown);
        rep.vpq_by_k[k] = v;
        sum += v;
    }
    rep.vpq = sum / static_cast<double>(windows.size());
    for (auto& [c, pq] : breakdown.by_category) {
        const double denom = pq.tp + 0.5 * pq.fp + 0.5 * pq.fn;
        pq.pq = denom == 0.0 ? 0.0 : pq.iou_sum / denom;
        rep.per_category.push_back(pq);
    }
    return rep;
}

StqReport stq(const PanopticVideo& pred, const GroundTruthVideo& gt) {
    const EvalIndex idx = build_index(pred, gt);
    const auto& pred_segs = pred.segments;
    const auto& gt_segs = gt.segments;

    // Whole-video totals.
    WindowStats w = sum_window(idx, 0, idx.t_len);

    // SQ: category-level tube IoU, mean over categories with any pixels.
    std::map<int, std::array<uint64_t, 3>> sem;  // cat -> {pred, gt, inter}
    for (std::size_t p = 0; p < pred_segs.size(); ++p)
        if (w.pred_area[p] > 0) sem[pred_segs[p].category][0] += w.pred_area[p];
    for (std::size_t g = 0; g < gt_segs.size(); ++g)
        if (w.gt_area[g] > 0) sem[gt_segs[g].category][1] += w.gt_area[g];
    for (const auto& [key, inter] : w.inter) {
        const int p = static_cast<int>(key / gt_segs.size());
        const int g = static_cast<int>(key % gt_segs.size());
        if (pred_segs[p].category == gt_segs[g].category)
            sem[pred_segs[p].category][2] += inter;
    }
    StqReport rep;
    if (sem.empty()) {
        rep.sq = 1.0;
    } else {
        double sq_sum = 0.0;
        for (const auto& [c, a] : sem) {
            const uint64_t uni = a[0] + a[1] - a[2];
            sq_sum += uni == 0 ? 0.0 : static_cast<double>(a[2]) / uni;
        }
        rep.sq = sq_sum / static_cast<double>(sem.size());
    }

    // AQ: association over thing tubes, ignoring classes.
    double aq_sum = 0.0;
    int n_gt_tubes = 0;
    for (std::size_t g = 0; g < gt_segs.size(); ++g) {
        if (!gt_segs[g].is_thing || w.gt_area[g] == 0) continue;
        ++n_gt_tubes;
        double acc = 0.0;
        for (std::size_t p = 0; p < pred_segs.size(); ++p) {
            if (!pred_segs[p].is_thing) continue;
            const auto it = std::lower_bound(
                w.inter.begin(), w.inter.end(),
                std::make_pair(idx.key(static_cast<int>(p), static_cast<int>(g)), uint64_t{0}));
            if (it == w.inter.end() ||
                it->first != idx.key(static_cast<int>(p), static_cast<int>(g)))
                continue;
            const uint64_t tpa = it->second;
            if (tpa == 0) continue;
            const double iou_id =
                static_cast<double>(tpa) / (w.pred_area[p] + w.gt_area[g] - tpa);
            acc += (static_cast<double>(tpa) / w.gt_area[g]) * iou_id;
        }
        aq_sum += acc;
    }
    rep.aq = n_gt_tubes == 0 ? 1.0 : aq_sum / n_gt_tubes;
    rep.stq = std::sqrt(rep.aq * rep.sq);
    return rep;
}

}  // namespace panens
