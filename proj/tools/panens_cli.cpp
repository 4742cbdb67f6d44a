// panens: video panoptic post-processing pipeline.
// Stages: synth -> track -> ensemble -> fuse -> eval / render, all speaking
// the same container format. Every subcommand accepts either single files or
// directories of containers; --jobs fans out over videos.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "panens/container.hpp"
#include "panens/ensemble.hpp"
#include "panens/fusion.hpp"
#include "panens/log.hpp"
#include "panens/metrics.hpp"
#include "panens/rng.hpp"
#include "panens/scene_json.hpp"
#include "panens/synth.hpp"
#include "panens/tracker.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace panens;

namespace {

// Single-line machine-parsable diagnostic, then the matching exit code.
[[noreturn]] void die(const std::string& kind, const std::string& msg, int code) {
    std::fprintf(stderr, "panens-error: kind=%s exit=%d msg=\"%s\"\n", kind.c_str(), code,
                 msg.c_str());
    std::exit(code);
}

int exit_code_for(const Error& e) { return e.kind() == "IoError" ? 3 : 2; }

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const Error& e) {
        die(e.kind(), e.what(), exit_code_for(e));
    } catch (const std::exception& e) {
        die("Unhandled", e.what(), 4);
    }
}

std::vector<std::string> collect_containers(const std::string& path) {
    if (!fs::exists(path)) throw IoError("no such path: " + path);
    if (!fs::is_directory(path)) return {path};
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_regular_file() && entry.path().extension() == ".pv")
            out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw IoError("no .pv containers in directory: " + path);
    return out;
}

// Run items[0..n) on `jobs` threads. Exceptions surface after the pool joins;
// results must be written into per-index slots by fn for determinism.
template <typename Fn>
void parallel_items(std::size_t n, int jobs, Fn&& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string out_path_for(const std::string& in_file, const std::string& out,
                         bool out_is_dir, const std::string& suffix) {
    if (!out_is_dir) return out;
    fs::create_directories(out);
    std::string stem = fs::path(in_file).stem().string();
    // Drop a trailing stage tag like ".pred" so names stay readable.
    const auto dot = stem.rfind('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    return (fs::path(out) / (stem + suffix)).string();
}

// --- synth ------------------------------------------------------------------

struct SynthOpts {
    std::string spec_path;
    std::string out_dir;
    bool emit_tracks = false;
    std::optional<uint64_t> seed;
    int jobs = 1;
};

TrackSet apply_augmentation(const TrackSet& ts, const AugmentationSpec& aug) {
    TrackSet out = ts;
    switch (aug.kind) {
        case AugKind::identity:
            break;
        case AugKind::hflip:
            for (QueryTrack& tr : out.tracks)
                for (LogitGrid& g : tr.mask_logits) g = hflip(g);
            break;
        case AugKind::rescale:
            for (QueryTrack& tr : out.tracks)
                for (LogitGrid& g : tr.mask_logits) g = resize_bilinear(g, aug.native_dims);
            out.dims = aug.native_dims;
            break;
    }
    return out;
}

void run_synth(const SynthOpts& opts) {
    auto builds = load_scene_builds(opts.spec_path);
    fs::create_directories(opts.out_dir);

    parallel_items(builds.size(), opts.jobs, [&](std::size_t i) {
        SceneBuild& build = builds[i];
        if (opts.seed) build.scene.seed ^= *opts.seed;  // CLI seed perturbs the spec seed
        const Scene scene = generate(build.scene);

        TrackSet pred = scene.ideal;
        if (build.corruption)
            pred = corrupt(pred, *build.corruption, build.scene.seed ^ 0xC0221157ULL);
        for (QueryTrack& tr : pred.tracks) tr.source_tag = build.source_tag;

        AugmentationSpec aug{AugKind::identity, pred.dims};
        if (build.augmentation) aug = *build.augmentation;
        pred = apply_augmentation(pred, aug);

        const fs::path base = fs::path(opts.out_dir) / build.scene.video_id;
        write_container(base.string() + ".gt.pv", GroundTruthPayload{scene.gt});

        FrameQueriesPayload fq;
        fq.video_id = build.scene.video_id;
        fq.dims = pred.dims;
        fq.categories = scene.categories;
        fq.augmentation = aug;
        fq.source_tag = build.source_tag;
        fq.frames = slice_tracks(pred, build.shuffle_queries, build.scene.seed ^ 0x5u);
        write_container(base.string() + ".pred.pv", fq);

        if (opts.emit_tracks)
            write_container(base.string() + ".tracks.pv",
                            TrackSetPayload{pred, scene.categories, aug});
        log::info("synth " + build.scene.video_id + ": " +
                  std::to_string(scene.ideal.tracks.size()) + " tracks, " +
                  std::to_string(scene.gt.segments.size()) + " gt segments");
    });
}

// --- track ------------------------------------------------------------------

void run_track(const std::string& in, const std::string& out, int jobs) {
    const auto files = collect_containers(in);
    const bool out_is_dir = files.size() > 1 || fs::is_directory(in);
    parallel_items(files.size(), jobs, [&](std::size_t i) {
        const ContainerPayload payload = read_container(files[i]);
        const auto* fq = std::get_if<FrameQueriesPayload>(&payload);
        if (!fq) {
            log::debug("track: skipping non frame-query container " + files[i]);
            return;
        }
        TrackSet ts = build_tracks(fq->frames, fq->video_id);
        for (QueryTrack& tr : ts.tracks) tr.source_tag = fq->source_tag;
        const std::string dst = out_path_for(files[i], out, out_is_dir, ".tracks.pv");
        write_container(dst, TrackSetPayload{ts, fq->categories, fq->augmentation});
        log::info("track " + fq->video_id + ": " + std::to_string(ts.tracks.size()) +
                  " tracks -> " + dst);
    });
}

// --- ensemble ---------------------------------------------------------------

struct MemberArg {
    std::string path;
    std::optional<AugKind> kind_override;
};

MemberArg parse_member_arg(const std::string& arg) {
    MemberArg m;
    const auto colon = arg.rfind(':');
    if (colon != std::string::npos && fs::exists(arg.substr(0, colon))) {
        m.path = arg.substr(0, colon);
        m.kind_override = aug_kind_from_name(arg.substr(colon + 1));
    } else {
        m.path = arg;
    }
    return m;
}

TrackSetPayload load_track_payload(const std::string& path) {
    ContainerPayload payload = read_container(path);
    if (auto* ts = std::get_if<TrackSetPayload>(&payload)) return std::move(*ts);
    throw FormatError("expected a track_set container: " + path);
}

void run_ensemble(const std::string& ref, const std::vector<std::string>& member_args,
                  const std::string& out, const EnsembleConfig& cfg, int jobs) {
    const auto ref_files = collect_containers(ref);
    const bool dir_mode = fs::is_directory(ref);

    std::vector<MemberArg> members;
    for (const std::string& a : member_args) members.push_back(parse_member_arg(a));

    // In directory mode every member argument is a directory holding one
    // container per video, matched to the reference by video_id.
    std::vector<std::map<std::string, std::string>> member_index(members.size());
    if (dir_mode) {
        for (std::size_t m = 0; m < members.size(); ++m)
            for (const std::string& f : collect_containers(members[m].path))
                member_index[m][load_track_payload(f).tracks.video_id] = f;
    }

    parallel_items(ref_files.size(), jobs, [&](std::size_t i) {
        TrackSetPayload reference = load_track_payload(ref_files[i]);
        const std::string vid = reference.tracks.video_id;

        std::vector<std::pair<TrackSet, AugmentationSpec>> aligned_members;
        for (std::size_t m = 0; m < members.size(); ++m) {
            std::string path;
            if (dir_mode) {
                const auto it = member_index[m].find(vid);
                if (it == member_index[m].end())
                    throw FormatError("member " + members[m].path +
                                      " has no container for video '" + vid + "'");
                path = it->second;
            } else {
                path = members[m].path;
            }
            TrackSetPayload loaded = load_track_payload(path);
            AugmentationSpec spec = loaded.augmentation;
            if (members[m].kind_override) spec.kind = *members[m].kind_override;
            spec.native_dims = loaded.tracks.dims;
            aligned_members.emplace_back(std::move(loaded.tracks), spec);
        }

        std::vector<MergeStats> stats;
        const TrackSet merged =
            ensemble_pipeline(reference.tracks, aligned_members, cfg, &stats);
        for (std::size_t m = 0; m < stats.size(); ++m)
            log::info("ensemble " + vid + " member " + std::to_string(m) + ": " +
                      std::to_string(stats[m].merged) + " merged, " +
                      std::to_string(stats[m].appended) + " appended");

        const std::string dst = out_path_for(ref_files[i], out, dir_mode, ".merged.pv");
        write_container(dst, TrackSetPayload{merged, reference.categories,
                                             {AugKind::identity, merged.dims}});
    });
}

// --- fuse -------------------------------------------------------------------

void run_fuse(const std::string& in, const std::string& out, const FusionConfig& cfg,
              int jobs) {
    cfg.validate();
    const auto files = collect_containers(in);
    const bool out_is_dir = files.size() > 1 || fs::is_directory(in);
    parallel_items(files.size(), jobs, [&](std::size_t i) {
        const TrackSetPayload ts = load_track_payload(files[i]);
        const PanopticVideo video = fuse(ts.tracks, ts.categories, cfg);
        const std::string dst = out_path_for(files[i], out, out_is_dir, ".panoptic.pv");
        write_container(dst, PanopticPayload{video, ts.categories});
        log::info("fuse " + video.video_id + ": " + std::to_string(video.segments.size()) +
                  " segments -> " + dst);
    });
}

// --- eval -------------------------------------------------------------------

json report_json(const std::string& video_id, const VpqReport& vpq, const StqReport& s) {
    json j;
    j["video_id"] = video_id;
    j["vpq"] = vpq.vpq;
    for (const auto& [k, v] : vpq.vpq_by_k) j["vpq" + std::to_string(k)] = v;
    j["stq"] = s.stq;
    j["aq"] = s.aq;
    j["sq"] = s.sq;
    json pct;
    pct["vpq"] = vpq.vpq * 100.0;
    for (const auto& [k, v] : vpq.vpq_by_k) pct["vpq" + std::to_string(k)] = v * 100.0;
    pct["stq"] = s.stq * 100.0;
    j["percent"] = std::move(pct);
    json cats = json::array();
    for (const CategoryPq& c : vpq.per_category)
        cats.push_back({{"category", c.category},
                        {"pq", c.pq},
                        {"iou_sum", c.iou_sum},
                        {"tp", c.tp},
                        {"fp", c.fp},
                        {"fn", c.fn}});
    j["per_category"] = std::move(cats);
    return j;
}

void run_eval(const std::string& pred, const std::string& gt,
              const std::vector<int>& windows, const std::string& out_file, int jobs) {
    if (windows.empty()) throw InvalidWindow("windows: list is empty");
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i] < 1) throw InvalidWindow("windows: lengths must be positive");
        if (i > 0 && windows[i] <= windows[i - 1])
            throw InvalidWindow("windows: list must be strictly increasing");
    }

    const auto pred_files = collect_containers(pred);
    const bool dir_mode = fs::is_directory(pred);

    std::map<std::string, std::string> gt_by_vid;
    if (dir_mode) {
        for (const std::string& f : collect_containers(gt)) {
            ContainerPayload p = read_container(f);
            if (auto* g = std::get_if<GroundTruthPayload>(&p))
                gt_by_vid[g->gt.video_id] = f;
        }
    }

    std::vector<json> reports(pred_files.size());
    parallel_items(pred_files.size(), jobs, [&](std::size_t i) {
        ContainerPayload pp = read_container(pred_files[i]);
        const auto* pan = std::get_if<PanopticPayload>(&pp);
        if (!pan) throw FormatError("expected a panoptic container: " + pred_files[i]);

        std::string gt_path = gt;
        if (dir_mode) {
            const auto it = gt_by_vid.find(pan->video.video_id);
            if (it == gt_by_vid.end())
                throw FormatError("no ground truth for video '" + pan->video.video_id + "'");
            gt_path = it->second;
        }
        ContainerPayload gp = read_container(gt_path);
        const auto* gtp = std::get_if<GroundTruthPayload>(&gp);
        if (!gtp) throw FormatError("expected a ground_truth container: " + gt_path);

        const VpqReport v = vpq_mean(pan->video, gtp->gt, windows);
        const StqReport s = stq(pan->video, gtp->gt);
        reports[i] = report_json(pan->video.video_id, v, s);
    });

    json out;
    if (reports.size() == 1) {
        out = reports[0];
    } else {
        out["videos"] = reports;
        json mean;
        auto avg = [&](const std::string& key) {
            double sum = 0.0;
            for (const json& r : reports) sum += r.at(key).get<double>();
            return sum / static_cast<double>(reports.size());
        };
        mean["vpq"] = avg("vpq");
        for (int k : windows) mean["vpq" + std::to_string(k)] = avg("vpq" + std::to_string(k));
        mean["stq"] = avg("stq");
        out["mean"] = std::move(mean);
    }

    const std::string text = out.dump(2) + "\n";
    std::fputs(text.c_str(), stdout);
    if (!out_file.empty()) {
        std::ofstream f(out_file, std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + out_file);
        f << text;
    }
}

// --- render -----------------------------------------------------------------

void rgb_for_segment(uint32_t segment_id, uint8_t rgb[3]) {
    Rng rng(0xC0100A00ULL + segment_id);
    const uint64_t h = rng.next_u64();
    // Keep real segments away from the void's black.
    rgb[0] = static_cast<uint8_t>((h & 0xFF) | 0x40);
    rgb[1] = static_cast<uint8_t>(((h >> 8) & 0xFF) | 0x40);
    rgb[2] = static_cast<uint8_t>(((h >> 16) & 0xFF) | 0x40);
}

void run_render(const std::string& in, const std::string& out_dir, int jobs) {
    const auto files = collect_containers(in);
    const bool dir_mode = fs::is_directory(in);
    parallel_items(files.size(), jobs, [&](std::size_t i) {
        ContainerPayload p = read_container(files[i]);
        const auto* pan = std::get_if<PanopticPayload>(&p);
        if (!pan) throw FormatError("expected a panoptic container: " + files[i]);
        const PanopticVideo& v = pan->video;

        fs::path dir = out_dir;
        if (dir_mode) dir /= v.video_id;
        fs::create_directories(dir);

        for (std::size_t t = 0; t < v.frames.size(); ++t) {
            const PanopticFrame& f = v.frames[t];
            std::vector<uint8_t> img(f.semantic.size() * 3, 0);
            for (std::size_t px = 0; px < f.semantic.size(); ++px) {
                const int seg = v.segment_index(f.semantic[px], f.instance[px]);
                if (seg < 0) continue;  // void stays black
                rgb_for_segment(v.segments[seg].id, &img[px * 3]);
            }
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%04zu.ppm", t);
            const fs::path file = dir / name;
            std::ofstream os(file, std::ios::binary | std::ios::trunc);
            if (!os) throw IoError("cannot open for writing: " + file.string());
            os << "P6\n" << v.dims.width << " " << v.dims.height << "\n255\n";
            os.write(reinterpret_cast<const char*>(img.data()),
                     static_cast<std::streamsize>(img.size()));
            if (!os) throw IoError("write failed: " + file.string());
        }
        log::info("render " + v.video_id + ": " + std::to_string(v.frames.size()) +
                  " frames -> " + dir.string());
    });
}

std::vector<int> parse_windows(const std::string& arg) {
    std::vector<int> out;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw InvalidWindow("windows: cannot parse '" + item + "'");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"video panoptic segmentation post-processing pipeline"};
    app.require_subcommand(1);

    int jobs = 1;
    app.add_option("--jobs", jobs, "worker threads across input videos")->capture_default_str();

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate ground truth + predictions");
    SynthOpts synth_opts;
    synth_cmd->add_option("--spec", synth_opts.spec_path, "scene spec JSON")->required();
    synth_cmd->add_option("--out-dir", synth_opts.out_dir, "output directory")->required();
    synth_cmd->add_flag("--emit-tracks", synth_opts.emit_tracks,
                        "also write the ideal track containers");
    uint64_t seed_flag = 0;
    auto* seed_opt = synth_cmd->add_option("--seed", seed_flag, "xor-ed into scene seeds");

    // track
    auto* track_cmd = app.add_subcommand("track", "associate frame queries into tracks");
    std::string track_in, track_out;
    track_cmd->add_option("--in", track_in, "frame-query container or directory")->required();
    track_cmd->add_option("--out", track_out, "output container or directory")->required();

    // ensemble
    auto* ens_cmd = app.add_subcommand("ensemble", "query-wise merge of member track sets");
    std::string ens_ref, ens_out;
    std::vector<std::string> ens_members;
    double iou_threshold = 0.5;
    std::string matching_level = "tube";
    ens_cmd->add_option("--ref", ens_ref, "reference track container or directory")->required();
    ens_cmd->add_option("--member", ens_members,
                        "member container/directory, optionally PATH:kind")
        ->required();
    ens_cmd->add_option("--out", ens_out, "output container or directory")->required();
    ens_cmd->add_option("--iou-threshold", iou_threshold, "merge threshold, strict >")
        ->capture_default_str();
    ens_cmd->add_option("--matching-level", matching_level, "tube | per-frame")
        ->check(CLI::IsMember({"tube", "per-frame"}))
        ->capture_default_str();

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "decode tracks into panoptic labels");
    std::string fuse_in, fuse_out;
    FusionConfig fusion_cfg;
    fuse_cmd->add_option("--in", fuse_in, "track container or directory")->required();
    fuse_cmd->add_option("--out", fuse_out, "output container or directory")->required();
    fuse_cmd->add_option("--min-object-score", fusion_cfg.min_object_score)
        ->capture_default_str();
    fuse_cmd->add_option("--min-pixel-score", fusion_cfg.min_pixel_score)
        ->capture_default_str();
    fuse_cmd->add_option("--min-overlap-ratio", fusion_cfg.min_overlap_ratio)
        ->capture_default_str();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "VPQ / STQ report as JSON");
    std::string eval_pred, eval_gt, eval_out, windows_arg = "1,2,4,6";
    eval_cmd->add_option("--pred", eval_pred, "panoptic container or directory")->required();
    eval_cmd->add_option("--gt", eval_gt, "ground-truth container or directory")->required();
    eval_cmd->add_option("--windows", windows_arg, "comma-separated window lengths")
        ->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "also write the JSON report here");

    // render
    auto* render_cmd = app.add_subcommand("render", "write one PPM per frame");
    std::string render_in, render_out;
    render_cmd->add_option("--in", render_in, "panoptic container or directory")->required();
    render_cmd->add_option("--out-dir", render_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (jobs < 1) die("SpecInvalid", "--jobs must be >= 1", 2);

    if (synth_cmd->parsed()) {
        if (*seed_opt) synth_opts.seed = seed_flag;
        synth_opts.jobs = jobs;
        return guarded([&] { run_synth(synth_opts); });
    }
    if (track_cmd->parsed())
        return guarded([&] { run_track(track_in, track_out, jobs); });
    if (ens_cmd->parsed()) {
        EnsembleConfig cfg;
        cfg.iou_threshold = iou_threshold;
        cfg.matching_level =
            matching_level == "tube" ? MatchingLevel::tube : MatchingLevel::per_frame;
        if (cfg.iou_threshold <= 0.0 || cfg.iou_threshold > 1.0)
            die("SpecInvalid", "--iou-threshold must be in (0, 1]", 2);
        return guarded([&] { run_ensemble(ens_ref, ens_members, ens_out, cfg, jobs); });
    }
    if (fuse_cmd->parsed())
        return guarded([&] { run_fuse(fuse_in, fuse_out, fusion_cfg, jobs); });
    if (eval_cmd->parsed())
        return guarded([&] { run_eval(eval_pred, eval_gt, parse_windows(windows_arg), eval_out, jobs); });
    if (render_cmd->parsed())
        return guarded([&] { run_render(render_in, render_out, jobs); });
    return 0;
}
