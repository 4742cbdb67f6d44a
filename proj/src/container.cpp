#include "panens/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

namespace panens {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'P', 'A', 'N', 'E', 'N', 'S', 'C', '1'};
constexpr int kVersion = 1;

struct ByteWriter {
    std::vector<uint8_t> buf;

    void u16(uint16_t v) {
        buf.push_back(v & 0xFF);
        buf.push_back(v >> 8);
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back((v >> (8 * i)) & 0xFF);
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back((v >> (8 * i)) & 0xFF);
    }
    void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    }
};

struct ByteReader {
    const uint8_t* p;
    std::size_t n;
    std::size_t pos = 0;

    void need(std::size_t k) const {
        if (pos + k > n) throw FormatError("container truncated");
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(p[pos] | (p[pos + 1] << 8));
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    bool done() const { return pos == n; }
};

void put_rle(ByteWriter& w, const BinaryMask& m) {
    w.u32(static_cast<uint32_t>(m.runs.size()));
    for (uint32_t r : m.runs) w.u32(r);
}

BinaryMask get_rle(ByteReader& r, Dims dims) {
    BinaryMask m;
    m.dims = dims;
    const uint32_t count = r.u32();
    m.runs.resize(count);
    for (uint32_t i = 0; i < count; ++i) m.runs[i] = r.u32();
    uint64_t sum = 0;
    for (uint32_t v : m.runs) sum += v;
    if (sum != dims.count()) throw FormatError("rle payload does not cover the grid");
    return m;
}

json categories_to_json(const CategoryTable& t) {
    json arr = json::array();
    for (const CategoryEntry& e : t.entries) arr.push_back({{"id", e.id}, {"isthing", e.is_thing}});
    return arr;
}

CategoryTable categories_from_json(const json& arr) {
    CategoryTable t;
    for (const auto& e : arr)
        t.entries.push_back({e.at("id").get<int>(), e.at("isthing").get<bool>()});
    t.validate();
    return t;
}

struct Section {
    std::string name;
    std::vector<uint8_t> bytes;
};

std::vector<uint8_t> assemble(json manifest, std::vector<Section> sections) {
    json sec_json = json::array();
    uint64_t offset = 0;
    for (const Section& s : sections) {
        sec_json.push_back({{"name", s.name}, {"offset", offset}, {"length", s.bytes.size()}});
        offset += 8 + s.bytes.size();
    }
    manifest["sections"] = std::move(sec_json);
    const std::string mtext = manifest.dump();

    ByteWriter w;
    w.raw(kMagic, sizeof(kMagic));
    w.u32(static_cast<uint32_t>(mtext.size()));
    w.raw(mtext.data(), mtext.size());
    for (const Section& s : sections) {
        w.u64(s.bytes.size());
        w.raw(s.bytes.data(), s.bytes.size());
    }
    return std::move(w.buf);
}

json base_manifest(ContainerKind kind, const std::string& video_id, Dims dims, int frames,
                   const CategoryTable& cats) {
    return json{{"version", kVersion},
                {"kind", container_kind_name(kind)},
                {"video_id", video_id},
                {"height", dims.height},
                {"width", dims.width},
                {"frames", frames},
                {"categories", categories_to_json(cats)}};
}

json augmentation_to_json(const AugmentationSpec& a) {
    return json{{"kind", aug_kind_name(a.kind)}};
}

// Sections of the on-disk stream, keyed by name; offsets already verified.
std::map<std::string, ByteReader> index_sections(const json& manifest, const uint8_t* payload,
                                                 std::size_t payload_size) {
    std::map<std::string, ByteReader> out;
    uint64_t expect_offset = 0;
    for (const auto& s : manifest.at("sections")) {
        const std::string name = s.at("name").get<std::string>();
        const uint64_t offset = s.at("offset").get<uint64_t>();
        const uint64_t length = s.at("length").get<uint64_t>();
        if (offset != expect_offset)
            throw FormatError("section '" + name + "' offset inconsistent with payload");
        if (offset + 8 + length > payload_size)
            throw FormatError("section '" + name + "' exceeds payload");
        ByteReader prefix{payload + offset, 8};
        if (prefix.u64() != length)
            throw FormatError("section '" + name + "' length prefix mismatch");
        out.emplace(name, ByteReader{payload + offset + 8, static_cast<std::size_t>(length)});
        expect_offset = offset + 8 + length;
    }
    if (expect_offset != payload_size) throw FormatError("trailing bytes after last section");
    return out;
}

ByteReader& section(std::map<std::string, ByteReader>& secs, const std::string& name) {
    auto it = secs.find(name);
    if (it == secs.end()) throw FormatError("missing section '" + name + "'");
    return it->second;
}

AugmentationSpec augmentation_from_manifest(const json& m, Dims dims) {
    AugmentationSpec a{AugKind::identity, dims};
    if (m.contains("augmentation"))
        a.kind = aug_kind_from_name(m.at("augmentation").at("kind").get<std::string>());
    return a;
}

// --- per-kind serializers -------------------------------------------------

std::vector<uint8_t> serialize_frame_queries(const FrameQueriesPayload& p) {
    const int t_len = static_cast<int>(p.frames.size());
    const std::size_t n = t_len == 0 ? 0 : p.frames.front().queries.size();
    json manifest = base_manifest(ContainerKind::frame_queries, p.video_id, p.dims, t_len,
                                  p.categories);
    manifest["queries_per_frame"] = n;
    manifest["augmentation"] = augmentation_to_json(p.augmentation);
    manifest["source"] = p.source_tag;

    Section grids{"mask_logits", {}};
    Section classes{"class_logits", {}};
    ByteWriter gw, cw;
    for (const FrameQuerySet& f : p.frames) {
        if (f.queries.size() != n)
            throw FormatError("frame query container requires a uniform query count");
        for (const FrameQuery& q : f.queries) {
            if (q.class_logits.size() != static_cast<std::size_t>(p.categories.count()) + 1)
                throw FormatError("query class logits differ from category count + 1");
            for (float v : q.mask_logits.values) gw.f32(v);
            for (float v : q.class_logits) cw.f32(v);
        }
    }
    grids.bytes = std::move(gw.buf);
    classes.bytes = std::move(cw.buf);
    return assemble(std::move(manifest), {std::move(grids), std::move(classes)});
}

FrameQueriesPayload parse_frame_queries(const json& m,
                                        std::map<std::string, ByteReader>& secs) {
    FrameQueriesPayload p;
    p.video_id = m.at("video_id").get<std::string>();
    p.dims = {m.at("height").get<int>(), m.at("width").get<int>()};
    const int t_len = m.at("frames").get<int>();
    const std::size_t n = m.at("queries_per_frame").get<std::size_t>();
    p.categories = categories_from_json(m.at("categories"));
    p.augmentation = augmentation_from_manifest(m, p.dims);
    p.source_tag = m.value("source", "original");
    const std::size_t class_len = static_cast<std::size_t>(p.categories.count()) + 1;

    ByteReader& gr = section(secs, "mask_logits");
    ByteReader& cr = section(secs, "class_logits");
    p.frames.resize(t_len);
    for (int t = 0; t < t_len; ++t) {
        p.frames[t].frame_index = t;
        p.frames[t].queries.resize(n);
        for (std::size_t q = 0; q < n; ++q) {
            FrameQuery& fq = p.frames[t].queries[q];
            fq.mask_logits.dims = p.dims;
            fq.mask_logits.values.resize(p.dims.count());
            for (float& v : fq.mask_logits.values) v = gr.f32();
            fq.class_logits.resize(class_len);
            for (float& v : fq.class_logits) v = cr.f32();
        }
    }
    if (!gr.done() || !cr.done()) throw FormatError("frame query sections have trailing bytes");
    return p;
}

std::vector<uint8_t> serialize_track_set(const TrackSetPayload& p) {
    const TrackSet& ts = p.tracks;
    json manifest =
        base_manifest(ContainerKind::track_set, ts.video_id, ts.dims, ts.length, p.categories);
    manifest["augmentation"] = augmentation_to_json(p.augmentation);
    json tracks = json::array();
    for (const QueryTrack& t : ts.tracks)
        tracks.push_back({{"id", t.track_id}, {"source", t.source_tag}});
    manifest["tracks"] = std::move(tracks);

    Section grids{"mask_logits", {}};
    Section classes{"class_logits", {}};
    ByteWriter gw, cw;
    for (const QueryTrack& t : ts.tracks) {
        if (t.mask_logits.size() != static_cast<std::size_t>(ts.length))
            throw FormatError("track grid count differs from video length");
        if (t.class_logits.size() != static_cast<std::size_t>(p.categories.count()) + 1)
            throw FormatError("track class logits differ from category count + 1");
        for (const LogitGrid& g : t.mask_logits)
            for (float v : g.values) gw.f32(v);
        for (float v : t.class_logits) cw.f32(v);
    }
    grids.bytes = std::move(gw.buf);
    classes.bytes = std::move(cw.buf);
    return assemble(std::move(manifest), {std::move(grids), std::move(classes)});
}

TrackSetPayload parse_track_set(const json& m, std::map<std::string, ByteReader>& secs) {
    TrackSetPayload p;
    p.tracks.video_id = m.at("video_id").get<std::string>();
    p.tracks.dims = {m.at("height").get<int>(), m.at("width").get<int>()};
    p.tracks.length = m.at("frames").get<int>();
    p.categories = categories_from_json(m.at("categories"));
    p.augmentation = augmentation_from_manifest(m, p.tracks.dims);
    const std::size_t class_len = static_cast<std::size_t>(p.categories.count()) + 1;

    ByteReader& gr = section(secs, "mask_logits");
    ByteReader& cr = section(secs, "class_logits");
    for (const auto& tj : m.at("tracks")) {
        QueryTrack t;
        t.track_id = tj.at("id").get<uint32_t>();
        t.source_tag = tj.at("source").get<std::string>();
        t.mask_logits.resize(p.tracks.length);
        for (LogitGrid& g : t.mask_logits) {
            g.dims = p.tracks.dims;
            g.values.resize(p.tracks.dims.count());
            for (float& v : g.values) v = gr.f32();
        }
        t.class_logits.resize(class_len);
        for (float& v : t.class_logits) v = cr.f32();
        p.tracks.tracks.push_back(std::move(t));
    }
    if (!gr.done() || !cr.done()) throw FormatError("track sections have trailing bytes");
    return p;
}

std::vector<uint8_t> serialize_panoptic(const PanopticPayload& p) {
    const PanopticVideo& v = p.video;
    json manifest = base_manifest(ContainerKind::panoptic, v.video_id, v.dims,
                                  static_cast<int>(v.frames.size()), p.categories);
    json segs = json::array();
    for (const SegmentInfo& s : v.segments)
        segs.push_back({{"id", s.id},
                        {"category", s.category},
                        {"isthing", s.is_thing},
                        {"instance", s.instance}});
    manifest["segments"] = std::move(segs);

    Section sem{"semantic", {}};
    Section inst{"instance", {}};
    ByteWriter sw, iw;
    for (const PanopticFrame& f : v.frames) {
        for (uint16_t x : f.semantic) sw.u16(x);
        for (uint16_t x : f.instance) iw.u16(x);
    }
    sem.bytes = std::move(sw.buf);
    inst.bytes = std::move(iw.buf);
    return assemble(std::move(manifest), {std::move(sem), std::move(inst)});
}

PanopticPayload parse_panoptic(const json& m, std::map<std::string, ByteReader>& secs) {
    PanopticPayload p;
    p.video.video_id = m.at("video_id").get<std::string>();
    p.video.dims = {m.at("height").get<int>(), m.at("width").get<int>()};
    const int t_len = m.at("frames").get<int>();
    p.categories = categories_from_json(m.at("categories"));
    for (const auto& sj : m.at("segments"))
        p.video.segments.push_back({sj.at("id").get<uint32_t>(), sj.at("category").get<int>(),
                                    sj.at("isthing").get<bool>(),
                                    sj.at("instance").get<uint16_t>()});

    ByteReader& sr = section(secs, "semantic");
    ByteReader& ir = section(secs, "instance");
    p.video.frames.resize(t_len);
    for (PanopticFrame& f : p.video.frames) {
        f.dims = p.video.dims;
        f.semantic.resize(p.video.dims.count());
        f.instance.resize(p.video.dims.count());
        for (uint16_t& x : f.semantic) x = sr.u16();
        for (uint16_t& x : f.instance) x = ir.u16();
    }
    if (!sr.done() || !ir.done()) throw FormatError("panoptic sections have trailing bytes");
    return p;
}

std::vector<uint8_t> serialize_ground_truth(const GroundTruthPayload& p) {
    const GroundTruthVideo& gt = p.gt;
    json manifest = base_manifest(ContainerKind::ground_truth, gt.video_id, gt.dims, gt.length,
                                  gt.categories);
    json segs = json::array();
    for (const GtSegment& s : gt.segments)
        segs.push_back({{"id", s.id}, {"category", s.category}, {"isthing", s.is_thing}});
    manifest["segments"] = std::move(segs);

    Section seg_rle{"segment_rle", {}};
    Section void_rle{"void_rle", {}};
    ByteWriter sw, vw;
    for (const GtSegment& s : gt.segments)
        for (const BinaryMask& m2 : s.frames) put_rle(sw, m2);
    for (const BinaryMask& m2 : gt.void_masks) put_rle(vw, m2);
    seg_rle.bytes = std::move(sw.buf);
    void_rle.bytes = std::move(vw.buf);
    return assemble(std::move(manifest), {std::move(seg_rle), std::move(void_rle)});
}

GroundTruthPayload parse_ground_truth(const json& m, std::map<std::string, ByteReader>& secs) {
    GroundTruthPayload p;
    p.gt.video_id = m.at("video_id").get<std::string>();
    p.gt.dims = {m.at("height").get<int>(), m.at("width").get<int>()};
    p.gt.length = m.at("frames").get<int>();
    p.gt.categories = categories_from_json(m.at("categories"));

    ByteReader& sr = section(secs, "segment_rle");
    ByteReader& vr = section(secs, "void_rle");
    for (const auto& sj : m.at("segments")) {
        GtSegment s;
        s.id = sj.at("id").get<uint32_t>();
        s.category = sj.at("category").get<int>();
        s.is_thing = sj.at("isthing").get<bool>();
        for (int t = 0; t < p.gt.length; ++t) s.frames.push_back(get_rle(sr, p.gt.dims));
        p.gt.segments.push_back(std::move(s));
    }
    while (!vr.done()) p.gt.void_masks.push_back(get_rle(vr, p.gt.dims));
    if (!p.gt.void_masks.empty() &&
        p.gt.void_masks.size() != static_cast<std::size_t>(p.gt.length))
        throw FormatError("void rle count differs from video length");
    if (!sr.done()) throw FormatError("ground truth sections have trailing bytes");
    return p;
}

}  // namespace

const char* container_kind_name(ContainerKind k) {
    switch (k) {
        case ContainerKind::frame_queries: return "frame_queries";
        case ContainerKind::track_set: return "track_set";
        case ContainerKind::panoptic: return "panoptic";
        case ContainerKind::ground_truth: return "ground_truth";
    }
    return "?";
}

ContainerKind payload_kind(const ContainerPayload& p) {
    return static_cast<ContainerKind>(p.index());
}

std::vector<uint8_t> serialize_container(const ContainerPayload& payload) {
    switch (payload_kind(payload)) {
        case ContainerKind::frame_queries:
            return serialize_frame_queries(std::get<FrameQueriesPayload>(payload));
        case ContainerKind::track_set:
            return serialize_track_set(std::get<TrackSetPayload>(payload));
        case ContainerKind::panoptic:
            return serialize_panoptic(std::get<PanopticPayload>(payload));
        case ContainerKind::ground_truth:
            return serialize_ground_truth(std::get<GroundTruthPayload>(payload));
    }
    throw FormatError("unknown payload kind");
}

ContainerPayload parse_container(const uint8_t* data, std::size_t size) {
    if (size < sizeof(kMagic) + 4 || std::memcmp(data, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("not a panens container (bad magic)");
    ByteReader head{data, size};
    head.pos = sizeof(kMagic);
    const uint32_t mlen = head.u32();
    head.need(mlen);

    json manifest;
    try {
        manifest = json::parse(data + head.pos, data + head.pos + mlen);
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!manifest.contains("version")) throw FormatError("manifest missing version field");
    if (manifest.at("version").get<int>() != kVersion)
        throw FormatError("unsupported container version");

    const uint8_t* payload = data + head.pos + mlen;
    const std::size_t payload_size = size - head.pos - mlen;
    auto secs = index_sections(manifest, payload, payload_size);

    const std::string kind = manifest.at("kind").get<std::string>();
    try {
        if (kind == "frame_queries") return parse_frame_queries(manifest, secs);
        if (kind == "track_set") return parse_track_set(manifest, secs);
        if (kind == "panoptic") return parse_panoptic(manifest, secs);
        if (kind == "ground_truth") return parse_ground_truth(manifest, secs);
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest field error: ") + e.what());
    }
    throw FormatError("unknown container kind '" + kind + "'");
}

void write_container(const std::string& path, const ContainerPayload& payload) {
    const std::vector<uint8_t> bytes = serialize_container(payload);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (!f) throw IoError("write failed: " + path);
}

ContainerPayload read_container(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw IoError("cannot open: " + path);
    const std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<uint8_t> bytes(static_cast<std::size_t>(size));
    f.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!f) throw IoError("read failed: " + path);
    return parse_container(bytes.data(), bytes.size());
}

}  // namespace panens
