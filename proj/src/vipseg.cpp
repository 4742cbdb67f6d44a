#include "panens/vipseg.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace panens::vipseg {

namespace {
using nlohmann::json;
}

AnnotationIndex parse_annotations(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("vipseg annotations: not valid JSON: ") + e.what());
    }

    AnnotationIndex out;
    try {
        // Category ids in the wild are arbitrary; remap them onto the
        // contiguous table the rest of the toolkit expects.
        std::map<int, int> remap;
        for (const auto& c : j.at("categories")) {
            const int raw = c.at("id").get<int>();
            const bool is_thing = c.at("isthing").get<int>() != 0;
            remap[raw] = static_cast<int>(out.categories.entries.size());
            out.categories.entries.push_back(
                {static_cast<int>(out.categories.entries.size()), is_thing});
        }
        out.categories.validate();

        for (const auto& v : j.at("videos")) {
            VideoInfo info;
            info.video_id = v.at("video_id").get<std::string>();
            if (v.contains("images")) info.num_frames = static_cast<int>(v.at("images").size());
            std::map<int, int> seen;  // segment id -> category
            if (v.contains("annotations")) {
                for (const auto& a : v.at("annotations")) {
                    for (const auto& s : a.at("segments_info")) {
                        const int sid = s.at("id").get<int>();
                        const int raw_cat = s.at("category_id").get<int>();
                        const auto it = remap.find(raw_cat);
                        if (it == remap.end())
                            throw FormatError("vipseg annotations: segment category " +
                                              std::to_string(raw_cat) + " not in categories");
                        seen.emplace(sid, it->second);
                    }
                }
            }
            for (const auto& [sid, cat] : seen) info.segments.push_back({sid, cat});
            out.videos.push_back(std::move(info));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("vipseg annotations: field error: ") + e.what());
    }
    return out;
}

AnnotationIndex read_annotations(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open vipseg annotations: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_annotations(ss.str());
}

}  // namespace panens::vipseg
