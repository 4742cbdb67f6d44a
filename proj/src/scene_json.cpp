#include "panens/scene_json.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace panens {

namespace {

using nlohmann::json;

int get_int(const json& j, const char* field, int fallback) {
    if (!j.contains(field)) return fallback;
    if (!j.at(field).is_number_integer())
        throw SpecInvalid(std::string(field) + ": must be an integer");
    return j.at(field).get<int>();
}

double get_num(const json& j, const char* field, double fallback) {
    if (!j.contains(field)) return fallback;
    if (!j.at(field).is_number()) throw SpecInvalid(std::string(field) + ": must be a number");
    return j.at(field).get<double>();
}

CorruptionSpec corruption_from_json(const json& j) {
    CorruptionSpec c;
    c.drop_track_prob = get_num(j, "drop_track_prob", 0.0);
    c.boundary_jitter_px = get_int(j, "boundary_jitter_px", 0);
    c.logit_noise_sigma = get_num(j, "logit_noise_sigma", 0.0);
    c.class_confusion_prob = get_num(j, "class_confusion_prob", 0.0);
    if (j.contains("id_swap_at_frame")) c.id_swap_at_frame = get_int(j, "id_swap_at_frame", 0);
    c.validate();
    return c;
}

SceneBuild build_from_json(const json& j, std::size_t index) {
    if (!j.is_object()) throw SpecInvalid("scene entry must be a JSON object");
    SceneBuild b;
    SceneSpec& s = b.scene;
    s.video_id = j.value("video_id", "scene-" + std::to_string(index));
    if (j.contains("seed")) s.seed = j.at("seed").get<uint64_t>();
    s.dims.height = get_int(j, "height", s.dims.height);
    s.dims.width = get_int(j, "width", s.dims.width);
    s.frames = get_int(j, "frames", s.frames);
    s.n_things = get_int(j, "things", s.n_things);
    s.n_stuff_bands = get_int(j, "stuff_bands", s.n_stuff_bands);
    s.thing_categories = get_int(j, "thing_categories", s.thing_categories);
    s.stuff_categories = get_int(j, "stuff_categories", s.stuff_categories);
    if (j.contains("motion")) {
        for (const auto& m : j.at("motion")) {
            if (!m.is_array() || m.size() != 2) throw SpecInvalid("motion: entries must be [dx, dy]");
            s.motion.emplace_back(m[0].get<double>(), m[1].get<double>());
        }
    }
    if (j.contains("thing_category_ids"))
        s.thing_category_ids = j.at("thing_category_ids").get<std::vector<int>>();
    if (j.contains("band_category_ids"))
        s.band_category_ids = j.at("band_category_ids").get<std::vector<int>>();
    s.validate();

    if (j.contains("corruption")) b.corruption = corruption_from_json(j.at("corruption"));
    if (j.contains("augmentation")) {
        const json& a = j.at("augmentation");
        AugmentationSpec spec;
        spec.kind = aug_kind_from_name(a.at("kind").get<std::string>());
        spec.native_dims = s.dims;
        if (spec.kind == AugKind::rescale) {
            spec.native_dims.height = get_int(a, "height", 0);
            spec.native_dims.width = get_int(a, "width", 0);
            if (!spec.native_dims.valid())
                throw SpecInvalid("augmentation: rescale requires height and width");
        }
        b.augmentation = spec;
    }
    b.source_tag = j.value("source", std::string("original"));
    b.shuffle_queries = j.value("shuffle_queries", true);
    return b;
}

}  // namespace

std::vector<SceneBuild> parse_scene_builds(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SpecInvalid(std::string("scene spec is not valid JSON: ") + e.what());
    }
    std::vector<SceneBuild> out;
    try {
        if (j.contains("scenes")) {
            std::size_t i = 0;
            for (const auto& entry : j.at("scenes")) out.push_back(build_from_json(entry, i++));
        } else {
            out.push_back(build_from_json(j, 0));
        }
    } catch (const json::exception& e) {
        throw SpecInvalid(std::string("scene spec field error: ") + e.what());
    }
    if (out.empty()) throw SpecInvalid("scenes: list is empty");
    return out;
}

std::vector<SceneBuild> load_scene_builds(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open scene spec: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_scene_builds(ss.str());
}

}  // namespace panens
