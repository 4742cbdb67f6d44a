#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panens/ensemble.hpp"
#include "panens/synth.hpp"

namespace panens {

/// One scene entry of a JSON spec file: the scene itself plus the optional
/// corruption and augmentation applied to the emitted prediction.
struct SceneBuild {
    SceneSpec scene;
    std::optional<CorruptionSpec> corruption;
    std::optional<AugmentationSpec> augmentation;  // native_dims set for rescale
    std::string source_tag = "original";
    bool shuffle_queries = true;
};

/// Parses either a single scene object or {"scenes": [...]}.
/// Throws SpecInvalid with a message naming the offending field.
std::vector<SceneBuild> parse_scene_builds(const std::string& json_text);

std::vector<SceneBuild> load_scene_builds(const std::string& path);

}  // namespace panens
