#pragma once

#include <filesystem>
#include <optional>

#include "vct/volume.hpp"

namespace vct {

inline constexpr float kHuMin = -1024.0f;
inline constexpr float kHuMax = 3071.0f;

/// Loads a CTV header (`*.ctv.json`) or an uncompressed NIfTI-1 file (`*.nii`).
/// HU volumes are clamped to [kHuMin, kHuMax]; NIfTI data is reoriented to RAS.
Volume load_volume(const std::filesystem::path& path);

/// Writes `path` (a `*.ctv.json` header) and its raw payload next to it.
void save_volume(const Volume& vol, const std::filesystem::path& path);

/// NIfTI carries no label kind; `kind_hint` selects it and the default class table.
LabelMap load_labelmap(const std::filesystem::path& path,
                       std::optional<LabelKind> kind_hint = std::nullopt);

void save_labelmap(const LabelMap& map, const std::filesystem::path& path);

/// Raw payload file name used by save_* for a header path: `a/b.ctv.json` -> `b.raw`.
std::string raw_name_for(const std::filesystem::path& header);

}  // namespace vct
