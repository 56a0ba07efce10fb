#include "vct/volume.hpp"

#include <vector>

namespace vct {

void Grid::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (dims[i] < 1) throw InvalidArgument("grid dims must be >= 1 on every axis");
    if (!(spacing[i] > 0.0) || !std::isfinite(spacing[i])) {
      throw InvalidArgument("grid spacing must be positive and finite on every axis");
    }
    if (!std::isfinite(origin[i])) throw InvalidArgument("grid origin must be finite");
  }
}

double voxel_volume_mm3(const Grid& grid) {
  grid.validate();
  return grid.spacing[0] * grid.spacing[1] * grid.spacing[2];
}

std::string to_string(DType t) {
  switch (t) {
    case DType::kInt16: return "int16";
    case DType::kUInt8: return "uint8";
    case DType::kUInt16: return "uint16";
    case DType::kFloat32: return "float32";
  }
  return "?";
}

std::string to_string(Unit u) {
  switch (u) {
    case Unit::kHU: return "HU";
    case Unit::kDensity: return "g_per_cm3";
    case Unit::kLabel: return "label";
  }
  return "?";
}

DType parse_dtype(const std::string& s) {
  if (s == "int16") return DType::kInt16;
  if (s == "uint8") return DType::kUInt8;
  if (s == "uint16") return DType::kUInt16;
  if (s == "float32") return DType::kFloat32;
  throw FormatError("unsupported dtype '" + s + "'");
}

Unit parse_unit(const std::string& s) {
  if (s == "HU") return Unit::kHU;
  if (s == "g_per_cm3") return Unit::kDensity;
  if (s == "label") return Unit::kLabel;
  throw FormatError("unknown unit '" + s + "'");
}

std::string to_string(LabelKind k) { return k == LabelKind::kTissue ? "tissue" : "structure"; }

LabelKind parse_label_kind(const std::string& s) {
  if (s == "tissue") return LabelKind::kTissue;
  if (s == "structure") return LabelKind::kStructure;
  throw FormatError("unknown label kind '" + s + "'");
}

LabelMap::LabelMap(const Grid& grid, LabelKind kind, ClassTable table, DType dtype)
    : VoxelGrid<Label>(grid, Label{0}), kind_(kind), table_(std::move(table)), dtype_(dtype) {
  if (dtype_ != DType::kUInt8 && dtype_ != DType::kUInt16) {
    throw InvalidArgument("label maps are stored as uint8 or uint16");
  }
}

LabelMap::LabelMap(const Grid& grid, Storage data, LabelKind kind, ClassTable table, DType dtype)
    : VoxelGrid<Label>(grid, std::move(data)), kind_(kind), table_(std::move(table)), dtype_(dtype) {
  if (dtype_ != DType::kUInt8 && dtype_ != DType::kUInt16) {
    throw InvalidArgument("label maps are stored as uint8 or uint16");
  }
}

void LabelMap::validate_ids() const {
  // A dense presence table avoids a map lookup per voxel.
  std::vector<char> known(65536, 0);
  known[0] = 1;
  for (const auto& [id, name] : table_) {
    if (id >= 0 && id < 65536) known[static_cast<std::size_t>(id)] = 1;
  }
  const auto n = data_.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!known[data_[i]]) {
      throw FormatError("label id " + std::to_string(data_[i]) + " at voxel " + std::to_string(i) +
                        " is not in the class table");
    }
  }
}

const ClassTable& tissue_class_table() {
  static const ClassTable table{
      {tissue::kBody, "body"}, {tissue::kFat, "fat"}, {tissue::kMuscle, "muscle"}, {tissue::kBone, "bone"}};
  return table;
}

const ClassTable& structure_class_table() {
  static const ClassTable table{
      {structure::kBone, "bone"},
      {structure::kSpleen, "spleen"},
      {structure::kKidney, "kidney"},
      {structure::kLiver, "liver"},
      {structure::kLungUpperLobes, "lung_upper_lobes"},
      {structure::kLungLowerLobes, "lung_lower_lobes"},
      {structure::kLungMiddleLobe, "lung_middle_lobe"},
      {structure::kUrinaryBladder, "urinary_bladder"},
      {structure::kProstate, "prostate"},
      {structure::kHeart, "heart"},
      {structure::kAorta, "aorta"},
      {structure::kGluteusMuscles, "gluteus_muscles"},
      {structure::kAutochthonousMuscles, "autochthonous_muscles"},
      {structure::kIliopsoas, "iliopsoas"},
      {structure::kBrain, "brain"},
      {structure::kAppendicularBones, "appendicular_bones"},
      {structure::kC1, "vertebra_C1"},
      {structure::kC2, "vertebra_C2"},
      {structure::kC7, "vertebra_C7"},
      {structure::kFemurLeft, "femur_left"},
      {structure::kFemurRight, "femur_right"},
      {structure::kTibiaLeft, "tibia_left"},
      {structure::kTibiaRight, "tibia_right"},
      {structure::kHipLeft, "hip_left"},
      {structure::kHipRight, "hip_right"},
      {structure::kClavicleLeft, "clavicle_left"},
      {structure::kClavicleRight, "clavicle_right"},
      {structure::kScapulaLeft, "scapula_left"},
      {structure::kScapulaRight, "scapula_right"},
  };
  return table;
}

const ClassTable& default_class_table(LabelKind kind) {
  return kind == LabelKind::kTissue ? tissue_class_table() : structure_class_table();
}

Mask mask_of(const LabelMap& map, Label id) {
  Mask m(map.grid());
  m.data() = (map.data() == id).cast<std::uint8_t>();
  return m;
}

Mask foreground_of(const LabelMap& map) {
  Mask m(map.grid());
  m.data() = (map.data() != Label{0}).cast<std::uint8_t>();
  return m;
}

}  // namespace vct
