#include "vct/volume_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <json.hpp>

namespace vct {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t dtype_bytes(DType t) {
  switch (t) {
    case DType::kUInt8: return 1;
    case DType::kInt16:
    case DType::kUInt16: return 2;
    case DType::kFloat32: return 4;
  }
  return 0;
}

template <typename T>
T load_raw(const char* p, bool swap) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), p, sizeof(T));
  if (swap) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

template <typename T>
void store_le(char* p, T v) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  std::memcpy(p, b.data(), sizeof(T));
}

constexpr bool kHostBig = std::endian::native == std::endian::big;

std::vector<char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void write_file(const fs::path& path, const char* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(data, static_cast<std::streamsize>(n));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

/// Decodes `n` little-endian values of `t` starting at `p` into doubles.
std::vector<double> decode(const char* p, std::size_t n, DType t, bool swap) {
  std::vector<double> out(n);
  const std::size_t w = dtype_bytes(t);
  for (std::size_t i = 0; i < n; ++i, p += w) {
    switch (t) {
      case DType::kUInt8: out[i] = static_cast<unsigned char>(*p); break;
      case DType::kInt16: out[i] = load_raw<std::int16_t>(p, swap); break;
      case DType::kUInt16: out[i] = load_raw<std::uint16_t>(p, swap); break;
      case DType::kFloat32: out[i] = load_raw<float>(p, swap); break;
    }
  }
  return out;
}

bool is_nifti(const fs::path& path) {
  const auto name = path.filename().string();
  return name.size() > 4 && name.substr(name.size() - 4) == ".nii";
}

struct RawImage {
  Grid grid;
  DType dtype = DType::kInt16;
  std::vector<double> values;
  json header;  // CTV only
};

Eigen::Vector3d json_vec3d(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
    throw FormatError(std::string("header field '") + key + "' must be an array of 3 numbers");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[key][i].is_number()) throw FormatError(std::string("header field '") + key + "' must be numeric");
    v[i] = j[key][i].get<double>();
  }
  return v;
}

RawImage read_ctv(const fs::path& path) {
  const auto bytes = read_file(path);
  RawImage img;
  try {
    img.header = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError("malformed header " + path.string() + ": " + e.what());
  }
  const json& h = img.header;
  if (!h.is_object()) throw FormatError("header " + path.string() + " is not a JSON object");
  try {
    const Eigen::Vector3d d = json_vec3d(h, "dims");
    for (int i = 0; i < 3; ++i) {
      if (d[i] < 1 || d[i] != std::floor(d[i])) throw FormatError("dims must be positive integers");
      img.grid.dims[i] = static_cast<int>(d[i]);
    }
    img.grid.spacing = json_vec3d(h, "spacing_mm");
    img.grid.origin = json_vec3d(h, "origin_mm");
    if (h.value("orientation", std::string("RAS")) != "RAS") {
      throw FormatError("CTV orientation must be RAS");
    }
    if (h.value("byte_order", std::string("little")) != "little") {
      throw FormatError("CTV byte_order must be little");
    }
    img.dtype = parse_dtype(h.at("dtype").get<std::string>());
    const auto data_file = h.at("data_file").get<std::string>();
    try {
      img.grid.validate();
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what());
    }
    const auto raw = read_file(path.parent_path() / data_file);
    const std::size_t n = img.grid.voxel_count();
    const std::size_t expect = n * dtype_bytes(img.dtype);
    if (raw.size() != expect) {
      throw FormatError("dims/data-length mismatch in " + path.string() + ": expected " + std::to_string(expect) +
                        " bytes, found " + std::to_string(raw.size()));
    }
    img.values = decode(raw.data(), n, img.dtype, kHostBig);
  } catch (const json::exception& e) {
    throw FormatError("malformed header " + path.string() + ": " + e.what());
  }
  return img;
}

RawImage read_nifti(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() < 348) throw FormatError(path.string() + " is too short for a NIfTI-1 header");
  const char* h = bytes.data();
  bool swap = false;
  if (load_raw<std::int32_t>(h, false) != 348) {
    if (load_raw<std::int32_t>(h, true) != 348) throw FormatError(path.string() + " is not a NIfTI-1 file");
    swap = true;
  }
  if (std::memcmp(h + 344, "n+1", 4) != 0) {
    throw FormatError(path.string() + ": only single-file NIfTI-1 (n+1) is supported");
  }
  std::array<std::int16_t, 8> dim{};
  for (int i = 0; i < 8; ++i) dim[i] = load_raw<std::int16_t>(h + 40 + 2 * i, swap);
  if (dim[0] < 3 || dim[0] > 7) throw FormatError("NIfTI dim[0] must describe a 3D image");
  for (int i = 4; i <= dim[0]; ++i) {
    if (dim[i] != 1) throw FormatError("NIfTI images with more than 3 dimensions are not supported");
  }
  const auto code = load_raw<std::int16_t>(h + 70, swap);
  RawImage img;
  switch (code) {
    case 2: img.dtype = DType::kUInt8; break;
    case 4: img.dtype = DType::kInt16; break;
    case 16: img.dtype = DType::kFloat32; break;
    case 512: img.dtype = DType::kUInt16; break;
    default: throw FormatError("unsupported NIfTI datatype code " + std::to_string(code));
  }
  std::array<float, 8> pixdim{};
  for (int i = 0; i < 8; ++i) pixdim[i] = load_raw<float>(h + 76 + 4 * i, swap);
  const auto vox_offset = static_cast<std::size_t>(load_raw<float>(h + 108, swap));
  const float slope = load_raw<float>(h + 112, swap);
  const float inter = load_raw<float>(h + 116, swap);
  const auto qform_code = load_raw<std::int16_t>(h + 252, swap);
  const auto sform_code = load_raw<std::int16_t>(h + 254, swap);

  Eigen::Vector3i n(dim[1], dim[2], dim[3]);
  if ((n.array() < 1).any()) throw FormatError("NIfTI dims must be positive");

  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  if (sform_code > 0) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a(r, c) = load_raw<float>(h + 280 + 16 * r + 4 * c, swap);
      t[r] = load_raw<float>(h + 280 + 16 * r + 12, swap);
    }
  } else if (qform_code > 0) {
    const double b = load_raw<float>(h + 256, swap);
    const double c = load_raw<float>(h + 260, swap);
    const double d = load_raw<float>(h + 264, swap);
    const double aa = std::sqrt(std::max(0.0, 1.0 - b * b - c * c - d * d));
    Eigen::Matrix3d rot;
    rot << aa * aa + b * b - c * c - d * d, 2 * (b * c - aa * d), 2 * (b * d + aa * c),
        2 * (b * c + aa * d), aa * aa + c * c - b * b - d * d, 2 * (c * d - aa * b),
        2 * (b * d - aa * c), 2 * (c * d + aa * b), aa * aa + d * d - c * c - b * b;
    const double qfac = pixdim[0] < 0 ? -1.0 : 1.0;
    a = rot * Eigen::Vector3d(pixdim[1], pixdim[2], qfac * pixdim[3]).asDiagonal();
    for (int r = 0; r < 3; ++r) t[r] = load_raw<float>(h + 268 + 4 * r, swap);
  } else {
    a = Eigen::Vector3d(pixdim[1], pixdim[2], pixdim[3]).asDiagonal();
  }

  // Accept only signed permutations: each voxel axis maps onto one world axis.
  std::array<int, 3> src_of{-1, -1, -1};
  std::array<int, 3> sign_of{1, 1, 1};
  for (int j = 0; j < 3; ++j) {
    Eigen::Index r = 0;
    const double m = a.col(j).cwiseAbs().maxCoeff(&r);
    if (!(m > 0.0)) throw FormatError("NIfTI affine has a zero column");
    for (int k = 0; k < 3; ++k) {
      if (k != r && std::abs(a(k, j)) > 1e-6 * m) {
        throw FormatError("oblique NIfTI orientation cannot be mapped to RAS by flips and swaps");
      }
    }
    if (src_of[r] != -1) throw FormatError("NIfTI affine maps two voxel axes onto one world axis");
    src_of[r] = j;
    sign_of[r] = a(r, j) < 0 ? -1 : 1;
  }

  for (int r = 0; r < 3; ++r) {
    const int j = src_of[r];
    img.grid.dims[r] = n[j];
    img.grid.spacing[r] = std::abs(a(r, j));
    img.grid.origin[r] = t[r] + (sign_of[r] < 0 ? a(r, j) * (n[j] - 1) : 0.0);
  }
  try {
    img.grid.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }

  const std::size_t count = img.grid.voxel_count();
  const std::size_t offset = std::max<std::size_t>(vox_offset, 348);
  if (bytes.size() < offset + count * dtype_bytes(img.dtype)) {
    throw FormatError("dims/data-length mismatch in " + path.string());
  }
  const auto src = decode(bytes.data() + offset, count, img.dtype, swap);
  const bool scaled = slope != 0.0f && !(slope == 1.0f && inter == 0.0f);

  img.values.resize(count);
  std::array<int, 3> old{};
  for (int z = 0; z < img.grid.dims[2]; ++z) {
    for (int y = 0; y < img.grid.dims[1]; ++y) {
      for (int x = 0; x < img.grid.dims[0]; ++x) {
        const std::array<int, 3> u{x, y, z};
        for (int r = 0; r < 3; ++r) {
          const int j = src_of[r];
          old[j] = sign_of[r] > 0 ? u[r] : n[j] - 1 - u[r];
        }
        const std::size_t si = static_cast<std::size_t>(old[0]) +
                               static_cast<std::size_t>(n[0]) *
                                   (static_cast<std::size_t>(old[1]) + static_cast<std::size_t>(n[1]) * old[2]);
        const double v = src[si];
        img.values[img.grid.index(x, y, z)] = scaled ? slope * v + inter : v;
      }
    }
  }
  if (scaled) img.dtype = DType::kFloat32;
  return img;
}

json grid_header(const Grid& g) {
  json h;
  h["dims"] = {g.dims[0], g.dims[1], g.dims[2]};
  h["spacing_mm"] = {g.spacing[0], g.spacing[1], g.spacing[2]};
  h["origin_mm"] = {g.origin[0], g.origin[1], g.origin[2]};
  h["orientation"] = "RAS";
  h["byte_order"] = "little";
  return h;
}

void write_header(const fs::path& path, const json& h) {
  const std::string text = h.dump(2) + "\n";
  write_file(path, text.data(), text.size());
}

}  // namespace

std::string raw_name_for(const fs::path& header) {
  std::string name = header.filename().string();
  const std::string suffix = ".ctv.json";
  if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
    name.resize(name.size() - suffix.size());
  } else if (name.size() > 5 && name.compare(name.size() - 5, 5, ".json") == 0) {
    name.resize(name.size() - 5);
  }
  return name + ".raw";
}

Volume load_volume(const fs::path& path) {
  RawImage img = is_nifti(path) ? read_nifti(path) : read_ctv(path);
  Unit unit = Unit::kHU;
  if (!img.header.is_null()) {
    const auto kind = img.header.value("kind", std::string("image"));
    if (kind != "image") throw FormatError(path.string() + " holds a label map, not an image");
    unit = parse_unit(img.header.value("unit", std::string("HU")));
    if (unit == Unit::kLabel) throw FormatError("image header declares unit 'label'");
    if (img.dtype != DType::kInt16 && img.dtype != DType::kFloat32) {
      throw FormatError("image volumes must be int16 or float32");
    }
  }
  Volume::Storage data(static_cast<Eigen::Index>(img.values.size()));
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    double v = img.values[i];
    if (unit == Unit::kHU) v = std::clamp(v, double{kHuMin}, double{kHuMax});
    data[static_cast<Eigen::Index>(i)] = static_cast<float>(v);
  }
  const DType dtype = img.dtype == DType::kFloat32 ? DType::kFloat32 : DType::kInt16;
  return Volume(img.grid, std::move(data), dtype, unit);
}

void save_volume(const Volume& vol, const fs::path& path) {
  const std::size_t n = vol.size();
  const std::size_t w = dtype_bytes(vol.dtype());
  std::vector<char> raw(n * w);
  for (std::size_t i = 0; i < n; ++i) {
    const float v = vol[i];
    if (vol.dtype() == DType::kInt16) {
      const float c = std::clamp(std::nearbyint(v), -32768.0f, 32767.0f);
      store_le(raw.data() + i * w, static_cast<std::int16_t>(c));
    } else {
      store_le(raw.data() + i * w, v);
    }
  }
  json h = grid_header(vol.grid());
  h["dtype"] = to_string(vol.dtype());
  h["kind"] = "image";
  h["unit"] = to_string(vol.unit());
  h["data_file"] = raw_name_for(path);
  write_file(path.parent_path() / raw_name_for(path), raw.data(), raw.size());
  write_header(path, h);
}

LabelMap load_labelmap(const fs::path& path, std::optional<LabelKind> kind_hint) {
  RawImage img = is_nifti(path) ? read_nifti(path) : read_ctv(path);
  LabelKind kind = kind_hint.value_or(LabelKind::kStructure);
  ClassTable table;
  if (!img.header.is_null()) {
    kind = parse_label_kind(img.header.value("kind", std::string("image")));
    if (img.header.contains("class_table")) {
      const json& ct = img.header["class_table"];
      if (!ct.is_object()) throw FormatError("class_table must be an object");
      for (const auto& [key, name] : ct.items()) {
        int id = 0;
        try {
          std::size_t used = 0;
          id = std::stoi(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          throw FormatError("class_table key '" + key + "' is not an integer");
        }
        if (id < 1 || id > 65535) throw FormatError("class_table id out of range: " + key);
        table[id] = name.get<std::string>();
      }
    } else {
      table = default_class_table(kind);
    }
  } else {
    table = default_class_table(kind);
  }
  if (img.dtype == DType::kFloat32 && img.header.is_null()) {
    throw FormatError("label maps must have an integer dtype");
  }
  DType dtype = img.dtype == DType::kUInt8 ? DType::kUInt8 : DType::kUInt16;
  if (!img.header.is_null() && img.dtype != DType::kUInt8 && img.dtype != DType::kUInt16) {
    throw FormatError("label maps must be uint8 or uint16");
  }
  LabelMap::Storage data(static_cast<Eigen::Index>(img.values.size()));
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const double v = img.values[i];
    if (v < 0 || v > 65535 || v != std::floor(v)) {
      throw FormatError("label value " + std::to_string(v) + " is not a valid id");
    }
    data[static_cast<Eigen::Index>(i)] = static_cast<Label>(v);
  }
  LabelMap map(img.grid, std::move(data), kind, std::move(table), dtype);
  map.validate_ids();
  return map;
}

void save_labelmap(const LabelMap& map, const fs::path& path) {
  map.validate_ids();
  const std::size_t n = map.size();
  const std::size_t w = dtype_bytes(map.dtype());
  std::vector<char> raw(n * w);
  for (std::size_t i = 0; i < n; ++i) {
    const Label v = map[i];
    if (map.dtype() == DType::kUInt8) {
      if (v > 255) throw InvalidArgument("label id " + std::to_string(v) + " does not fit uint8 storage");
      raw[i] = static_cast<char>(static_cast<unsigned char>(v));
    } else {
      store_le(raw.data() + i * w, v);
    }
  }
  json h = grid_header(map.grid());
  h["dtype"] = to_string(map.dtype());
  h["kind"] = to_string(map.kind());
  h["unit"] = "label";
  json table = json::object();
  for (const auto& [id, name] : map.class_table()) table[std::to_string(id)] = name;
  h["class_table"] = table;
  h["data_file"] = raw_name_for(path);
  write_file(path.parent_path() / raw_name_for(path), raw.data(), raw.size());
  write_header(path, h);
}

}  // namespace vct
