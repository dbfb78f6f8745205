#include "cortexa/volume.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <fmt/format.h>

#include "csv.hpp"

namespace cortexa {

std::string to_string(DataType t) {
  switch (t) {
    case DataType::kUInt8: return "uint8";
    case DataType::kInt16: return "int16";
    case DataType::kFloat32: return "float32";
  }
  return "unknown";
}

Affine diagonal_affine(const Vec3& spacing) {
  Affine a = Affine::Identity();
  a(0, 0) = spacing.x();
  a(1, 1) = spacing.y();
  a(2, 2) = spacing.z();
  return a;
}

Grid::Grid(Dims dims, Vec3 spacing) : Grid(dims, spacing, diagonal_affine(spacing)) {}

Grid::Grid(Dims dims, Vec3 spacing, const Affine& affine)
    : dims_(dims), spacing_(spacing), affine_(affine) {
  for (int a = 0; a < 3; ++a) {
    if (dims_[a] <= 0) throw Error(fmt::format("dimension {} must be positive", a));
    if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a])) {
      throw Error(fmt::format("spacing {} must be positive", a));
    }
    const double norm = affine_.block<3, 1>(0, a).norm();
    if (std::abs(norm - spacing_[a]) > 1e-4 * spacing_[a]) {
      throw Error(fmt::format("affine column {} has norm {} but spacing is {}", a, norm, spacing_[a]));
    }
  }
  if (!affine_.allFinite()) throw Error("affine has non-finite entries");
}

Vec3 Grid::voxel_to_phys(const Vec3& ijk) const {
  return affine_.block<3, 3>(0, 0) * ijk + affine_.block<3, 1>(0, 3);
}

Vec3 Grid::voxel_to_phys(const Index3& v) const {
  return voxel_to_phys(Vec3(static_cast<double>(v[0]), static_cast<double>(v[1]),
                            static_cast<double>(v[2])));
}

Vec3 Grid::phys_to_voxel(const Vec3& p) const {
  const Eigen::Matrix3d lin = affine_.block<3, 3>(0, 0);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(lin);
  if (!lu.isInvertible()) throw Error("affine is singular");
  return lu.solve(p - affine_.block<3, 1>(0, 3));
}

NearestVoxel Grid::nearest_voxel(const Vec3& p) const {
  const Vec3 c = phys_to_voxel(p);
  NearestVoxel out;
  for (int a = 0; a < 3; ++a) out.index[a] = static_cast<std::int64_t>(std::round(c[a]));
  out.inside = contains(out.index);
  return out;
}

bool Grid::same_geometry(const Grid& other, double tol) const {
  return dims_ == other.dims_ && (spacing_ - other.spacing_).cwiseAbs().maxCoeff() <= tol &&
         (affine_ - other.affine_).cwiseAbs().maxCoeff() <= tol;
}

Volume::Volume(Grid grid, DataType dtype, std::vector<float> voxels)
    : grid_(std::move(grid)), dtype_(dtype), voxels_(std::move(voxels)) {
  if (static_cast<std::int64_t>(voxels_.size()) != grid_.size()) {
    throw Error(fmt::format("voxel buffer has {} elements, grid needs {}", voxels_.size(), grid_.size()));
  }
}

Volume Volume::zeros(const Grid& grid, DataType dtype) {
  return Volume(grid, dtype, std::vector<float>(static_cast<std::size_t>(grid.size()), 0.0f));
}

BinaryMask::BinaryMask(Grid grid, std::vector<std::uint8_t> bits)
    : grid_(std::move(grid)), bits_(std::move(bits)) {
  if (static_cast<std::int64_t>(bits_.size()) != grid_.size()) {
    throw Error(fmt::format("mask buffer has {} elements, grid needs {}", bits_.size(), grid_.size()));
  }
  for (auto b : bits_) {
    if (b > 1) throw Error("mask voxels must be 0 or 1");
  }
}

BinaryMask BinaryMask::empty(const Grid& grid) {
  return BinaryMask(grid, std::vector<std::uint8_t>(static_cast<std::size_t>(grid.size()), 0));
}

BinaryMask BinaryMask::from_volume(const Volume& v) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(v.size()));
  const auto vox = v.voxels();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (vox[i] == 0.0f) {
      bits[i] = 0;
    } else if (vox[i] == 1.0f) {
      bits[i] = 1;
    } else {
      throw Error(fmt::format("voxel {} has value {}; a binary mask needs 0 or 1", i, vox[i]));
    }
  }
  return BinaryMask(v.grid(), std::move(bits));
}

BinaryMask BinaryMask::threshold(const Volume& v, float threshold) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(v.size()));
  const auto vox = v.voxels();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = vox[i] >= threshold ? 1 : 0;
  return BinaryMask(v.grid(), std::move(bits));
}

std::int64_t BinaryMask::count() const {
  std::int64_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

Volume BinaryMask::to_volume() const {
  return Volume(grid_, DataType::kUInt8, std::vector<float>(bits_.begin(), bits_.end()));
}

LandmarkSet::LandmarkSet(std::vector<Landmark> landmarks) {
  for (auto& l : landmarks) add(std::move(l.name), l.point);
}

void LandmarkSet::add(std::string name, const Vec3& point) {
  if (name.empty()) throw Error("landmark name must not be empty");
  if (!point.allFinite()) throw Error("landmark '" + name + "' has a non-finite coordinate");
  for (const auto& l : items_) {
    if (l.name == name) throw Error("duplicate landmark name '" + name + "'");
  }
  items_.push_back({std::move(name), point});
}

LandmarkSet parse_landmarks_csv(const std::string& text) {
  const auto lines = csv::data_lines(text);
  if (lines.empty()) throw Error("landmark CSV is empty");
  const auto header = csv::split_line(lines.front());
  if (header != std::vector<std::string>{"name", "x", "y", "z"}) {
    throw Error("landmark CSV header must be 'name,x,y,z'");
  }
  LandmarkSet out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv::split_line(lines[i]);
    if (f.size() != 4) throw Error(fmt::format("landmark CSV line {}: expected 4 fields", i + 1));
    out.add(f[0], Vec3(csv::parse_double(f[1], "x"), csv::parse_double(f[2], "y"),
                       csv::parse_double(f[3], "z")));
  }
  return out;
}

LandmarkSet read_landmarks_csv(const std::string& path) {
  return parse_landmarks_csv(csv::read_file(path));
}

void write_landmarks_csv(const LandmarkSet& landmarks, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "name,x,y,z\n";
  for (const auto& l : landmarks.items()) {
    out << fmt::format("{},{},{},{}\n", l.name, l.point.x(), l.point.y(), l.point.z());
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace cortexa
