#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cortexa {

/// Raised for invalid inputs, malformed files and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Index3 = std::array<std::int64_t, 3>;
using Dims = std::array<std::int64_t, 3>;
using Vec3 = Eigen::Vector3d;
using Affine = Eigen::Matrix4d;

/// On-disk voxel type. Values match the NIfTI-1 datatype codes.
enum class DataType : std::int16_t { kUInt8 = 2, kInt16 = 4, kFloat32 = 16 };

std::string to_string(DataType t);

/// Result of rounding a continuous voxel coordinate to a grid index.
struct NearestVoxel {
  Index3 index{};
  bool inside = false;
};

/// Sampling geometry shared by every voxel container: extent, voxel size and
/// the voxel-index -> physical RAS (mm) mapping.
///
/// The upper-left 3x3 block of the affine must have column norms equal to the
/// spacing (1e-4 relative); this is checked on construction.
class Grid {
 public:
  Grid() = default;
  Grid(Dims dims, Vec3 spacing);
  Grid(Dims dims, Vec3 spacing, const Affine& affine);

  const Dims& dims() const { return dims_; }
  const Vec3& spacing() const { return spacing_; }
  const Affine& affine() const { return affine_; }

  std::int64_t size() const { return dims_[0] * dims_[1] * dims_[2]; }
  double voxel_volume() const { return spacing_.prod(); }

  std::int64_t linear(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return i + dims_[0] * (j + dims_[1] * k);
  }
  std::int64_t linear(const Index3& v) const { return linear(v[0], v[1], v[2]); }
  Index3 unravel(std::int64_t idx) const {
    const std::int64_t i = idx % dims_[0];
    const std::int64_t rest = idx / dims_[0];
    return {i, rest % dims_[1], rest / dims_[1]};
  }
  bool contains(const Index3& v) const {
    return v[0] >= 0 && v[1] >= 0 && v[2] >= 0 && v[0] < dims_[0] && v[1] < dims_[1] &&
           v[2] < dims_[2];
  }

  Vec3 voxel_to_phys(const Vec3& ijk) const;
  Vec3 voxel_to_phys(const Index3& v) const;
  /// Inverse affine applied to a physical point. Throws on a singular affine.
  Vec3 phys_to_voxel(const Vec3& p) const;
  /// Rounds phys_to_voxel(p) half away from zero.
  NearestVoxel nearest_voxel(const Vec3& p) const;

  bool same_geometry(const Grid& other, double tol = 1e-6) const;

 private:
  Dims dims_{1, 1, 1};
  Vec3 spacing_ = Vec3::Ones();
  Affine affine_ = Affine::Identity();
};

Affine diagonal_affine(const Vec3& spacing);

/// Dense scalar image in x-fastest order. Immutable after construction.
/// Integer dtypes are held in float storage, which is exact for uint8/int16.
class Volume {
 public:
  Volume() = default;
  Volume(Grid grid, DataType dtype, std::vector<float> voxels);

  static Volume zeros(const Grid& grid, DataType dtype = DataType::kFloat32);

  const Grid& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims(); }
  const Vec3& spacing() const { return grid_.spacing(); }
  const Affine& affine() const { return grid_.affine(); }
  DataType dtype() const { return dtype_; }
  std::int64_t size() const { return grid_.size(); }

  std::span<const float> voxels() const { return voxels_; }
  float operator[](std::int64_t idx) const { return voxels_[static_cast<std::size_t>(idx)]; }
  float at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return voxels_[static_cast<std::size_t>(grid_.linear(i, j, k))];
  }

 private:
  Grid grid_;
  DataType dtype_ = DataType::kFloat32;
  std::vector<float> voxels_;
};

/// Gray-matter mask: 1 = foreground, 0 = background.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(Grid grid, std::vector<std::uint8_t> bits);

  static BinaryMask empty(const Grid& grid);
  /// Requires every voxel to be exactly 0 or 1.
  static BinaryMask from_volume(const Volume& v);
  /// Foreground where value >= threshold.
  static BinaryMask threshold(const Volume& v, float threshold);

  const Grid& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims(); }
  const Vec3& spacing() const { return grid_.spacing(); }
  std::int64_t size() const { return grid_.size(); }

  bool operator[](std::int64_t idx) const { return bits_[static_cast<std::size_t>(idx)] != 0; }
  bool at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return bits_[static_cast<std::size_t>(grid_.linear(i, j, k))] != 0;
  }
  bool at(const Index3& v) const { return at(v[0], v[1], v[2]); }
  std::span<const std::uint8_t> bits() const { return bits_; }

  std::int64_t count() const;
  Volume to_volume() const;

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.grid_.same_geometry(b.grid_) && a.bits_ == b.bits_;
  }

 private:
  Grid grid_;
  std::vector<std::uint8_t> bits_;
};

struct Landmark {
  std::string name;
  Vec3 point = Vec3::Zero();
};

/// Ordered named points in physical RAS mm. Names are unique.
class LandmarkSet {
 public:
  LandmarkSet() = default;
  explicit LandmarkSet(std::vector<Landmark> landmarks);

  void add(std::string name, const Vec3& point);
  const std::vector<Landmark>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Landmark& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::vector<Landmark> items_;
};

/// Reads a landmark CSV with header `name,x,y,z`.
LandmarkSet read_landmarks_csv(const std::string& path);
LandmarkSet parse_landmarks_csv(const std::string& text);
void write_landmarks_csv(const LandmarkSet& landmarks, const std::string& path);

}  // namespace cortexa
