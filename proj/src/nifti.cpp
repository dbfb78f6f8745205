#include "cortexa/nifti.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include <fmt/format.h>
#include <zlib.h>

namespace cortexa {
namespace {

constexpr float kVoxOffset = 352.0f;

// Files are written in host order, which must be little-endian.
static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Reads the whole file through zlib, which passes non-gzip input through untouched.
std::vector<unsigned char> slurp(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw Error("cannot open '" + path + "'");
  std::vector<unsigned char> out;
  std::vector<unsigned char> chunk(1 << 20);
  while (true) {
    const int n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      int err = 0;
      const std::string msg = gzerror(f, &err);
      gzclose(f);
      throw Error("malformed compressed data in '" + path + "': " + msg);
    }
    if (n == 0) break;
    out.insert(out.end(), chunk.begin(), chunk.begin() + n);
  }
  int err = Z_OK;
  const char* msg = gzerror(f, &err);
  if (err != Z_OK && err != Z_STREAM_END) {
    const std::string text = msg;
    gzclose(f);
    throw Error("malformed compressed data in '" + path + "': " + text);
  }
  if (gzclose(f) != Z_OK) throw Error("malformed compressed data in '" + path + "'");
  return out;
}

template <typename T>
void swap_bytes(T& v) {
  auto* p = reinterpret_cast<unsigned char*>(&v);
  std::reverse(p, p + sizeof(T));
}

void swap_header(NiftiHeader& h) {
  swap_bytes(h.sizeof_hdr);
  swap_bytes(h.extents);
  swap_bytes(h.session_error);
  for (auto& d : h.dim) swap_bytes(d);
  swap_bytes(h.intent_p1);
  swap_bytes(h.intent_p2);
  swap_bytes(h.intent_p3);
  swap_bytes(h.intent_code);
  swap_bytes(h.datatype);
  swap_bytes(h.bitpix);
  swap_bytes(h.slice_start);
  for (auto& p : h.pixdim) swap_bytes(p);
  swap_bytes(h.vox_offset);
  swap_bytes(h.scl_slope);
  swap_bytes(h.scl_inter);
  swap_bytes(h.slice_end);
  swap_bytes(h.cal_max);
  swap_bytes(h.cal_min);
  swap_bytes(h.slice_duration);
  swap_bytes(h.toffset);
  swap_bytes(h.glmax);
  swap_bytes(h.glmin);
  swap_bytes(h.qform_code);
  swap_bytes(h.sform_code);
  swap_bytes(h.quatern_b);
  swap_bytes(h.quatern_c);
  swap_bytes(h.quatern_d);
  swap_bytes(h.qoffset_x);
  swap_bytes(h.qoffset_y);
  swap_bytes(h.qoffset_z);
  for (auto& v : h.srow_x) swap_bytes(v);
  for (auto& v : h.srow_y) swap_bytes(v);
  for (auto& v : h.srow_z) swap_bytes(v);
}

// Returns true when the file's byte order differs from the host's.
bool parse_header(const std::vector<unsigned char>& bytes, const std::string& path, NiftiHeader& h) {
  if (bytes.size() < sizeof(NiftiHeader)) throw Error("truncated NIfTI header in '" + path + "'");
  std::memcpy(&h, bytes.data(), sizeof(NiftiHeader));
  bool swapped = false;
  if (h.dim[0] < 1 || h.dim[0] > 7) {
    swap_header(h);
    swapped = true;
    if (h.dim[0] < 1 || h.dim[0] > 7) throw Error("'" + path + "' has an invalid dim[0]");
  }
  if (h.sizeof_hdr != 348) throw Error("'" + path + "' is not a NIfTI-1 file (sizeof_hdr)");
  const bool single = std::memcmp(h.magic, "n+1\0", 4) == 0;
  const bool pair = std::memcmp(h.magic, "ni1\0", 4) == 0;
  if (!single && !pair) throw Error("'" + path + "' has no NIfTI-1 magic");
  return swapped;
}

std::size_t bytes_per_voxel(std::int16_t datatype) {
  switch (datatype) {
    case 2: return 1;
    case 4: return 2;
    case 16: return 4;
    default: return 0;
  }
}

std::string companion_image(const std::string& path) {
  if (ends_with(path, ".hdr.gz")) return path.substr(0, path.size() - 7) + ".img.gz";
  if (ends_with(path, ".hdr")) return path.substr(0, path.size() - 4) + ".img";
  throw Error("'" + path + "' is a two-file NIfTI header but has no .hdr extension");
}

}  // namespace

Affine qform_to_affine(const NiftiHeader& h) {
  double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
  double a = 1.0 - (b * b + c * c + d * d);
  if (a < 1e-7) {
    // Pure 180 degree rotation: renormalise the vector part.
    const double n = std::sqrt(b * b + c * c + d * d);
    b /= n;
    c /= n;
    d /= n;
    a = 0.0;
  } else {
    a = std::sqrt(a);
  }
  Eigen::Matrix3d r;
  r << a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c),
      2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b),
      2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b;
  const double qfac = h.pixdim[0] < 0 ? -1.0 : 1.0;
  const double dx = std::abs(h.pixdim[1]);
  const double dy = std::abs(h.pixdim[2]);
  const double dz = std::abs(h.pixdim[3]) * qfac;
  Affine m = Affine::Identity();
  m.block<3, 1>(0, 0) = r.col(0) * dx;
  m.block<3, 1>(0, 1) = r.col(1) * dy;
  m.block<3, 1>(0, 2) = r.col(2) * dz;
  m(0, 3) = h.qoffset_x;
  m(1, 3) = h.qoffset_y;
  m(2, 3) = h.qoffset_z;
  return m;
}

NiftiHeader read_nifti_header(const std::string& path) {
  NiftiHeader h{};
  parse_header(slurp(path), path, h);
  return h;
}

Volume read_nifti(const std::string& path) {
  const auto bytes = slurp(path);
  NiftiHeader h{};
  const bool swapped = parse_header(bytes, path, h);

  const int ndim = h.dim[0];
  Dims dims{1, 1, 1};
  for (int a = 0; a < 3 && a < ndim; ++a) dims[a] = h.dim[a + 1];
  for (int a = 3; a < ndim; ++a) {
    if (h.dim[a + 1] > 1) {
      throw Error(fmt::format("'{}' has {} dimensions with dim[{}]={}; only 3D images are supported",
                              path, ndim, a + 1, h.dim[a + 1]));
    }
  }
  const std::size_t bpv = bytes_per_voxel(h.datatype);
  if (bpv == 0) {
    throw Error(fmt::format("'{}' has unsupported datatype {} (need 2, 4 or 16)", path, h.datatype));
  }

  Vec3 spacing;
  for (int a = 0; a < 3; ++a) {
    spacing[a] = std::abs(static_cast<double>(h.pixdim[a + 1]));
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) spacing[a] = 1.0;
  }

  Affine affine;
  if (h.sform_code > 0) {
    affine = Affine::Identity();
    for (int c = 0; c < 4; ++c) {
      affine(0, c) = h.srow_x[c];
      affine(1, c) = h.srow_y[c];
      affine(2, c) = h.srow_z[c];
    }
  } else if (h.qform_code > 0) {
    NiftiHeader q = h;
    for (int a = 1; a <= 3; ++a) q.pixdim[a] = static_cast<float>(spacing[a - 1]);
    affine = qform_to_affine(q);
  } else {
    affine = diagonal_affine(spacing);
  }
  // pixdim and the orientation matrix can disagree in the wild; the matrix wins.
  for (int a = 0; a < 3; ++a) {
    const double norm = affine.block<3, 1>(0, a).norm();
    if (!(norm > 0.0)) throw Error("'" + path + "' has a degenerate orientation matrix");
    if (std::abs(norm - spacing[a]) > 1e-4 * spacing[a]) spacing[a] = norm;
  }

  std::vector<unsigned char> image_bytes;
  const std::vector<unsigned char>* source = &bytes;
  std::size_t offset = 0;
  if (std::memcmp(h.magic, "n+1\0", 4) == 0) {
    offset = static_cast<std::size_t>(std::max(h.vox_offset, 348.0f));
  } else {
    image_bytes = slurp(companion_image(path));
    source = &image_bytes;
    offset = static_cast<std::size_t>(std::max(h.vox_offset, 0.0f));
  }
  const Grid grid(dims, spacing, affine);
  const auto n = static_cast<std::size_t>(grid.size());
  if (source->size() < offset + n * bpv) {
    throw Error(fmt::format("'{}' is truncated: need {} data bytes at offset {}, have {}", path,
                            n * bpv, offset, source->size() > offset ? source->size() - offset : 0));
  }

  std::vector<float> voxels(n);
  const unsigned char* data = source->data() + offset;
  for (std::size_t i = 0; i < n; ++i) {
    switch (h.datatype) {
      case 2: voxels[i] = static_cast<float>(data[i]); break;
      case 4: {
        std::int16_t v;
        std::memcpy(&v, data + 2 * i, 2);
        if (swapped) swap_bytes(v);
        voxels[i] = static_cast<float>(v);
        break;
      }
      case 16: {
        float v;
        std::memcpy(&v, data + 4 * i, 4);
        if (swapped) swap_bytes(v);
        voxels[i] = v;
        break;
      }
    }
  }

  auto dtype = static_cast<DataType>(h.datatype);
  const double slope = h.scl_slope;
  const double inter = h.scl_inter;
  if (slope != 0.0 && std::isfinite(slope) && !(slope == 1.0 && inter == 0.0)) {
    for (auto& v : voxels) v = static_cast<float>(slope * v + inter);
    dtype = DataType::kFloat32;
  }
  return Volume(grid, dtype, std::move(voxels));
}

void write_nifti(const Volume& v, const std::string& path) {
  NiftiHeader h{};
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = 3;
  for (int a = 0; a < 3; ++a) {
    if (v.dims()[a] > std::numeric_limits<std::int16_t>::max()) {
      throw Error("dimension too large for NIfTI-1");
    }
    h.dim[a + 1] = static_cast<std::int16_t>(v.dims()[a]);
  }
  for (int a = 4; a < 8; ++a) h.dim[a] = 1;
  h.datatype = static_cast<std::int16_t>(v.dtype());
  h.bitpix = static_cast<std::int16_t>(8 * bytes_per_voxel(h.datatype));
  h.pixdim[0] = 1.0f;
  for (int a = 0; a < 3; ++a) h.pixdim[a + 1] = static_cast<float>(v.spacing()[a]);
  for (int a = 4; a < 8; ++a) h.pixdim[a] = 1.0f;
  h.vox_offset = kVoxOffset;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = 2;  // mm
  std::strncpy(h.descrip, "cortexa", sizeof(h.descrip) - 1);
  h.qform_code = 0;
  h.sform_code = 1;
  for (int c = 0; c < 4; ++c) {
    h.srow_x[c] = static_cast<float>(v.affine()(0, c));
    h.srow_y[c] = static_cast<float>(v.affine()(1, c));
    h.srow_z[c] = static_cast<float>(v.affine()(2, c));
  }
  std::memcpy(h.magic, "n+1\0", 4);

  const auto vox = v.voxels();
  const std::size_t bpv = bytes_per_voxel(h.datatype);
  std::vector<unsigned char> buffer(static_cast<std::size_t>(kVoxOffset) + vox.size() * bpv, 0);
  std::memcpy(buffer.data(), &h, sizeof(h));
  unsigned char* data = buffer.data() + static_cast<std::size_t>(kVoxOffset);
  for (std::size_t i = 0; i < vox.size(); ++i) {
    const float x = vox[i];
    switch (v.dtype()) {
      case DataType::kUInt8: {
        if (!(x >= 0.0f && x <= 255.0f) || x != std::floor(x)) {
          throw Error(fmt::format("voxel {} value {} does not fit uint8", i, x));
        }
        data[i] = static_cast<unsigned char>(x);
        break;
      }
      case DataType::kInt16: {
        if (!(x >= -32768.0f && x <= 32767.0f) || x != std::floor(x)) {
          throw Error(fmt::format("voxel {} value {} does not fit int16", i, x));
        }
        const auto s = static_cast<std::int16_t>(x);
        std::memcpy(data + 2 * i, &s, 2);
        break;
      }
      case DataType::kFloat32: std::memcpy(data + 4 * i, &x, 4); break;
    }
  }

  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "wb6");
    if (f == nullptr) throw Error("cannot write '" + path + "'");
    const int n = gzwrite(f, buffer.data(), static_cast<unsigned>(buffer.size()));
    const int rc = gzclose(f);
    if (n != static_cast<int>(buffer.size()) || rc != Z_OK) throw Error("failed writing '" + path + "'");
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw Error("failed writing '" + path + "'");
  }
}

}  // namespace cortexa
