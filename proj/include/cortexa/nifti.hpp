#pragma once

#include <cstdint>
#include <string>

#include "cortexa/volume.hpp"

namespace cortexa {

/// On-disk NIfTI-1 header, 348 bytes, field order as in nifti1.h.
struct NiftiHeader {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
static_assert(sizeof(NiftiHeader) == 348, "NIfTI-1 header must be 348 bytes");

/// Reads a NIfTI-1 image (.nii, .nii.gz, or .hdr/.img pair).
///
/// The affine comes from the sform when sform_code > 0, otherwise from the
/// qform, otherwise from pixdim. Coordinates are taken as RAS mm. When
/// scl_slope is nonzero and not the identity the scaled values are returned
/// and the volume dtype becomes float32.
Volume read_nifti(const std::string& path);

/// Header only, byte-swapped to host order.
NiftiHeader read_nifti_header(const std::string& path);

/// Writes a single-file NIfTI-1 image, gzipped when the path ends in ".gz".
/// The affine goes to the sform (sform_code 1); vox_offset is 352.
/// Throws if a voxel value is not representable in the volume's dtype.
void write_nifti(const Volume& v, const std::string& path);

/// Rotation/scale/offset matrix encoded by the qform fields of a header.
Affine qform_to_affine(const NiftiHeader& h);

}  // namespace cortexa
