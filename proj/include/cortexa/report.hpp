#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cortexa/patch.hpp"
#include "cortexa/thickness.hpp"

namespace cortexa {

inline constexpr const char* kThicknessCsvHeader =
    "name,thickness_mm,radius_mm,cx,cy,cz,ribbon_voxels,snap_mm,status";

std::string thickness_csv(const ThicknessReport& report);
nlohmann::json thickness_json(const ThicknessReport& report);
ThicknessReport parse_thickness_csv(const std::string& text);

/// Reads per-subject thickness tables. A file with a `subject` column may hold
/// many subjects; otherwise the file stem is the subject id. Rows need `name`
/// and `thickness_mm`; rows whose `status` is "failed" or whose value is not
/// finite are dropped.
ThicknessSeries read_thickness_series(const std::vector<std::string>& paths);

nlohmann::json agreement_json(const std::vector<LandmarkAgreement>& rows);
/// name,n,r,p,icc,icc_agreement,mean_difference_mm
std::string agreement_csv(const std::vector<LandmarkAgreement>& rows);
/// name,subject,auto_mm,manual_mm
std::string paired_csv(const PairedTable& table);

nlohmann::json interrater_json(const std::vector<RaterPairAgreement>& pairs);

/// JSON number, or null for NaN/inf.
nlohmann::json number_or_null(double v);

void write_text(const std::string& path, const std::string& text);

}  // namespace cortexa
