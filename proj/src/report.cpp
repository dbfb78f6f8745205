#include "cortexa/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "csv.hpp"

namespace cortexa {
namespace {

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.6f}", v) : "nan"; }

double parse_or_nan(const std::string& field) {
  if (field.empty() || field == "nan" || field == "NaN") return std::nan("");
  return csv::parse_double(field, "thickness value");
}

}  // namespace

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

std::string thickness_csv(const ThicknessReport& report) {
  std::string out = std::string(kThicknessCsvHeader) + "\n";
  for (const auto& e : report.entries) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", e.name, num(e.thickness_mm), num(e.radius_mm),
                       num(e.center_mm.x()), num(e.center_mm.y()), num(e.center_mm.z()), e.ribbon_voxels,
                       num(e.snap_mm), to_string(e.status));
  }
  return out;
}

nlohmann::json thickness_json(const ThicknessReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json r;
    r["name"] = e.name;
    r["thickness_mm"] = number_or_null(e.thickness_mm);
    r["radius_mm"] = number_or_null(e.radius_mm);
    r["center_mm"] = {number_or_null(e.center_mm.x()), number_or_null(e.center_mm.y()),
                      number_or_null(e.center_mm.z())};
    r["ribbon_voxels"] = e.ribbon_voxels;
    r["snap_mm"] = number_or_null(e.snap_mm);
    r["status"] = to_string(e.status);
    if (!e.message.empty()) r["message"] = e.message;
    rows.push_back(std::move(r));
  }
  return rows;
}

ThicknessReport parse_thickness_csv(const std::string& text) {
  const auto lines = csv::data_lines(text);
  if (lines.empty()) throw Error("thickness CSV is empty");
  const auto header = csv::split_line(lines.front());
  const int c_name = csv::column(header, "name");
  const int c_th = csv::column(header, "thickness_mm");
  if (c_name < 0 || c_th < 0) throw Error("thickness CSV needs 'name' and 'thickness_mm' columns");
  const int c_r = csv::column(header, "radius_mm");
  const int c_status = csv::column(header, "status");
  const int c_rib = csv::column(header, "ribbon_voxels");
  const int c_snap = csv::column(header, "snap_mm");
  const int c_x = csv::column(header, "cx"), c_y = csv::column(header, "cy"), c_z = csv::column(header, "cz");

  ThicknessReport report;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv::split_line(lines[i]);
    if (f.size() != header.size()) throw Error(fmt::format("thickness CSV line {}: wrong field count", i + 1));
    ThicknessEntry e;
    e.name = f[static_cast<std::size_t>(c_name)];
    e.thickness_mm = parse_or_nan(f[static_cast<std::size_t>(c_th)]);
    e.radius_mm = c_r >= 0 ? parse_or_nan(f[static_cast<std::size_t>(c_r)]) : e.thickness_mm / 2;
    if (c_x >= 0 && c_y >= 0 && c_z >= 0) {
      e.center_mm = Vec3(parse_or_nan(f[static_cast<std::size_t>(c_x)]), parse_or_nan(f[static_cast<std::size_t>(c_y)]),
                         parse_or_nan(f[static_cast<std::size_t>(c_z)]));
    }
    if (c_rib >= 0) e.ribbon_voxels = static_cast<std::int64_t>(csv::parse_double(f[static_cast<std::size_t>(c_rib)], "ribbon_voxels"));
    if (c_snap >= 0) e.snap_mm = parse_or_nan(f[static_cast<std::size_t>(c_snap)]);
    if (c_status >= 0) {
      e.status = status_from_string(f[static_cast<std::size_t>(c_status)]);
    } else {
      e.status = std::isfinite(e.thickness_mm) ? LandmarkStatus::kOk : LandmarkStatus::kFailed;
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

ThicknessSeries read_thickness_series(const std::vector<std::string>& paths) {
  ThicknessSeries series;
  for (const auto& path : paths) {
    const auto text = csv::read_file(path);
    const auto lines = csv::data_lines(text);
    if (lines.empty()) throw Error("'" + path + "' is empty");
    const auto header = csv::split_line(lines.front());
    const int c_subject = csv::column(header, "subject");
    if (c_subject < 0) {
      add_subject(series, std::filesystem::path(path).stem().string(), parse_thickness_csv(text));
      continue;
    }
    const int c_name = csv::column(header, "name");
    const int c_th = csv::column(header, "thickness_mm");
    const int c_status = csv::column(header, "status");
    if (c_name < 0 || c_th < 0) throw Error("'" + path + "' needs 'name' and 'thickness_mm' columns");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = csv::split_line(lines[i]);
      if (f.size() != header.size()) throw Error(fmt::format("'{}' line {}: wrong field count", path, i + 1));
      if (c_status >= 0 && f[static_cast<std::size_t>(c_status)] == "failed") continue;
      const double v = parse_or_nan(f[static_cast<std::size_t>(c_th)]);
      if (!std::isfinite(v)) continue;
      series[f[static_cast<std::size_t>(c_subject)]][f[static_cast<std::size_t>(c_name)]] = v;
    }
  }
  return series;
}

nlohmann::json agreement_json(const std::vector<LandmarkAgreement>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& a : rows) {
    nlohmann::json r;
    r["name"] = a.name;
    r["n"] = a.n;
    r["valid"] = a.valid;
    r["r"] = a.valid ? number_or_null(a.r) : nlohmann::json(nullptr);
    r["p"] = a.valid ? number_or_null(a.p) : nlohmann::json(nullptr);
    r["significant"] = a.valid && a.p < 0.05;
    r["icc"] = a.valid ? number_or_null(a.icc) : nlohmann::json(nullptr);
    r["icc_agreement"] = a.valid ? number_or_null(a.icc_agreement) : nlohmann::json(nullptr);
    r["mean_difference_mm"] = number_or_null(a.mean_difference_mm);
    if (!a.message.empty()) r["message"] = a.message;
    out.push_back(std::move(r));
  }
  return out;
}

std::string agreement_csv(const std::vector<LandmarkAgreement>& rows) {
  std::string out = "name,n,r,p,icc,icc_agreement,mean_difference_mm\n";
  for (const auto& a : rows) {
    const double nan = std::nan("");
    out += fmt::format("{},{},{},{},{},{},{}\n", a.name, a.n, num(a.valid ? a.r : nan),
                       a.valid ? fmt::format("{:.6g}", a.p) : "nan", num(a.valid ? a.icc : nan),
                       num(a.valid ? a.icc_agreement : nan), num(a.mean_difference_mm));
  }
  return out;
}

std::string paired_csv(const PairedTable& table) {
  std::string out = "name,subject,auto_mm,manual_mm\n";
  for (const auto& pl : table.landmarks) {
    for (std::size_t i = 0; i < pl.subjects.size(); ++i) {
      out += fmt::format("{},{},{},{}\n", pl.name, pl.subjects[i], num(pl.automated[i]), num(pl.manual[i]));
    }
  }
  return out;
}

nlohmann::json interrater_json(const std::vector<RaterPairAgreement>& pairs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : pairs) {
    out.push_back({{"raters", {p.rater_a + 1, p.rater_b + 1}},
                   {"dsc_percent", p.dsc},
                   {"mean", p.mean},
                   {"sd", p.sd},
                   {"formatted", p.formatted()}});
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace cortexa
