#include <cmath>
#include <filesystem>

#include "doctest.h"

#include "cortexa/report.hpp"

using namespace cortexa;
namespace fs = std::filesystem;

namespace {

ThicknessReport sample() {
  ThicknessReport rep;
  rep.entries.push_back({"motor", LandmarkStatus::kOk, 2.4, 1.2, Vec3(1, 2, 3), 120, 0.1, ""});
  rep.entries.push_back({"visual", LandmarkStatus::kSnapped, 1.8, 0.9, Vec3(-1, 0.5, 2), 80, 0.6, ""});
  rep.entries.push_back({"ec", LandmarkStatus::kFailed, std::nan(""), std::nan(""),
                         Vec3::Constant(std::nan("")), 0, 0.0, "no foreground within 2 mm"});
  return rep;
}

}  // namespace

TEST_CASE("thickness CSV round trip") {
  const auto text = thickness_csv(sample());
  CHECK(text.rfind(std::string(kThicknessCsvHeader) + "\n", 0) == 0);
  CHECK(text.find("ec,nan,nan,nan,nan,nan,0,0.000000,failed") != std::string::npos);
  const auto back = parse_thickness_csv(text);
  REQUIRE(back.entries.size() == 3);
  CHECK(back.entries[0].thickness_mm == 2.4);
  CHECK(back.entries[1].status == LandmarkStatus::kSnapped);
  CHECK(back.entries[1].center_mm.isApprox(Vec3(-1, 0.5, 2)));
  CHECK(std::isnan(back.entries[2].thickness_mm));
  CHECK(thickness_csv(back) == text);
}

TEST_CASE("thickness JSON uses null for missing values") {
  const auto j = thickness_json(sample());
  CHECK(j.size() == 3);
  CHECK(j[0]["status"] == "ok");
  CHECK(j[2]["thickness_mm"].is_null());
  CHECK(j[2]["message"] == "no foreground within 2 mm");
}

TEST_CASE("thickness series from files") {
  const auto dir = fs::temp_directory_path() / "cortexa_test_report";
  fs::create_directories(dir);
  write_text((dir / "subj01.csv").string(), thickness_csv(sample()));
  write_text((dir / "many.csv").string(),
             "subject,name,thickness_mm\nA,motor,2.0\nA,visual,nan\nB,motor,3.5\n");
  const auto s = read_thickness_series({(dir / "subj01.csv").string(), (dir / "many.csv").string()});
  CHECK(s.size() == 3);
  CHECK(s.at("subj01").size() == 2);
  CHECK(s.at("A").size() == 1);
  CHECK(s.at("B").at("motor") == 3.5);
  CHECK_THROWS_AS(read_thickness_series({(dir / "absent.csv").string()}), Error);
  write_text((dir / "bad.csv").string(), "name,value\nmotor,2\n");
  CHECK_THROWS_AS(read_thickness_series({(dir / "bad.csv").string()}), Error);
}

TEST_CASE("agreement outputs") {
  LandmarkAgreement ok{"motor", 5, true, 0.9, 0.01, 0.8, 0.7, -0.1, ""};
  LandmarkAgreement bad{"visual", 3, false, 0, 1, 0, 0, 0.0, "zero variance"};
  const auto j = agreement_json({ok, bad});
  CHECK(j[0]["significant"] == true);
  CHECK(j[1]["r"].is_null());
  CHECK(j[1]["significant"] == false);
  const auto csv = agreement_csv({ok, bad});
  CHECK(csv.find("motor,5,0.900000,0.01,0.800000,0.700000,-0.100000") != std::string::npos);
  CHECK(csv.find("visual,3,nan,nan,nan,nan,0.000000") != std::string::npos);
}

TEST_CASE("number_or_null") {
  CHECK(number_or_null(1.5) == 1.5);
  CHECK(number_or_null(INFINITY).is_null());
}
