#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "conflab/io.hpp"

using namespace conflab;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("conflab_io_test_" + name);
}

}  // namespace

TEST(SphereFieldJson, RoundTripIsBitExact) {
  const SphereField f = make_perturbed_round(4, 0.37, {65, 2.0}).field();
  const auto path = scratch("field.json");
  io::write_json(path, io::to_json(f));
  const SphereField back = io::sphere_field_from_json(io::read_json(path));
  EXPECT_EQ(back.label, f.label);
  EXPECT_EQ(back.n(), 65);
  for (ChartId c : {ChartId::North, ChartId::South})
    for (std::size_t i = 0; i < f.chart(c).values.size(); ++i)
      ASSERT_TRUE(same_bits(back.chart(c).values[i], f.chart(c).values[i])) << i;
  std::filesystem::remove(path);
}

TEST(SphereFieldJson, RejectsMalformed) {
  EXPECT_THROW(io::sphere_field_from_json(io::Json::parse(R"({"charts": []})")), Error);
  io::Json j = io::to_json(make_round({65, 2.0}).field());
  j["charts"][0]["values"].erase(0);
  EXPECT_THROW(io::sphere_field_from_json(j), Error);
  j = io::to_json(make_round({65, 2.0}).field());
  j["charts"][1]["n"] = 67;
  EXPECT_THROW(io::sphere_field_from_json(j), Error);
}

TEST(MetricJson, KeepsProvenanceAndValues) {
  const ConformalMetric g = make_dilated_round(SpherePoint(0, 1, 1), 3.0, {65, 2.0});
  const ConformalMetric back = io::metric_from_json(io::metric_to_json(g));
  EXPECT_EQ(back.provenance(), "dilated_round");
  EXPECT_FALSE(back.exact_evaluator());
  EXPECT_NEAR(area(back), functionals(g, 1.0, Layout::Atlas).area, 1e-9);
}

TEST(MobiusJson, EightReals) {
  const MobiusTransform m = MobiusTransform::rotation_to_origin(SpherePoint(1, 2, 3)) * dilation_at(kNorthPole, 4.0);
  const io::Json j = io::to_json(m);
  EXPECT_EQ(j.size(), 4u);
  const MobiusTransform back = io::mobius_from_json(j);
  for (const SpherePoint& p : fibonacci_sphere(20)) EXPECT_LT(back.apply(p).distance(m.apply(p)), 1e-14);
}

TEST(DiskFieldJson, NonFiniteBecomesNull) {
  DiskField f(65, 1.5, 0.25);
  f.at(3, 4) = std::numeric_limits<double>::infinity();
  f.at(5, 6) = 1.0 / 3.0;
  const io::Json j = io::to_json(f);
  EXPECT_TRUE(j["values"][3 * 65 + 4].is_null());
  const DiskField back = io::disk_field_from_json(io::Json::parse(j.dump()));
  EXPECT_TRUE(std::isnan(back.at(3, 4)));
  EXPECT_TRUE(same_bits(back.at(5, 6), 1.0 / 3.0));
  EXPECT_EQ(back.radius, 1.5);
}

TEST(Csv, RowsMatchHeaders) {
  FunctionalReport r;
  r.area = 4 * kPi;
  r.total_curvature = 4 * kPi;
  const std::string a = io::csv::row("round", 0, 257, r);
  EXPECT_EQ(io::csv::split(a).size(), io::csv::split(io::csv::kFunctionalHeader).size());
  EXPECT_EQ(io::csv::split(a)[8], "0");

  EstimateReport e{"brezis_merle", "eps=1;seed=3", 1.5, 2.0, 0.1, true, 129};
  const auto fields = io::csv::split(io::csv::row(e));
  EXPECT_EQ(fields.size(), 7u);
  EXPECT_EQ(fields[5], "true");
  e.holds.reset();
  EXPECT_EQ(io::csv::split(io::csv::row(e))[5], "");

  DiagnosticsRow d;
  d.family = "cylinder_sphere";
  d.error = "ResolutionTooCoarse: a, b and \"c\"";
  const auto cols = io::csv::split(io::csv::row(d));
  ASSERT_EQ(cols.size(), io::csv::split(io::csv::kDiagnosticsHeader).size());
  EXPECT_EQ(cols.back(), d.error);
  EXPECT_EQ(cols[4], "nan");
}

TEST(Csv, RealsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 4 * kPi, 1e-300, -2.5e17}) EXPECT_TRUE(same_bits(std::stod(io::csv::real(v)), v));
}
