#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <sstream>

#include "qrtrig/io.hpp"

using namespace qrtrig;

TEST(FormatDouble, RoundTrips) {
  Sampler s(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(s.uniform(-1, 1), static_cast<int>(s.uniform_int(-300, 300)));
    const std::string t = format_double(v);
    double back = 0;
    std::from_chars(t.data(), t.data() + t.size(), back);
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(ItineraryJson, RoundTrip) {
  const Itinerary it(3, {TrayIndex({1, 0}, -1), TrayIndex({0, 0}, 1)},
                     {TrayIndex({1, 1}, 1), TrayIndex({2, 0}, 1)});
  const json j = itinerary_to_json(it);
  const Itinerary back = itinerary_from_json(json::parse(j.dump()));
  EXPECT_EQ(back.prefix(), it.prefix());
  EXPECT_EQ(back.cycle(), it.cycle());
  EXPECT_EQ(j["prefix"][0], json::parse("[[1,0],-1]"));
}

TEST(ItineraryJson, ParityErrorNamesPair) {
  const json j = json::parse(R"({"dim":2,"prefix":[[[0],1],[[0],-1]],"cycle":[[[0],1]]})");
  try {
    itinerary_from_json(j);
    FAIL();
  } catch (const InvalidItinerary& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("index 0"), std::string::npos);
    EXPECT_NE(msg.find("index 1"), std::string::npos);
  }
}

TEST(ItineraryJson, MalformedInput) {
  EXPECT_THROW(itinerary_from_json(json::parse(R"({"dim":2})")), InvalidItinerary);
  EXPECT_THROW(itinerary_from_json(json::parse(R"({"dim":2,"cycle":[[0,1]]})")), InvalidItinerary);
  EXPECT_THROW(itinerary_from_json(json::parse(R"({"dim":2,"cycle":[[[0],2]]})")), InvalidItinerary);
  EXPECT_THROW(load_itinerary("/nonexistent/it.json"), Error);
}

TEST(Csv, OrbitLayout) {
  const MapParams p = validate_params(2, 4.3, 0.256);
  const OrbitRecord o = iterate(Point::Zero(2), 5, p);
  const std::string csv = orbit_csv(o, {2, p.lambda, 0});
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("# dim=2 lambda=" + format_double(p.lambda) + " depth=5", 0), 0u);
  EXPECT_NE(line.find("version="), std::string::npos);
  int rows = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(line, std::to_string(rows) + ",0,0");
    ++rows;
  }
  EXPECT_EQ(rows, 6);
}

TEST(Csv, HairRoundTripsThroughPointReader) {
  const MapParams p = validate_params(2, 8.0, 0.25);
  const Itinerary it(2, {}, {TrayIndex({1}, 1), TrayIndex({1}, -1)});
  const HairTrace h = hair_trace(it, 3, 10, 50, p);
  std::istringstream is(hair_csv(h, {2, p.lambda, 7}));
  const auto pts = read_points_csv(is);
  ASSERT_EQ(pts.size(), h.samples.size());
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(pts[i], h.samples[i].point);
}

TEST(Csv, PointReaderErrors) {
  std::istringstream bad("0.1,0.2\n0.3,oops\n");
  EXPECT_THROW(read_points_csv(bad), Error);
  std::istringstream ragged("0.1,0.2\n0.3,0.4,0.5\n");
  EXPECT_THROW(read_points_csv(ragged), Error);
  std::istringstream plain("# comment\n\n0.5, 0.25\n");
  const auto pts = read_points_csv(plain);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0], make_point({0.5, 0.25}));
}

TEST(Csv, GridRecords) {
  const MapParams p = validate_params(2, 4.3, 0.256);
  SliceSpec s;
  s.base = Point::Zero(2);
  s.window = {-1, 1, -1, 1};
  s.width = 2;
  s.height = 2;
  const ImageGrid g = render_slice(s, p, 4);
  std::istringstream is(grid_csv(g, s, {2, p.lambda, 0}, 4));
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  EXPECT_EQ(line.rfind("-0.5,0.5,", 0), 0u);
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Json, ConstantsKeys) {
  ConstantsReport r;
  r.info = {2, 4.3, 1};
  const json j = constants_to_json(r);
  for (const char* k : {"dim", "lambda", "beta_hat", "alpha_hat", "delta_hat", "K_hat", "K_O_hat",
                        "K_I_hat", "M_hat", "seed", "samples", "version"})
    EXPECT_TRUE(j.contains(k)) << k;
}
