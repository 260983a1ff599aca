#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qgnls/serialize.hpp"

using namespace qgnls;
using nlohmann::json;

TEST(Serialize, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Serialize, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, std::numbers::pi, -2.5e-300, 6.02214076e23, 0.0}) {
    const std::string s = format_double(x);
    double y = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    EXPECT_EQ(x, y) << s;
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(number(std::numeric_limits<double>::infinity()), json("inf"));
  EXPECT_EQ(number(1.5), json(1.5));
}

TEST(Serialize, VectorRoundTrip) {
  Vec v(4);
  v << 1.0, -0.1, 1e-300, std::numbers::e;
  EXPECT_EQ(vec_from_json(json::parse(vec_to_json(v).dump())), v);
}

TEST(Serialize, ConfigHashIsKeyOrderIndependent) {
  const json a = json::parse(R"({"p": 7, "mu": 0.1, "k": [2, 3]})");
  const json b = json::parse(R"({"k": [2, 3], "mu": 0.1, "p": 7})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(json::parse(R"({"p": 8, "mu": 0.1, "k": [2, 3]})")));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Serialize, ArtifactEnvelope) {
  const json cfg = {{"p", 7.0}};
  const json art = artifact("spectrum", cfg, json{{"x", 1}});
  EXPECT_EQ(art["schema"], std::string(kSchemaVersion));
  EXPECT_EQ(art["kind"], "spectrum");
  EXPECT_EQ(art["library_version"], library_version());
  EXPECT_EQ(art["config_hash"], config_hash(cfg));
  EXPECT_EQ(art["result"]["x"], 1);
  const std::string text = dump(art);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(text, dump(json::parse(text)));
}

TEST(Serialize, BranchCsvHeaderAndLineEndings) {
  BranchPoint b;
  b.mu = 0.01;
  b.pde_lambda = -0.99;
  std::ostringstream os;
  write_branch_csv(os, {b, b});
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "mu,pde_lambda,energy_ratio,kinetic_ratio,p_norm_ratio,h1_norm");
  EXPECT_EQ(s.find('\r'), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
  EXPECT_NE(s.find("0.01,-0.99,"), std::string::npos);
}

TEST(Serialize, TrajectoryCsv) {
  Trajectory t;
  TrajectoryState st;
  st.t = 0.5;
  st.energy = 1.0;
  st.mass = 2.0;
  t.states.push_back(st);
  std::ostringstream os;
  write_trajectory_csv(os, t, 2.0);
  EXPECT_EQ(os.str(), "t,E,mass_err,grad_norm,lambda_u,kinetic,cone_class\n0.5,1,0,0,0,0,IN_S_STAR\n");
}
