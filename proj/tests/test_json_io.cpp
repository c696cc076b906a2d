#include <gtest/gtest.h>

#include <filesystem>

#include "test_helpers.hpp"
#include "uam/instgen.hpp"
#include "uam/json_io.hpp"

using namespace uam;
using namespace uam::testing;

template <typename T>
T round_trip(const T& x) {
  return Json::parse(Json(x).dump()).get<T>();
}

TEST(JsonIo, DemandsRoundTrip) {
  const auto ds = gen_demands(200, {}, 1);
  EXPECT_EQ(round_trip(ds), ds);
}

TEST(JsonIo, PoolingConfigRoundTrip) {
  PoolingConfig c;
  c.capacity = 6;
  c.t_premium = 12.5;
  c.lambda_p = 99;
  c.beam_width = 17;
  const auto back = round_trip(c);
  EXPECT_EQ(back.capacity, 6);
  EXPECT_DOUBLE_EQ(back.t_premium, 12.5);
  EXPECT_DOUBLE_EQ(back.lambda_p, 99);
  EXPECT_EQ(back.beam_width, 17);
}

TEST(JsonIo, RoutingInstanceRoundTrip) {
  auto inst = gen_routing_instance(4, 5, Scenario::Intermediate, 3);
  inst.config.vns.stagnation_limit = 7;
  inst.battery.soc_min = 50;
  EXPECT_EQ(round_trip(inst), inst);
}

TEST(JsonIo, DeadheadOnlyArcsSurvive) {
  auto net = uniform_network(3, 10, {30, 40, 80});
  net.legs = {{0, 1}};
  const auto back = round_trip(net);
  EXPECT_EQ(back.legs, net.legs);
  EXPECT_EQ(back.fly(2, 1), net.fly(2, 1));
  EXPECT_TRUE(back.has_leg(0, 1));
  EXPECT_FALSE(back.has_leg(2, 1));
}

TEST(JsonIo, RoutingSolutionRoundTrip) {
  const RoutingSolution s{{{{0, ChargePlan{3.5, 1.25, false, true}}, {4, {}}}, {}}, {1, 2}};
  EXPECT_EQ(round_trip(s), s);
}

TEST(JsonIo, DocumentsCarrySchemaVersion) {
  const auto ds = gen_demands(5, {}, 2);
  const auto doc = document("demands", {{"demands", ds}});
  EXPECT_EQ(doc.at("schema_version"), kSchemaVersion);
  EXPECT_EQ(read_document<std::vector<Demand>>(doc, "demands", "demands"), ds);
  EXPECT_THROW(read_document<std::vector<Demand>>(doc, "routing_instance", "demands"), InvalidInput);
  auto old = doc;
  old["schema_version"] = kSchemaVersion + 1;
  EXPECT_THROW(read_document<std::vector<Demand>>(old, "demands", "demands"), InvalidInput);
  auto broken = doc;
  broken["demands"][0].erase("passengers");
  EXPECT_THROW(read_document<std::vector<Demand>>(broken, "demands", "demands"), InvalidInput);
}

TEST(JsonIo, FilesRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "uam_json_io_test.json").string();
  const auto inst = gen_routing_instance(2, 3, Scenario::Low, 8);
  save_json(path, document("routing_instance", {{"instance", inst}}));
  EXPECT_EQ(read_document<RoutingInstance>(load_json(path), "routing_instance", "instance"), inst);
  std::filesystem::remove(path);
  EXPECT_THROW(load_json(path), InvalidInput);
}
