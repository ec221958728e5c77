#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rwavg/demo.hpp"
#include "rwavg/io.hpp"

using namespace rwavg;
using nlohmann::json;

TEST(Envelope, CarriesSchemaAndConfig) {
  auto e = envelope("classify", json{{"N", 100}}, json{{"x", 1}});
  EXPECT_EQ(e["schema"], kSchemaTag);
  EXPECT_EQ(e["kind"], "classify");
  EXPECT_EQ(e["config"]["N"], 100);
  EXPECT_EQ(e["result"]["x"], 1);
}

TEST(Csv, RoundTripWithQuoting) {
  CsvTable t;
  t.columns = {"name", "value"};
  t.rows = {{"plain", "1"}, {"a,b", "say \"hi\""}};
  std::stringstream ss;
  write_csv(ss, "demo", json{{"delta", 0.02}}, t);
  const std::string text = ss.str();
  EXPECT_EQ(text.rfind("# schema=rwavg.result/1", 0), 0u);
  CsvTable back;
  auto cfg = read_csv(ss, back);
  EXPECT_EQ(cfg["delta"], 0.02);
  EXPECT_EQ(back.columns, t.columns);
  EXPECT_EQ(back.rows, t.rows);
  t.rows.push_back({"short"});
  std::stringstream bad;
  EXPECT_THROW(write_csv(bad, "demo", json::object(), t), IoError);
  std::stringstream noschema("name,value\n");
  EXPECT_THROW(read_csv(noschema, back), IoError);
}

TEST(Config, FileInlineAndOverrides) {
  const auto path = std::filesystem::temp_directory_path() / "rwavg_io_test.json";
  {
    std::ofstream out(path);
    out << R"({"N": 500, "delta": 0.05})";
  }
  auto cfg = json_arg(path.string());
  EXPECT_EQ(cfg["N"], 500);
  EXPECT_EQ(json_arg(R"({"family":"zd"})")["family"], "zd");
  EXPECT_EQ(json_arg("balls"), json("balls"));
  apply_overrides(cfg, {"N=800", "resolution=vertices", "radii=[4,8,16]"});
  EXPECT_EQ(cfg["N"], 800);
  EXPECT_EQ(cfg["resolution"], "vertices");
  EXPECT_EQ(cfg["radii"].size(), 3u);
  auto p = ClassifierParams::from_json(cfg);
  EXPECT_EQ(p.N, 800);
  EXPECT_THROW(apply_overrides(cfg, {"novalue"}), IoError);
  EXPECT_THROW(load_json_file((std::filesystem::temp_directory_path() / "missing_rwavg.json").string()), IoError);
  std::filesystem::remove(path);
}

TEST(Demo, CatalogAndExitCodes) {
  EXPECT_EQ(find_demo("bihom").expect_thermo, "unclassifiable");
  EXPECT_THROW(find_demo("nope"), std::invalid_argument);
  DemoRow ok, inc, bad;
  ok.match = true;
  inc.inconclusive = true;
  EXPECT_EQ(demo_exit_code({ok}), 0);
  EXPECT_EQ(demo_exit_code({ok, inc}), 2);
  EXPECT_EQ(demo_exit_code({inc, bad}), 1);
  auto specs = random_doubleprime_specs(5, 7);
  EXPECT_EQ(specs, random_doubleprime_specs(5, 7));
  for (auto& s : specs) {
    EXPECT_GE(s["params"]["k"].get<int>(), 3);
    EXPECT_LE(s["params"]["n"].get<int>(), 4);
  }
}
