#include "mekan/serialize.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace mekan;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mekan_ser_" + name);
  fs::remove_all(p);
  return p;
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST(Serialize, RoundTripIsBitExact) {
  BuildOptions o;
  o.seed = 12;
  o.init_sigma = 0.37;
  o.grid_size = 7;
  auto m = build({{2, 3, 2, 1}}, true, o);
  // Values with long decimal expansions and extreme exponents.
  m.trunk[0].acts[0].coeffs[0] = 1.0 / 3.0;
  m.trunk[0].acts[0].coeffs[1] = 5e-324;
  m.trunk[0].acts[0].coeffs[2] = -3.3e-300;
  m.trunk[1].acts[0].coeffs[0] = 123456.78901234567;
  m.trunk[0].acts[1].base_kind = BaseKind::Identity;
  const fs::path p = fresh_dir("model.json");
  save_model(m, p);
  const auto back = load_model(p);
  EXPECT_EQ(back.shape, m.shape);
  EXPECT_EQ(back.multi_exit, m.multi_exit);
  EXPECT_EQ(flatten_params(back), flatten_params(m));
  EXPECT_EQ(back.trunk[0].acts[1].base_kind, BaseKind::Identity);
  const Matrix x = Matrix::Random(25, 2);
  const auto a = forward(m, x), b = forward(back, x);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
  EXPECT_EQ(model_to_json(back), model_to_json(m));
}

TEST(Serialize, RejectsBadDocuments) {
  auto doc = model_to_json(build({{1, 1}}, false));
  EXPECT_EQ(doc.at("format_version"), kModelFormatVersion);
  auto wrong = doc;
  wrong["format_version"] = kModelFormatVersion + 1;
  EXPECT_THROW(model_from_json(wrong), Error);
  auto broken = doc;
  broken["trunk"][0]["activations"][0]["coeffs"] = nlohmann::json::array({1.0});
  EXPECT_THROW(model_from_json(broken), Error);
  EXPECT_THROW(model_from_json(nlohmann::json::object()), Error);
  EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}

TEST(Export, FileCountsAndRows) {
  const fs::path one = fresh_dir("one");
  const auto files = export_activations(build({{1, 1}}, false), one, 11);
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(files[0], "act_L0_J0_I0.csv");
  EXPECT_EQ(count_lines(one / files[0]), 12);
  EXPECT_TRUE(fs::exists(one / "index.csv"));

  const fs::path many = fresh_dir("many");
  const auto m = build({{2, 3, 2, 1}}, true);
  const auto all = export_activations(m, many, 5);
  EXPECT_EQ(all.size(), 19u);
  int exits = 0;
  for (const auto& f : all) {
    EXPECT_EQ(count_lines(many / f), 6);
    exits += f.rfind("act_exit", 0) == 0;
  }
  EXPECT_EQ(exits, 5);
  EXPECT_EQ(count_lines(many / "index.csv"), 20);

  std::ifstream in(many / all[0]);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "x,phi_x");
  const auto& act = m.trunk[0].acts[0];
  const double x = std::stod(first.substr(0, first.find(',')));
  EXPECT_EQ(x, act.grid.lo());
  EXPECT_EQ(std::stod(first.substr(first.find(',') + 1)), eval_activation(act, x));
  EXPECT_THROW(export_activations(m, many, 0), Error);
}
