#include <sstream>
#include <string>

#include "doctest.h"
#include "sepx/error.hpp"
#include "sepx/experiments.hpp"

using namespace sepx;

namespace {

const char* kBase = R"({"version": 1, "kernel": "nearest_neighbor", "profile": {"densities": [1.0]},
  "t_grid": [50, 100], "replicates": 200, "seed": 7})";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConfigInvalid);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parses and hashes deterministically") {
  auto a = parse_config(kBase);
  auto b = parse_config(kBase);
  CHECK(a.kernel.has_value());
  CHECK(a.profile->is_full());
  CHECK(a.t_grid.size() == 2);
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 8;
  refresh_canonical(b);
  CHECK(config_hash(a) != config_hash(b));
  b.seed = 7;
  b.workers = 3;
  b.out_dir = "elsewhere";
  refresh_canonical(b);
  CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("config errors name the field") {
  CHECK(config_error(R"({"version": 1, "bogus": 2})").find("bogus") != std::string::npos);
  CHECK(config_error(R"({"version": 2})").find("version") != std::string::npos);
  CHECK(config_error(R"({"kernel": "nearest_neighbor"})").find("version") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "t_grid": [5, 3]})").find("t_grid") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "profile": {"densities": [1.5]}})").find("profile") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "kernel": {"jumps": [[1, 0.3]]}})").find("kernel") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "asep": {"p": 0.6}})").find("asep.p") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "coupling": "glue"})").find("coupling") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "criteria": [13]})").find("criteria") != std::string::npos);
  CHECK(config_error("{not json").find("JSON") != std::string::npos);
}

TEST_CASE("gumbel table") {
  auto cfg = parse_config(kBase);
  auto sc = scaling_for(cfg, 100.0);
  auto law = law_for(cfg, 100.0);
  std::vector<ObservableSample> s(4);
  for (std::size_t i = 0; i < s.size(); ++i) s[i].x_t = 20 + static_cast<long>(i);
  std::ostringstream os;
  emit_gumbel_table(os, s, sc, 1.0, law, {0.0, 100.0});
  std::string out = os.str();
  CHECK(out.rfind("x,empirical,limit,gap\n", 0) == 0);
  CHECK(out.find("\n100,1,") != std::string::npos);
  CHECK(out.find("\nks,") != std::string::npos);
  CHECK_THROWS_AS(emit_gumbel_table(os, {}, sc, 1.0, law, {0.0}), Error);
}

TEST_CASE("sample lines are single json objects") {
  ObservableSample s;
  s.x_t = 12;
  s.order_stats = {12, 9};
  s.n_t = {{0.5, 3}};
  std::ostringstream os;
  write_sample_jsonl(os, s);
  CHECK(os.str().find("\"x_t\":12") != std::string::npos);
  CHECK(os.str().back() == '\n');
  CHECK(num(0.1) == "0.10000000000000001");
}
