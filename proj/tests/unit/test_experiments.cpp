#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "renewal/error.hpp"
#include "renewal/experiments.hpp"

using namespace renewal;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelSpec fig2() { return ModelSpec{SizeDistribution(Geometric{0.25}), GapDistribution(Exponential{1.0}), 0.6}; }

}  // namespace

TEST_CASE("percentile") {
  CHECK(percentile({3, 1, 2}, 0.5) == 2.0);
  CHECK(percentile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(percentile({1, 2, 3, 4, 5}, 0.05) == doctest::Approx(1.2));
  CHECK(percentile({7}, 0.95) == 7.0);
  CHECK(std::isnan(percentile({}, 0.5)));
}

TEST_CASE("parallel_for") {
  std::vector<int> out(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw Error(Errc::InvalidArgument, "seven");
                  }),
                  Error);
}

TEST_CASE("studies do not depend on the worker count") {
  FwStudyConfig cfg{.model = fig2()};
  cfg.n = 200;
  const FwStudy a = run_fw_study(cfg, 6, 5, 1);
  const FwStudy b = run_fw_study(cfg, 6, 5, 3);
  CHECK(a.f_hat == b.f_hat);
  CHECK(a.sd_hat == b.sd_hat);

  FdStudyConfig fcfg{.model = fig2(), .n = 300, .fd = {}};
  const FdStudy c = run_fd_study(fcfg, 4, 9, 1);
  const FdStudy d = run_fd_study(fcfg, 4, 9, 2);
  CHECK(c.estimate == d.estimate);
  CHECK(c.failure == d.failure);
}

TEST_CASE("presets write reproducible files") {
  const auto root = std::filesystem::temp_directory_path() / "renewal_preset_test";
  std::filesystem::remove_all(root);
  PresetOptions opt;
  opt.reps = 4;
  opt.seed = 3;
  std::ostringstream log;
  run_preset("fig2", opt, (root / "a").string(), log);
  run_preset("fig2", opt, (root / "b").string(), log);
  for (const char* f : {"fw_percentiles.csv", "sd_percentiles.csv", "truth.csv", "regime.csv"}) {
    CHECK(std::filesystem::exists(root / "a" / f));
    CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));
  }
  CHECK(slurp(root / "a" / "fw_percentiles.csv").rfind("w,truth,p05,p50,p95\n", 0) == 0);

  opt.reps = 2;
  opt.bootstrap_B = 100;
  run_preset("fig5_case1", opt, (root / "c").string(), log);
  CHECK(std::filesystem::exists(root / "c" / "fd_percentiles.csv"));
  CHECK(std::filesystem::exists(root / "c" / "coverage.csv"));
  CHECK_THROWS_AS(run_preset("fig9", opt, (root / "d").string(), log), Error);
  std::filesystem::remove_all(root);
}
