#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "skelstat/io.hpp"
#include "test_support.hpp"

using namespace skelstat;
using namespace skelstat::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path tmp_dir(const std::string& name) {
  const fs::path dir = fs::path(SKELSTAT_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run(const std::string& args) {
  const fs::path err_file = fs::path(SKELSTAT_TEST_TMP) / "stderr.txt";
  fs::create_directories(err_file.parent_path());
  const std::string cmd = std::string("\"") + SKELSTAT_CLI_PATH + "\" " + args + " 2>\"" + err_file.string() + "\"";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_text_file(err_file);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

void write(const fs::path& p, const std::string& text) {
  std::FILE* f = std::fopen(p.string().c_str(), "w");
  REQUIRE(f != nullptr);
  std::fputs(text.c_str(), f);
  std::fclose(f);
}

void check_usage_error(const RunResult& r) {
  CHECK(r.exit_code == 2);
  // The error object is the last line of stderr.
  std::string line = r.err;
  while (!line.empty() && line.back() == '\n') line.pop_back();
  line = line.substr(line.rfind('\n') + 1);
  const json j = json::parse(line);
  CHECK(j.at("exit_code").get<int>() == 2);
  CHECK(j.contains("error"));
}

double lp_max_difference(const LpDsRep& a, const LpDsRep& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.spokes.size(); ++i) {
    d = std::max(d, (a.spokes[i].dir - b.spokes[i].dir).norm());
    d = std::max(d, std::abs(a.spokes[i].length - b.spokes[i].length));
  }
  for (size_t j = 0; j < a.frames.size(); ++j) {
    d = std::max(d, (a.frames[j].axes - b.frames[j].axes).cwiseAbs().maxCoeff());
    d = std::max(d, (a.connections[j].dir - b.connections[j].dir).norm());
    d = std::max(d, std::abs(a.connections[j].length - b.connections[j].length));
  }
  return d;
}

double scaled_size(const fs::path& lp) { return load_lp(lp).lp_size; }

fs::path simulate(const fs::path& dir, const std::string& config, const std::string& threads = "") {
  write(dir / "config.json", config);
  const RunResult r = run((threads.empty() ? "" : "--threads " + threads + " ") + "simulate " + q(dir / "config.json") +
                          " " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  return dir / "out";
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  check_usage_error(run(""));
  check_usage_error(run("frobnicate"));
  check_usage_error(run("reparam"));
  check_usage_error(run("reparam /nonexistent/in.json /tmp/out.json"));
  check_usage_error(run("test /nonexistent/a /nonexistent/b --out /tmp/x"));
}

TEST_CASE("reparam") {
  const fs::path dir = tmp_dir("reparam");
  const fs::path gp = fixture("ellipsoid_5x9_gp.json");

  const RunResult fwd = run("reparam " + q(gp) + " " + q(dir / "lp.json") + " --direction gp2lp --check");
  REQUIRE(fwd.exit_code == 0);
  const json report = json::parse(fwd.out);
  CHECK(report.at("round_trip").at("pass").get<bool>());
  CHECK(report.at("round_trip").at("max_position_error").get<double>() < 1e-8);
  CHECK(report.at("round_trip").at("max_direction_error").get<double>() < 1e-9);
  CHECK(report.at("n_points").get<int>() == 65);
  CHECK(report.at("K_lp").get<int>() == 546);
  CHECK(report.at("K_gp").get<int>() == 286);
  CHECK(file_kind(dir / "lp.json") == "lp");

  REQUIRE(run("reparam " + q(dir / "lp.json") + " " + q(dir / "back.json") + " --direction lp2gp").exit_code == 0);
  REQUIRE(run("reparam " + q(dir / "back.json") + " " + q(dir / "lp2.json") + " --direction gp2lp").exit_code == 0);
  CHECK(lp_max_difference(load_lp(dir / "lp.json"), load_lp(dir / "lp2.json")) < 1e-9);

  const RunResult scaled = run("reparam " + q(gp) + " " + q(dir / "scaled.json") + " --direction gp2lp --scale");
  REQUIRE(scaled.exit_code == 0);
  CHECK(std::abs(json::parse(scaled.out).at("lp_size").get<double>() - 1.0) < 1e-12);
  CHECK(load_lp(dir / "scaled.json").scaled);
  // A scaled LP keeps its original size, and lp2gp restores it by default.
  REQUIRE(run("reparam " + q(dir / "scaled.json") + " " + q(dir / "restored.json") + " --direction lp2gp").exit_code == 0);
  const GpDsRep restored = load_gp(dir / "restored.json");
  const GpDsRep direct = load_gp(dir / "back.json");
  CHECK((restored.skeletal_points - direct.skeletal_points).cwiseAbs().maxCoeff() < 1e-9);
  const RunResult half = run("reparam " + q(dir / "scaled.json") + " " + q(dir / "half.json") +
                             " --direction lp2gp --target-size " + std::to_string(scaled_size(dir / "lp.json") / 2));
  REQUIRE(half.exit_code == 0);
  CHECK((load_gp(dir / "half.json").skeletal_points - direct.skeletal_points / 2).cwiseAbs().maxCoeff() < 1e-6);
  check_usage_error(run("reparam " + q(gp) + " " + q(dir / "x.json") + " --direction sideways"));
}

TEST_CASE("simulate, mean and test") {
  const fs::path dir = tmp_dir("study");
  const fs::path out = simulate(dir, R"({"n_per_group": 5, "seed": 11})");
  int a = 0, b = 0;
  for (const auto& e : fs::directory_iterator(out / "groupA")) a += e.path().extension() == ".json";
  for (const auto& e : fs::directory_iterator(out / "groupB")) b += e.path().extension() == ".json";
  CHECK(a == 5);
  CHECK(b == 5);
  CHECK(fs::exists(out / "template.json"));
  CHECK(fs::exists(out / "study.json"));

  SUBCASE("reruns are byte identical across thread counts") {
    const fs::path again = simulate(tmp_dir("study_again"), R"({"n_per_group": 5, "seed": 11})", "1");
    for (const char* f : {"groupA/member_0000.json", "groupB/member_0004.json", "template.json"})
      CHECK(read_text_file(out / f) == read_text_file(again / f));
    const fs::path other = simulate(tmp_dir("study_other"), R"({"n_per_group": 5, "seed": 12})");
    CHECK(read_text_file(out / "groupB/member_0000.json") != read_text_file(other / "groupB/member_0000.json"));
  }
  SUBCASE("noise-free group A is the template") {
    const fs::path clean =
        simulate(tmp_dir("study_clean"), R"({"n_per_group": 2, "seed": 3, "noise": null, "bend": {"kappa": "inf"}})");
    const LpDsRep templ = load_lp(clean / "template.json");
    CHECK(lp_max_difference(load_lp(clean / "groupA/member_0001.json"), templ) == 0.0);
    CHECK(lp_max_difference(load_lp(clean / "groupB/member_0001.json"), templ) > 0.1);
  }
  SUBCASE("mean of a single member is that member") {
    const fs::path one = tmp_dir("mean_one");
    fs::copy_file(out / "groupA/member_0002.json", one / "m.json");
    const RunResult r = run("mean " + q(one) + " " + q(dir / "mean1.json"));
    REQUIRE(r.exit_code == 0);
    CHECK(lp_max_difference(load_lp(dir / "mean1.json"), load_lp(one / "m.json")) < 1e-9);
  }
  SUBCASE("mean with a template comparison") {
    const RunResult r = run("mean " + q(out / "groupA") + " " + q(dir / "mean.json") + " --compare " +
                            q(out / "template.json") + " --reconstruct " + q(dir / "mean_gp.json"));
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("members").get<int>() == 5);
    CHECK(j.at("compare").at("bound").get<double>() > 0.0);
    CHECK(j.at("compare").at("max_frame_deviation").get<double>() >= 0.0);
    CHECK(file_kind(dir / "mean.json") == "lp");
    CHECK(file_kind(dir / "mean_gp.json") == "gp");
  }
  SUBCASE("mean of an empty directory") { check_usage_error(run("mean " + q(tmp_dir("empty")) + " " + q(dir / "m.json"))); }
  SUBCASE("a group compared with itself") {
    const RunResult r =
        run("test " + q(out / "groupA") + " " + q(out / "groupA") + " --out " + q(dir / "self") + " --B 200 --seed 5");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    const int k = j.at("K").get<int>();
    CHECK(k == 726);
    CHECK(j.at("significant").at("raw").get<int>() <= 0.05 * k);
    CHECK(j.at("significant").at("bh").get<int>() == 0);
    for (const char* f : {"report.csv", "summary.json", "pvalues.svg"}) CHECK(fs::exists(dir / "self" / f));
  }
  SUBCASE("test output does not depend on the thread count") {
    const std::string args = "test " + q(out / "groupA") + " " + q(out / "groupB") + " --B 100 --seed 8 --out ";
    REQUIRE(run("--threads 1 " + args + q(dir / "t1")).exit_code == 0);
    REQUIRE(run("--threads 3 " + args + q(dir / "t3")).exit_code == 0);
    CHECK(read_text_file(dir / "t1/report.csv") == read_text_file(dir / "t3/report.csv"));
  }
  SUBCASE("GP and LP groups cannot be mixed") {
    const fs::path gp_dir = tmp_dir("gp_group");
    fs::copy_file(fixture("ellipsoid_5x9_gp.json"), gp_dir / "a.json");
    check_usage_error(run("test " + q(gp_dir) + " " + q(out / "groupA") + " --out " + q(dir / "mixed")));
  }
}

TEST_CASE("deform") {
  const fs::path dir = tmp_dir("deform");
  const fs::path lp = dir / "lp.json";
  REQUIRE(run("reparam " + q(fixture("ellipsoid_5x9_gp.json")) + " " + q(lp)).exit_code == 0);

  write(dir / "zero.json", R"({"nodes": [21], "angle": 0.0})");
  REQUIRE(run("deform " + q(lp) + " " + q(dir / "zero.json") + " " + q(dir / "same.json")).exit_code == 0);
  CHECK(read_text_file(dir / "same.json") == read_text_file(lp));

  write(dir / "bend.json", R"({"nodes": [19, 20, 21], "axis": "bperp", "angles": [0.2, -0.4, 0.3]})");
  write(dir / "unbend.json", R"({"nodes": [19, 20, 21], "axis": "bperp", "angles": [-0.2, 0.4, -0.3]})");
  REQUIRE(run("deform " + q(lp) + " " + q(dir / "bend.json") + " " + q(dir / "bent.json")).exit_code == 0);
  REQUIRE(run("deform " + q(dir / "bent.json") + " " + q(dir / "unbend.json") + " " + q(dir / "back.json")).exit_code == 0);
  CHECK(lp_max_difference(load_lp(dir / "bent.json"), load_lp(lp)) > 0.1);
  CHECK(lp_max_difference(load_lp(dir / "back.json"), load_lp(lp)) < 1e-9);

  write(dir / "bad.json", R"({"nodes": [999], "angle": 0.1})");
  check_usage_error(run("deform " + q(lp) + " " + q(dir / "bad.json") + " " + q(dir / "x.json")));
  write(dir / "root.json", R"({"nodes": [22], "angle": 0.1})");
  check_usage_error(run("deform " + q(lp) + " " + q(dir / "root.json") + " " + q(dir / "x.json")));
}

TEST_CASE("template") {
  const fs::path dir = tmp_dir("template");
  REQUIRE(run("template " + q(dir / "gp.json") + " --rows 5 --cols 9").exit_code == 0);
  CHECK(read_text_file(dir / "gp.json") == read_text_file(fixture("ellipsoid_5x9_gp.json")));
  REQUIRE(run("template " + q(dir / "slab.json") + " --slab").exit_code == 0);
  CHECK(file_kind(dir / "slab.json") == "lp");
  check_usage_error(run("template " + q(dir / "bad.json") + " --a 1 --b 2 --c 3"));
}
