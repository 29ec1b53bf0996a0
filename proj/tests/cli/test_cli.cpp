#include "wavetrain/report.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace wavetrain;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

fs::path tmp_dir() {
  static const fs::path dir = [] {
    fs::path d = WAVETRAIN_TEST_TMP;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  const std::string cmd = "cd '" + tmp_dir().string() + "' && '" WAVETRAIN_CLI_PATH "' " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

// Checks that every element opened in the document is closed in order, that
// attribute quotes balance, and that there is exactly one root element.
bool well_formed_xml(const std::string& doc, std::string& why) {
  std::vector<std::string> stack;
  size_t i = 0, roots = 0;
  while ((i = doc.find('<', i)) != std::string::npos) {
    const size_t end = doc.find('>', i);
    if (end == std::string::npos) {
      why = "unterminated tag";
      return false;
    }
    const std::string tag = doc.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) {
      why = "empty tag";
      return false;
    }
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (std::count(tag.begin(), tag.end(), '"') % 2) {
      why = "unbalanced quotes in <" + tag + ">";
      return false;
    }
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) {
        why = "mismatched </" + name + ">";
        return false;
      }
      stack.pop_back();
      continue;
    }
    const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
    if (stack.empty()) ++roots;
    if (tag.back() != '/') stack.push_back(name);
  }
  if (!stack.empty()) {
    why = "unclosed <" + stack.back() + ">";
    return false;
  }
  if (roots != 1) {
    why = "expected one root element";
    return false;
  }
  // Text content must not carry raw markup characters.
  if (std::regex_search(doc, std::regex(">[^<]*&(?!(amp|lt|gt|quot|apos);)"))) {
    why = "unescaped ampersand";
    return false;
  }
  return true;
}

}  // namespace

TEST_CASE("analyze reports the Hopf picture of System B") {
  const auto r = run("analyze --preset B --v 2");
  CHECK(r.code == 0);
  for (const char* key : {"critical_speeds = -2, 2", "omega = 0.7071067811865476", "regime = a", "hopf_A = 0.5625",
                          "volume_rate = -3 (contracting)", "transversality_rate", "routh_hurwitz[b1 > 0]"})
    CHECK_MESSAGE(contains(r.out, key), key);
}

TEST_CASE("analyze flags the degenerate Hopf point of System A") {
  const auto r = run("analyze --preset A --v 0.1");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "degenerate_hopf"));
  CHECK(contains(r.out, "-0.5714285714"));
}

TEST_CASE("analyze for System E") {
  const auto r = run("analyze --preset E --v 1.8");
  CHECK(r.code == 0);
  std::smatch m;
  REQUIRE(std::regex_search(r.out, m, std::regex("hopf_A = ([-0-9.e]+)")));
  CHECK(std::abs(std::stod(m[1]) - 0.39) < 0.01);
  REQUIRE(std::regex_search(r.out, m, std::regex("critical_speeds = ([-0-9.e]+), ([-0-9.e]+)")));
  CHECK(std::stod(m[1]) == doctest::Approx(-std::stod(m[2])));
}

TEST_CASE("structured analyze output matches the library") {
  for (const char* preset : {"A", "B", "C", "D", "E"}) {
    const auto r = run(std::string("analyze --preset ") + preset + " --v 1.25 --format structured");
    REQUIRE(r.code == 0);
    const auto parsed = report_from_json(r.out);
    const auto direct = analyze(make_preset(parse_system_id(preset)), 1.25);
    CHECK_MESSAGE(parsed == direct, preset);
  }
}

TEST_CASE("exit codes") {
  CHECK(run("analyze --preset B --v 1").code == 0);
  CHECK(run("analyze --preset Q --v 1").code == 1);
  CHECK(run("analyze --v 1").code == 1);
  CHECK(run("analyze --preset B --v 1 --format pdf").code == 1);
  CHECK(run("analyze --preset B --v 1 --param zzz=1").code == 1);
  CHECK(run("analyze --preset B --config missing.cfg --v 1").code == 1);
  CHECK(run("sweep --preset B").code == 1);
  CHECK(run("simulate --preset B --v 1 --span 5:1").code == 1);
  CHECK(run("bogus").code == 1);

  const auto no_fp = run("analyze --preset B --param gamma=2 --v 1");
  CHECK(no_fp.code == 2);
  CHECK(contains(no_fp.out, "N0 = -1"));

  const auto stiff = run("simulate --preset B --v 1.9 --rel-tol 1e-30 --abs-tol 1e-300");
  CHECK(stiff.code == 3);

  const auto blow = run("diagnose --preset D --v -0.2");
  CHECK(blow.code == 4);
  CHECK(contains(blow.out, "diagnostics require bounded dynamics"));
}

TEST_CASE("blow-up is an ordinary simulate outcome") {
  const auto r = run("simulate --preset D --v -0.2 --out blow");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "classification = blowup"));
  std::smatch m;
  REQUIRE(std::regex_search(r.out, m, std::regex("zeta_star = ([0-9.e]+)")));
  CHECK(std::abs(std::stod(m[1]) - 6.38) < 0.07);
  const auto meta = nlohmann::json::parse(slurp(tmp_dir() / "blow" / "trajectory.meta.json"));
  CHECK(meta["termination"] == "blowup");
}

TEST_CASE("simulate writes its artifacts") {
  const auto r = run("simulate --preset B --v 1.9 --span 0:300 --format text,csv,svg,structured --out sim");
  REQUIRE(r.code == 0);
  const fs::path dir = tmp_dir() / "sim";
  for (const char* f : {"trajectory.csv", "trajectory.meta.json", "trajectory.svg", "simulate.json"})
    CHECK_MESSAGE(fs::exists(dir / f), f);
  std::istringstream csv(slurp(dir / "trajectory.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "zeta,N,M,P,Q");
  size_t rows = 0;
  for (std::string line; std::getline(csv, line);) rows += !line.empty();
  CHECK(rows == 6001);
  const auto summary = nlohmann::json::parse(slurp(dir / "simulate.json"));
  CHECK(summary["oscillation"]["classification"] == "aperiodic_bounded");
  CHECK(summary["samples"] == 6001);
}

TEST_CASE("SVG output is well formed and deterministic") {
  const std::string diag = "diagnose --preset B --v 1.9 --span 0:1000 --transient 0.5 --embed-dim 3 --format csv,svg,structured";
  const auto a = run(diag + " --out svg_a --jobs 1");
  const auto b = run(diag + " --out svg_b --jobs 8");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  REQUIRE(run("simulate --preset B --v 1.9 --format svg --out svg_a").code == 0);
  REQUIRE(run("simulate --preset B --v 1.9 --format svg --out svg_b").code == 0);
  REQUIRE(run("sweep --preset D --v-range -6:-4.5:7 --format svg --out svg_a").code == 0);
  REQUIRE(run("sweep --preset D --v-range -6:-4.5:7 --format svg --out svg_b --jobs 1").code == 0);
  size_t svgs = 0;
  for (const auto& entry : fs::directory_iterator(tmp_dir() / "svg_a")) {
    const auto name = entry.path().filename();
    const auto doc = slurp(entry.path());
    CHECK_MESSAGE(doc == slurp(tmp_dir() / "svg_b" / name), name.string());
    if (entry.path().extension() != ".svg") continue;
    ++svgs;
    std::string why;
    CHECK_MESSAGE(well_formed_xml(doc, why), name.string() << ": " << why);
    CHECK(contains(doc, "<polyline"));
  }
  CHECK(svgs == 6);
}

TEST_CASE("diagnose summary for the System B limit cycle") {
  const auto r = run("diagnose --preset B --v 1.9 --span 0:1000 --transient 0.5 --embed-dim 3 --format text,structured --out lc");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(tmp_dir() / "lc" / "diagnose.json"));
  CHECK(j["spectral_flatness"].get<double>() < 0.01);
  REQUIRE(j["fractal_dimension"].is_number());
  CHECK(std::abs(j["fractal_dimension"].get<double>() - 1.0) < 0.15);
}

TEST_CASE("sweep brackets the critical speeds") {
  const auto b = run("sweep --preset B --v-range 1.5:2.5:11 --format csv,structured --out sweep_b");
  REQUIRE(b.code == 0);
  const auto jb = nlohmann::json::parse(slurp(tmp_dir() / "sweep_b" / "sweep.json"));
  REQUIRE(jb.size() == 11);
  for (const auto& row : jb) {
    const double v = row["v"];
    if (row["c4_sign_change"]) CHECK((v > 1.9 - 1e-12 && v < 2.1 + 1e-12));
    if (v > 2.05) CHECK(row["stable"] == true);
    if (v < 1.95) CHECK(row["stable"] == false);
  }

  const auto d = run("sweep --preset D --v-range -6:-4.5:7 --format structured --out sweep_d");
  REQUIRE(d.code == 0);
  const auto jd = nlohmann::json::parse(slurp(tmp_dir() / "sweep_d" / "sweep.json"));
  int changes = 0;
  for (size_t i = 0; i < jd.size(); ++i) {
    if (!jd[i]["c4_sign_change"]) continue;
    ++changes;
    CHECK(jd[i - 1]["v"].get<double>() < -5.03);
    CHECK(jd[i]["v"].get<double>() > -5.03);
  }
  CHECK(changes == 1);

  const auto s1 = run("sweep --preset B --v-range 1.8:2.4:4 --simulate --span 0:100 --format csv --out sweep_s1 --jobs 1");
  const auto s8 = run("sweep --preset B --v-range 1.8:2.4:4 --simulate --span 0:100 --format csv --out sweep_s8 --jobs 8");
  REQUIRE(s1.code == 0);
  REQUIRE(s8.code == 0);
  CHECK(slurp(tmp_dir() / "sweep_s1" / "sweep.csv") == slurp(tmp_dir() / "sweep_s8" / "sweep.csv"));
  for (int i = 0; i < 4; ++i) {
    const auto name = "trajectory_" + std::to_string(i) + ".csv";
    CHECK(slurp(tmp_dir() / "sweep_s1" / name) == slurp(tmp_dir() / "sweep_s8" / name));
  }
}

TEST_CASE("config files with flag overrides") {
  {
    std::ofstream cfg(tmp_dir() / "b.cfg");
    cfg << "# System B near its critical speed\nsystem = B\nv = 1.5\ngamma = -2\n";
  }
  const auto file_only = run("analyze --config b.cfg --format structured");
  REQUIRE(file_only.code == 0);
  CHECK(report_from_json(file_only.out).v == 1.5);

  const auto overridden = run("analyze --config b.cfg --v 2 --param alpha=-1 --format structured");
  REQUIRE(overridden.code == 0);
  const auto rep = report_from_json(overridden.out);
  CHECK(rep.v == 2.0);
  CHECK(rep == analyze(make_preset(SystemId::B, {{Param::alpha, -1.0}}), 2.0));

  {
    std::ofstream bad(tmp_dir() / "bad.cfg");
    bad << "system = B\nthis line has no separator\n";
  }
  CHECK(run("analyze --config bad.cfg --v 1").code == 1);

  const auto presets = run("presets");
  CHECK(presets.code == 0);
  for (const char* s : {"system = A", "system = B", "system = C", "system = D", "system = E"})
    CHECK(contains(presets.out, s));
}
