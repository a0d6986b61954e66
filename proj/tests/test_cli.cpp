#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "vlab/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = vlab::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return std::string(VLAB_CONFIG_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("vlab_test_" + name);
  std::ofstream(p) << text;
  return p.string();
}

nlohmann::json json_of(const Run& r) { return nlohmann::json::parse(r.out); }

}  // namespace

TEST_CASE("check on the x^4 defect pair fails with an evidence table") {
  const Run r = invoke({"check", "--config", config("rmk18a.cfg")});
  CHECK(r.code == 1);
  const auto j = json_of(r);
  CHECK(j["reports"][0]["condition"] == "touching");
  CHECK(j["reports"][0]["verdict"] == "fails");
  CHECK(j["reports"][1]["verdict"] == "holds");
  CHECK(j["reports"][0]["evidence"]["rows"].size() == 11);
  CHECK(j["config"]["resolved"]["exponents"]["p"] == "1 / (1 / 2 - 1 / x^2)");
}

TEST_CASE("norm matches the closed form") {
  const Run r = invoke({"norm", "--config", config("const_p.cfg")});
  CHECK(r.code == 0);
  const double n = json_of(r)["result"]["norm"];
  CHECK(std::fabs(n - 2 * std::cbrt(0.5)) <= 1e-10 * n);
}

TEST_CASE("reproduce compares against the golden file") {
  const Run r = invoke({"reproduce", "ex-1.2"});
  CHECK(r.code == 1);
  CHECK(json_of(r)["golden"] == "match");

  const fs::path dir = fs::temp_directory_path() / "vlab_golden_test";
  fs::create_directories(dir);
  std::ofstream(dir / "ex-1.2.csv") << "k,rho_f\n1,2\n";
  const Run bad = invoke({"reproduce", "ex-1.2", "--golden-dir", dir.string()});
  CHECK(bad.code == 2);
  CHECK(json_of(bad)["golden"] == "mismatch");
  CHECK(invoke({"reproduce", "ex-1.2", "--golden-dir", dir.string(), "--update-golden"}).code == 1);
  CHECK(invoke({"reproduce", "ex-1.2", "--golden-dir", dir.string()}).code == 1);
  CHECK(invoke({"reproduce", "no-such-example"}).code == 3);
}

TEST_CASE("identical configs give byte-identical reports") {
  for (const char* cfg : {"rmk18a.cfg", "ex12.cfg", "const_p.cfg"}) {
    const Run a = invoke({"check", "--config", config(cfg)});
    const Run b = invoke({"check", "--config", config(cfg)});
    CHECK(a.out == b.out);
  }
  const Run a = invoke({"falsify", "--config", config("ex12.cfg")});
  const Run b = invoke({"falsify", "--config", config("ex12.cfg")});
  CHECK(a.code == 1);
  CHECK(a.out == b.out);
}

TEST_CASE("exit codes across commands") {
  CHECK(invoke({"check", "--config", config("ex12.cfg")}).code == 1);
  CHECK(invoke({"check", "--config", config("ex19a.cfg")}).code == 0);
  CHECK(invoke({"check", "--config", config("ex19b.cfg")}).code == 1);
  CHECK(invoke({"omega", "--config", config("ex19c.cfg")}).code == 0);
  CHECK(invoke({"omega", "--config", config("rmk18a.cfg")}).code == 1);
  CHECK(invoke({"constants", "--config", config("bounded_pair.cfg")}).code == 0);
  CHECK(invoke({"constants", "--config", config("ex12.cfg")}).code == 1);
  CHECK(invoke({"maxop", "--config", config("maxop2d.cfg")}).code == 0);
  CHECK(invoke({"modular", "--config", config("const_p.cfg")}).code == 0);
  CHECK(invoke({"parse-check", "2 - 1/(1+x^2)"}).code == 0);
  CHECK(invoke({"bogus"}).code == 3);
  CHECK(invoke({"check", "--config", "/nonexistent.cfg"}).code == 3);
}

TEST_CASE("csv mode prints the series") {
  const Run r = invoke({"maxop", "--config", config("maxop2d.cfg"), "--csv"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("x,y,f,Mf,window_x,window_y,window_side\n", 0) == 0);
  const Run both = invoke({"maxop", "--config", config("maxop2d.cfg"), "--csv", "--json"});
  CHECK(both.code == 3);
}

TEST_CASE("csv files named in the config are written") {
  const fs::path out = fs::temp_directory_path() / "vlab_series.csv";
  fs::remove(out);
  const std::string cfg = temp_file("series.cfg", "[domain]\nlo = 0\nhi = 1\nh = 0.25\n[function]\nf = x\n[output]\ncsv = " +
                                                      out.string() + "\n");
  CHECK(invoke({"maxop", "--config", cfg}).code == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,f,Mf,window_lo,window_length");
}

TEST_CASE("config errors carry line and column") {
  const std::string missing_eq = temp_file("a.cfg", "[domain]\nlo = 0\nhi 1\n");
  Run r = invoke({"norm", "--config", missing_eq});
  CHECK(r.code == 3);
  CHECK(r.err.find(":3:5:") != std::string::npos);

  const std::string bad_expr =
      temp_file("b.cfg", "[domain]\nlo = 0\nhi = 1\nh = 0.5\n[exponents]\np = 2 +\n[function]\nf = 1\n");
  r = invoke({"norm", "--config", bad_expr});
  CHECK(r.code == 3);
  // "p = 2 +": the value starts at column 5 and ends after 3 characters.
  CHECK(r.err.find(":6:8:") != std::string::npos);
  CHECK(r.err.find("offset 4") != std::string::npos);

  const std::string bad_number = temp_file("c.cfg", "[domain]\nlo = 0\nhi = 1\nh = 0.5 *\n");
  r = invoke({"norm", "--config", bad_number});
  CHECK(r.code == 3);
  CHECK(r.err.find(":4:") != std::string::npos);

  const std::string unclosed = temp_file("d.cfg", "[domain\n");
  CHECK(invoke({"norm", "--config", unclosed}).code == 3);
}

TEST_CASE("parse-check reports expression offsets") {
  const Run r = invoke({"parse-check", "chi(0,1"});
  CHECK(r.code == 3);
  CHECK(json_of(r)["error"]["offset"] == 8);
  const Run ok = invoke({"parse-check", "2*loglog(x)/(loglog(x)-2)"});
  CHECK(json_of(ok)["canonical"] == "2 * loglog(x) / (loglog(x) - 2)");
}

TEST_CASE("bench compares fast and oracle") {
  const Run r = invoke({"bench", "--config", config("bench.cfg"), "--backend", "scalar"});
  CHECK(r.code == 0);
  CHECK(json_of(r)["table"].size() == 4);
  CHECK(invoke({"bench", "--backend", "neon"}).code == 3);
}
