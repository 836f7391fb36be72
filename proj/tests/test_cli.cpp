#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

std::string bin() {
  const char* b = std::getenv("TMKIT_BIN");
  REQUIRE(b != nullptr);
  return b;
}

std::string corpus_path(const std::string& name) {
  const char* d = std::getenv("TM_CORPUS_DIR");
  REQUIRE(d != nullptr);
  return std::string(d) + "/" + name;
}

std::string data_path(const std::string& name) {
  const char* d = std::getenv("TM_TEST_DATA_DIR");
  REQUIRE(d != nullptr);
  return std::string(d) + "/" + name;
}

// run the CLI, capture stdout, drop stderr logs
CliResult run(const std::string& args) {
  std::string cmd = bin() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("check: clean model prints ok and exits 0") {
  CliResult r = run("check " + corpus_path("ordering.tm"));
  CHECK(r.code == 0);
  CHECK(r.out == "ok\n");
}

TEST_CASE("check: violations print one line each and exit 1") {
  CliResult r = run("check " + corpus_path("invalid_adjacency.tm"));
  CHECK(r.code == 1);
  CHECK(r.out.find("E_ADJ") != std::string::npos);
}

TEST_CASE("check: json report") {
  CliResult r = run("check " + corpus_path("invalid_backward.tm") + " --format json");
  CHECK(r.code == 1);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["ok"] == false);
  CHECK(j["violations"][0]["code"] == "E_BACKWARD");
}

TEST_CASE("check: parse errors exit 2 with positioned diagnostics") {
  CliResult r = run("check " + data_path("broken.tm"));
  CHECK(r.code == 2);
  CHECK(r.out.find(": error: ") != std::string::npos);
}

TEST_CASE("missing files exit 4") {
  CliResult r = run("check /no/such/file.tm");
  CHECK(r.code == 4);
}

TEST_CASE("usage problems exit 4") {
  CHECK(run("").code == 4);
  CHECK(run("frobnicate x.tm").code == 4);
  CHECK(run("render " + corpus_path("ordering.tm") + " --format yaml").code == 4);
}

TEST_CASE("render: dot by default, dsl and json on request") {
  CliResult dot = run("render " + corpus_path("sun_warmth.tm"));
  CHECK(dot.code == 0);
  CHECK(dot.out.rfind("digraph \"SunWarmth\" {", 0) == 0);

  CliResult dsl = run("render " + corpus_path("sun_warmth.tm") + " --format dsl");
  CHECK(dsl.code == 0);
  CHECK(dsl.out.rfind("model SunWarmth {", 0) == 0);

  CliResult js = run("render " + corpus_path("sun_warmth.tm") + " --format json");
  CHECK(js.code == 0);
  CHECK(nlohmann::json::parse(js.out)["tm_schema"] == 1);
}

TEST_CASE("render: --out writes the file instead of stdout") {
  std::filesystem::path out =
      std::filesystem::temp_directory_path() / "tmkit_cli_render_test.dot";
  std::filesystem::remove(out);
  CliResult r = run("render " + corpus_path("sun_warmth.tm") + " --out " +
                    out.string());
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(out);
  REQUIRE(in.good());
  std::string first;
  std::getline(in, first);
  CHECK(first == "digraph \"SunWarmth\" {");
  in.close();
  std::filesystem::remove(out);
}

TEST_CASE("render: unwritable --out exits 4") {
  CliResult r = run("render " + corpus_path("sun_warmth.tm") +
                    " --out /no/such/dir/out.dot");
  CHECK(r.code == 4);
}

TEST_CASE("render converts without validating; check owns the judgment") {
  CliResult r = run("render " + corpus_path("invalid_backward.tm"));
  CHECK(r.code == 0);
  CHECK(r.out.rfind("digraph \"BadLoop\" {", 0) == 0);
}

TEST_CASE("simulate: census, events and chronology verdict") {
  CliResult r = run("simulate " + corpus_path("ordering.tm") + " --scenario " +
                    corpus_path("ordering.never_paid.scenario") + " --events");
  CHECK(r.code == 0);
  CHECK(r.out.find("Order: created=1 deleted=1 exited=0 live=0\n") !=
        std::string::npos);
  CHECK(r.out.find("events: E1 E2 E3\n") != std::string::npos);
  CHECK(r.out.find("chronology: ok\n") != std::string::npos);
}

TEST_CASE("simulate: chronology violations exit 1 and name the pair") {
  CliResult r = run("simulate " + corpus_path("ordering.tm") + " --scenario " +
                    data_path("rush_payment.scenario") + " --events");
  CHECK(r.code == 1);
  CHECK(r.out.find("chronology: violation at (E1,E4)\n") != std::string::npos);
}

TEST_CASE("simulate: --trace - streams tsv to stdout") {
  CliResult r = run("simulate " + corpus_path("sun_warmth.tm") + " --scenario " +
                    corpus_path("sun_warmth.one_day.scenario") + " --trace -");
  CHECK(r.code == 0);
  CHECK(r.out.find("0\tcreate\t1\tSun.create\tWarmth {} injected\n") !=
        std::string::npos);
  CHECK(r.out.find("truncated") != std::string::npos);
}

TEST_CASE("simulate: scenario parse problems exit 2") {
  CliResult r = run("simulate " + corpus_path("ordering.tm") + " --scenario " +
                    data_path("broken.tm"));
  CHECK(r.code == 2);
}

TEST_CASE("simulate: runtime failures exit 3") {
  // no Order means Item.quantity is never set; the stock guard then aborts
  std::filesystem::path sc =
      std::filesystem::temp_directory_path() / "tmkit_cli_abort.scenario";
  {
    std::ofstream out(sc);
    out << "max_ticks 30\n"
        << "inject 0 Stock at OrderingSystem.Inventory.create {count=10}\n"
        << "inject 0 Payment at Customer.Payments.create {amount=5}\n";
  }
  CliResult r = run("simulate " + corpus_path("ordering.tm") + " --scenario " +
                    sc.string());
  CHECK(r.code == 3);
  CHECK(r.out.find("error: ") != std::string::npos);
  CHECK(r.out.find("has no attribute") != std::string::npos);
  std::filesystem::remove(sc);
}

TEST_CASE("events: lists ids, labels, anchors and chronology") {
  CliResult r = run("events " + corpus_path("ordering.tm"));
  CHECK(r.code == 0);
  CHECK(r.out.find("E1: An order is received.") != std::string::npos);
  CHECK(r.out.find("(anchor)") != std::string::npos);
  CHECK(r.out.find("E2 -> { E3 | E4 }") != std::string::npos);
}
