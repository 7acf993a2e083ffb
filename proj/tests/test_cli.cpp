#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace {

const std::string kCli = DECPROV_CLI_PATH;
const std::string kData = DECPROV_DATA_DIR;

std::string tmp_dir() {
  std::string d = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                  "/decprov_cli_tests";
  if (std::system(("mkdir -p " + d).c_str()) != 0) FAIL("mkdir failed");
  return d;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string captured;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) captured.append(buf, n);
  int status = pclose(pipe);
  if (out) *out = captured;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string simulate(const std::string& log_path, int seed = 1) {
  std::string out;
  int rc = run_cli("simulate --scenario " + kData + "/smart-city.json --seed " +
                       std::to_string(seed) + " --out " + log_path + " --policy " + kData +
                       "/redaction-policy.json --rules " + kData + "/compliance-rules.json",
                   &out);
  REQUIRE(rc == 0);
  return out;
}

}  // namespace

TEST_CASE("simulate twice produces identical files and identical stdout") {
  std::string d = tmp_dir();
  std::string o1 = simulate(d + "/run1.jsonl");
  std::string o2 = simulate(d + "/run2.jsonl");
  CHECK(o1 == o2);
  CHECK(slurp(d + "/run1.jsonl") == slurp(d + "/run2.jsonl"));
  nlohmann::json j = nlohmann::json::parse(o1);
  CHECK(j.at("records").get<std::size_t>() > 0);
  CHECK(j.at("head_hash").get<std::string>().size() == 64);
}

TEST_CASE("verify: ok on untampered logs, exit 1 with index on tampered ones") {
  std::string d = tmp_dir();
  std::string log = d + "/verify.jsonl";
  simulate(log);

  std::string out;
  CHECK(run_cli("verify --log " + log, &out) == 0);
  CHECK(nlohmann::json::parse(out).at("ok") == true);

  std::string bytes = slurp(log);
  bytes[bytes.size() / 2] = bytes[bytes.size() / 2] == 'x' ? 'y' : 'x';
  std::ofstream(d + "/tampered.jsonl", std::ios::binary) << bytes;
  CHECK(run_cli("verify --log " + d + "/tampered.jsonl", &out) == 1);
  nlohmann::json j = nlohmann::json::parse(out);
  CHECK(j.at("ok") == false);
  CHECK(j.contains("first_bad_index"));
}

TEST_CASE("trace back from the redirect decision has 3 immediate sources") {
  std::string d = tmp_dir();
  std::string log = d + "/trace.jsonl";
  simulate(log);

  std::string out;
  int rc = run_cli("trace --log " + log +
                       " --id decision=redirect-ambulances --direction back --max-depth 1 "
                       "--format json",
                   &out);
  REQUIRE(rc == 0);
  nlohmann::json p = nlohmann::json::parse(out);
  CHECK(p.at("direction") == "backward");
  CHECK(p.at("nodes").size() == 4);  // the decision plus its three sources

  // text and dot renderings work too
  CHECK(run_cli("trace --log " + log + " --id decision=redirect-ambulances --format text",
                &out) == 0);
  CHECK(out.find("pipeline root=") != std::string::npos);
  CHECK(run_cli("trace --log " + log + " --id decision=redirect-ambulances --format dot",
                &out) == 0);
  CHECK(out.rfind("digraph pipeline {", 0) == 0);
}

TEST_CASE("actors and flows commands emit JSON arrays") {
  std::string d = tmp_dir();
  std::string log = d + "/actors.jsonl";
  simulate(log);

  std::string out;
  CHECK(run_cli("actors --log " + log + " --id decision=redirect-ambulances --direction back",
                &out) == 0);
  nlohmann::json actors = nlohmann::json::parse(out);
  CHECK(!actors.empty());

  CHECK(run_cli("flows --log " + log + " --id fault=bad_update --direction forward", &out) == 0);
  nlohmann::json flows = nlohmann::json::parse(out);
  CHECK(!flows.empty());
  for (const auto& f : flows) CHECK(f.at("boundary") != "none");
}

TEST_CASE("audit re-checks logged flows; breach report renders") {
  std::string d = tmp_dir();
  std::string log = d + "/audit.jsonl";
  simulate(log);

  std::string out;
  CHECK(run_cli("audit --log " + log + " --rules " + kData + "/compliance-rules.json", &out) == 0);
  nlohmann::json decisions = nlohmann::json::parse(out);
  CHECK(!decisions.empty());
  for (const auto& dj : decisions) CHECK(dj.at("reaction") == "allow");

  CHECK(run_cli("audit --log " + log + " --rules " + kData +
                    "/compliance-rules.json --breach-entity fault=bad_update --format text",
                &out) == 0);
  CHECK(out.find("DATA BREACH REPORT") != std::string::npos);
}

TEST_CASE("report and art30 render for every audience and controller") {
  std::string d = tmp_dir();
  std::string log = d + "/report.jsonl";
  simulate(log);

  std::string out, out2;
  for (const char* audience : {"regulator", "developer", "user"}) {
    CHECK(run_cli("report --log " + log + " --id decision=redirect-ambulances --audience " +
                      audience,
                  &out) == 0);
    CHECK(nlohmann::json::parse(out).at("audience") == audience);
  }
  // two renders are byte-identical
  run_cli("report --log " + log + " --id decision=redirect-ambulances --audience regulator",
          &out);
  run_cli("report --log " + log + " --id decision=redirect-ambulances --audience regulator",
          &out2);
  CHECK(out == out2);

  CHECK(run_cli("art30 --log " + log + " --controller EmerSolutions", &out) == 0);
  nlohmann::json rec = nlohmann::json::parse(out);
  CHECK(rec.at("controller").at("name") == "EmerSolutions");
  CHECK(run_cli("art30 --log " + log + " --controller EmerSolutions --format text", &out) == 0);
  CHECK(out.find("vehicle distribution") != std::string::npos);
}

TEST_CASE("investigate records the query and reports findings") {
  std::string d = tmp_dir();
  std::string log = d + "/investigate.jsonl";
  simulate(log);

  std::string out;
  CHECK(run_cli("investigate --log " + log + " --thread ambulance --out " + d +
                    "/investigated.jsonl",
                &out) == 0);
  nlohmann::json findings = nlohmann::json::parse(out);
  CHECK(findings.at("thread") == "ambulance");
  CHECK(findings.at("findings").size() == 2);

  // the recorded query is present in the written log and the chain still holds
  std::string grown = slurp(d + "/investigated.jsonl");
  CHECK(grown.size() > slurp(log).size());
  CHECK(grown.find("investigation thread: ambulance") != std::string::npos);
  CHECK(run_cli("verify --log " + d + "/investigated.jsonl", &out) == 0);

  CHECK(run_cli("investigate --log " + log + " --thread plumber --out " + d + "/x.jsonl",
                &out) == 1);
}

TEST_CASE("ingest gates payloads through a policy; expire tombstones by age") {
  std::string d = tmp_dir();
  std::string payloads = d + "/payloads.jsonl";
  {
    std::ofstream out(payloads);
    out << R"({"kind":"entity","id":"","timestamp":"2025-06-15T21:00:00.000Z","attrs":{"category":"camera","frame":"PD_SENTINEL_CLI","frame#pd":true}})"
        << "\n";
    out << R"({"kind":"entity","id":"","timestamp":"2025-06-15T21:00:01.000Z","attrs":{"category":"plain"}})"
        << "\n";
  }
  std::string log = d + "/ingest.jsonl";
  std::remove(log.c_str());
  std::string out;
  CHECK(run_cli("ingest --log " + log + " --payloads " + payloads + " --policy " + kData +
                    "/redaction-policy.json",
                &out) == 0);
  nlohmann::json results = nlohmann::json::parse(out);
  REQUIRE(results.size() == 2);
  CHECK(results[0].at("action") == "redact");
  CHECK(results[1].at("action") == "record_full");
  CHECK(slurp(log).find("PD_SENTINEL") == std::string::npos);

  // 31 days later the redaction policy's 30-day retention has lapsed
  CHECK(run_cli("expire --log " + log + " --policy " + kData +
                    "/redaction-policy.json --now 2025-07-16T21:00:00.000Z --out " + d +
                    "/expired.jsonl",
                &out) == 0);
  nlohmann::json exp = nlohmann::json::parse(out);
  CHECK(exp.at("tombstoned").size() == 1);
  CHECK(run_cli("verify --log " + d + "/expired.jsonl", &out) == 0);
}

TEST_CASE("exit codes: 1 for domain errors, 2 for usage errors") {
  std::string d = tmp_dir();
  std::string out;
  CHECK(run_cli("verify --log " + d + "/does-not-exist.jsonl", &out) == 1);
  CHECK(run_cli("frobnicate", &out) == 2);
  CHECK(run_cli("trace", &out) == 2);  // missing required --id

  std::string log = d + "/codes.jsonl";
  simulate(log);
  CHECK(run_cli("trace --log " + log + " --id n99999999", &out) == 1);
  CHECK(run_cli("trace --log " + log + " --id decision=redirect-ambulances --direction sideways",
                &out) == 1);
  CHECK(run_cli("report --log " + log + " --id decision=redirect-ambulances --audience lawyer",
                &out) == 1);
}
