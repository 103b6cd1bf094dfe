// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 only if
// all pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "properties.hpp"
#include "service_fixture.hpp"
#include "stylegraph/cli.hpp"

using namespace stylegraph;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "stylegraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "  stylegraph %s failed: %s", args[1].c_str(), e.str().c_str());
  return code;
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome timed_property(const std::function<std::string()>& check, double limit_s,
                       const std::string& summary) {
  const auto start = Clock::now();
  const std::string failure = check();
  const double took = seconds_since(start);
  std::ostringstream o;
  o << summary << ", " << took << " s (limit " << limit_s << " s)";
  if (!failure.empty()) o << ": " << failure;
  return {failure.empty() && took < limit_s, o.str()};
}

Outcome gradient_check() {
  properties::GradientStats stats;
  const auto start = Clock::now();
  const std::string failure = properties::check_gradients(200, 2024, 1e-4, &stats);
  const double took = seconds_since(start);
  std::ostringstream o;
  o << stats.instances << " instances, " << stats.parameters_checked
    << " parameters, max relative error " << stats.max_relative_error << " (< 1e-4), " << took
    << " s (limit 10 s)";
  if (!failure.empty()) o << ": " << failure;
  return {failure.empty() && stats.instances >= 100 && took < 10.0, o.str()};
}

Outcome synthetic_benchmark() {
  fixtures::TempDir dir("bench");
  const std::vector<std::string> data = {
      "--seed", "42", "--products", (dir / "p.jsonl").string(), "--images",
      (dir / "i.jsonl").string(), "--votes", (dir / "v.jsonl").string(), "--split",
      (dir / "s.json").string(), "--checkpoint", (dir / "m.json").string()};
  auto with = [&](std::initializer_list<std::string> extra) {
    auto args = data;
    args.insert(args.end(), extra);
    return args;
  };
  if (cli(with({"synth", "--n-products", "400", "--n-images", "1200", "--dim", "16",
                "--fidelity", "0.8"})) != 0 ||
      cli(with({"split"})) != 0) {
    return {false, "synth/split failed"};
  }
  const auto start = Clock::now();
  std::string train_out, eval_out;
  if (cli(with({"train"}), &train_out) != 0 || cli(with({"--k", "5", "eval"}), &eval_out) != 0) {
    return {false, "train/eval failed"};
  }
  const double took = seconds_since(start);
  auto t = key_values(train_out);
  auto e = key_values(eval_out);
  const std::size_t epochs = std::stoul(t["epochs"]);
  const double first = std::stod(t["first_loss"]);
  const double last = std::stod(t["final_loss"]);
  const double accuracy = std::stod(e["overall"]);
  const double retrieval = std::stod(e["retrieval"]);
  std::ostringstream o;
  o << "epochs " << epochs << " (<= 200), accuracy " << accuracy << " (>= 0.90), retrieval@5 "
    << retrieval << " (>= 0.80), loss " << first << " -> " << last << ", test images "
    << e["evaluated"] << ", " << took << " s (limit 60 s)";
  return {epochs <= 200 && accuracy >= 0.90 && retrieval >= 0.80 && last < first && took < 60.0,
          o.str()};
}

// split -> train -> embed -> graph build -> export, written under `dir`.
bool pipeline(const fixtures::TempDir& dir, const std::filesystem::path& catalog_dir) {
  const std::vector<std::string> data = {
      "--seed", "11", "--products", (catalog_dir / "p.jsonl").string(), "--images",
      (catalog_dir / "i.jsonl").string(), "--votes", (catalog_dir / "v.jsonl").string(),
      "--split", (dir / "s.json").string(), "--checkpoint", (dir / "m.json").string(),
      "--embeddings", (dir / "e.jsonl").string(), "--graph", (dir / "g.graphml").string(),
      "--epochs", "20", "--min-group-size", "5"};
  auto with = [&](std::initializer_list<std::string> extra) {
    auto args = data;
    args.insert(args.end(), extra);
    return args;
  };
  return cli(with({"split"})) == 0 && cli(with({"train"})) == 0 && cli(with({"embed"})) == 0 &&
         cli(with({"graph", "build"})) == 0 &&
         cli(with({"graph", "export", "--format", "gexf", "--out", (dir / "g.gexf").string()})) == 0 &&
         cli(with({"graph", "export", "--format", "edge-csv", "--out", (dir / "g.csv").string()})) == 0;
}

Outcome determinism() {
  fixtures::TempDir catalog("det_catalog");
  if (cli({"--seed", "42", "--products", (catalog / "p.jsonl").string(), "--images",
           (catalog / "i.jsonl").string(), "--votes", (catalog / "v.jsonl").string(), "synth"}) != 0) {
    return {false, "synth failed"};
  }
  fixtures::TempDir a("det_a"), b("det_b");
  if (!pipeline(a, catalog.path()) || !pipeline(b, catalog.path())) return {false, "pipeline failed"};
  std::vector<std::string> differing;
  const char* files[] = {"s.json", "m.json", "e.jsonl", "g.graphml", "g.gexf", "g.csv", "g.nodes.csv"};
  std::size_t bytes = 0;
  for (const char* f : files) {
    const std::string x = slurp(a / f), y = slurp(b / f);
    bytes += x.size();
    if (x.empty() || x != y) differing.push_back(f);
  }
  std::ostringstream o;
  o << "split, checkpoint, embeddings, graph (graphml, gexf, csv) compared, " << bytes << " bytes";
  for (const auto& d : differing) o << "; differs or empty: " << d;
  return {differing.empty(), o.str()};
}

Outcome service_conformance() {
  fixtures::ServiceFixture fx(400, 1200);
  DesignerService service(fx.config, fx.engine);
  HttpServer server(service);
  const int port = server.bind("127.0.0.1", 0);
  std::thread listener([&] { server.listen(); });
  const std::string over_http = fixtures::check_service_conformance(
      *fx.engine, fx.config.admin_token, fixtures::http_sender("127.0.0.1", port));
  server.stop();
  listener.join();
  const std::string in_process = fixtures::check_service_conformance(
      *fx.engine, fx.config.admin_token, [&](const HttpRequest& r) { return service.handle(r); });
  std::string detail = "all endpoints and error statuses over HTTP and in process";
  if (!over_http.empty()) detail += "; HTTP: " + over_http;
  if (!in_process.empty()) detail += "; in process: " + in_process;
  return {over_http.empty() && in_process.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"gradient correctness", gradient_check},
      {"comparison-label suite",
       [] {
         return timed_property([] { return properties::check_comparison_suite(1000, 7); }, 5.0,
                               "1000 randomized cases");
       }},
      {"synthetic 4-style benchmark", synthetic_benchmark},
      {"retrieval oracle",
       [] {
         return timed_property([] { return properties::check_top_k_oracle(1000, 200, 13); },
                               10.0, "1000 stores of size <= 200, bit-identical");
       }},
      {"graph pipeline invariant",
       [] {
         return timed_property([] { return properties::check_graph_pipeline(100, 17, 1e-9); },
                               10.0, "100 instances, tolerance 1e-9");
       }},
      {"export roundtrip",
       [] {
         const std::string failure = properties::check_export_roundtrip(50, 19);
         return Outcome{failure.empty(), "50 graphs x GraphML/GEXF/CSV" +
                                             (failure.empty() ? "" : ": " + failure)};
       }},
      {"determinism", determinism},
      {"service conformance", service_conformance},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
