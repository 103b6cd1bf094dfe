#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "stylegraph/cli.hpp"
#include "stylegraph/graph_io.hpp"
#include "stylegraph/retrieval.hpp"
#include "stylegraph/style_model.hpp"

using namespace stylegraph;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "stylegraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Small synthetic catalog on disk plus the common data flags.
struct Workspace {
  fixtures::TempDir dir{"cli"};
  std::vector<std::string> data;

  Workspace() {
    data = {"--products", (dir / "p.jsonl").string(), "--images", (dir / "i.jsonl").string(),
            "--votes",    (dir / "v.jsonl").string()};
    auto args = data;
    for (const char* a : {"synth", "--n-products", "60", "--n-images", "180", "--dim", "6"}) {
      args.push_back(a);
    }
    REQUIRE(run(args).code == 0);
  }

  std::vector<std::string> with(std::initializer_list<std::string> extra) const {
    auto args = data;
    args.insert(args.end(), extra);
    return args;
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("full file-staged pipeline") {
  Workspace ws;
  const Run v = run(ws.with({"validate"}));
  CHECK(v.code == 0);
  CHECK(v.out.find("products=60") != std::string::npos);

  REQUIRE(run(ws.with({"--split", ws.path("s.json"), "split"})).code == 0);
  const Run t = run(ws.with({"--split", ws.path("s.json"), "--checkpoint", ws.path("m.json"),
                             "--epochs", "30", "--hidden", "8", "train", "--history",
                             ws.path("h.json")}));
  REQUIRE(t.code == 0);
  const auto history = nlohmann::json::parse(slurp(ws.path("h.json")));
  CHECK(history["train_loss"].size() == 30);

  const Run e = run(ws.with({"--split", ws.path("s.json"), "--checkpoint", ws.path("m.json"), "eval"}));
  REQUIRE(e.code == 0);
  for (const char* key : {"overall=", "modern=", "traditional=", "cottage=", "coastal=",
                          "retrieval=", "evaluated="}) {
    CHECK(e.out.find(key) != std::string::npos);
  }

  REQUIRE(run(ws.with({"--checkpoint", ws.path("m.json"), "--embeddings", ws.path("e.jsonl"),
                       "embed"})).code == 0);
  const EmbeddingStore store = read_embeddings(ws.path("e.jsonl"));
  CHECK(store.images().size() == 180);
  CHECK(store.model_checksum() == model_checksum(load_checkpoint(ws.path("m.json"))));

  const Run g = run(ws.with({"--embeddings", ws.path("e.jsonl"), "--graph", ws.path("g.graphml"),
                             "--min-group-size", "2", "graph", "build"}));
  REQUIRE(g.code == 0);
  const ExportedGraph built = import_graph(ws.path("g.graphml"), ExportFormat::kGraphml);
  for (const auto& edge : built.edges) {
    CHECK(edge.weight >= 1.0);
    CHECK(edge.weight <= 10.0);
  }

  SUBCASE("graph export roundtrips") {
    REQUIRE(run({"--graph", ws.path("g.graphml"), "graph", "export", "--format", "gexf", "--out",
                 ws.path("g.gexf")}).code == 0);
    REQUIRE(run({"--graph", ws.path("g.gexf"), "graph", "export", "--format", "graphml", "--out",
                 ws.path("g2.graphml")}).code == 0);
    CHECK(import_graph(ws.path("g2.graphml"), ExportFormat::kGraphml) == built);
    CHECK(slurp(ws.path("g2.graphml")) == slurp(ws.path("g.graphml")));
    REQUIRE(run({"--graph", ws.path("g.graphml"), "graph", "export", "--groups", "--format",
                 "edge-csv", "--out", ws.path("groups.csv")}).code == 0);
    CHECK(std::filesystem::exists(ws.path("groups.nodes.csv")));
  }

  SUBCASE("recommend") {
    const Run r = run({"--embeddings", ws.path("e.jsonl"), "--k", "3", "recommend", "--sku",
                       "SKU00001"});
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
    const Run bad = run({"--embeddings", ws.path("e.jsonl"), "recommend", "--sku", "UNKNOWN"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("UNKNOWN") != std::string::npos);
    const Run freq = run({"--embeddings", ws.path("e.jsonl"), "recommend", "--frequency",
                          "--top-n", "4"});
    CHECK(freq.code == 0);
    CHECK(nlohmann::json::parse(freq.out)["top"].size() == 4);
  }

  SUBCASE("score and gaps") {
    const Run s = run(ws.with({"--checkpoint", ws.path("m.json"), "--embeddings",
                               ws.path("e.jsonl"), "--graph", ws.path("g.graphml"), "score",
                               "--features", "0.1,0.2,0.3,0.4,0.5,0.6"}));
    REQUIRE(s.code == 0);
    CHECK(nlohmann::json::parse(s.out).contains("similarity_score"));
    const Run wrong = run(ws.with({"--checkpoint", ws.path("m.json"), "score", "--features", "1,2"}));
    CHECK(wrong.code == 1);
    const Run gaps = run({"--graph", ws.path("g.graphml"), "gaps"});
    CHECK(gaps.code == 0);
    CHECK(nlohmann::json::parse(gaps.out).contains("zero_weight_pairs"));
  }
}

TEST_CASE("train with the same seed twice gives identical checkpoints") {
  Workspace ws;
  for (const char* name : {"a.json", "b.json"}) {
    REQUIRE(run(ws.with({"--seed", "7", "--epochs", "5", "--checkpoint", ws.path(name), "train"}))
                .code == 0);
  }
  CHECK(slurp(ws.path("a.json")) == slurp(ws.path("b.json")));
  REQUIRE(run(ws.with({"--seed", "8", "--epochs", "5", "--checkpoint", ws.path("c.json"), "train"}))
              .code == 0);
  CHECK(slurp(ws.path("a.json")) != slurp(ws.path("c.json")));
}

TEST_CASE("config file values yield to explicit flags") {
  Workspace ws;
  fixtures::write(ws.dir / "cfg.json", nlohmann::json{{"epochs", 4}, {"seed", 3}}.dump());
  REQUIRE(run(ws.with({"--config", ws.path("cfg.json"), "--checkpoint", ws.path("a.json"), "train",
                       "--history", ws.path("ha.json")})).code == 0);
  CHECK(nlohmann::json::parse(slurp(ws.path("ha.json")))["train_loss"].size() == 4);
  REQUIRE(run(ws.with({"--config", ws.path("cfg.json"), "--epochs", "2", "--checkpoint",
                       ws.path("b.json"), "train", "--history", ws.path("hb.json")})).code == 0);
  CHECK(nlohmann::json::parse(slurp(ws.path("hb.json")))["train_loss"].size() == 2);
  fixtures::write(ws.dir / "broken.json", "{epochs: ");
  CHECK(run(ws.with({"--config", ws.path("broken.json"), "validate"})).code == 1);
}

TEST_CASE("exit codes") {
  Workspace ws;
  CHECK(run({"--products", ws.path("missing.jsonl"), "--images", ws.path("i.jsonl"), "--votes",
             ws.path("v.jsonl"), "validate"}).code == 2);
  CHECK(run({"--no-such-flag", "validate"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run(ws.with({"--checkpoint", ws.path("missing.json"), "eval"})).code == 2);

  fixtures::write(ws.dir / "bad.jsonl", "{\"image_id\":\"IMG00000\",\"skus\":[\"NOPE\"],\"features\":[1,2,3,4,5,6]}\n");
  const Run dangling = run({"--products", ws.path("p.jsonl"), "--images", ws.path("bad.jsonl"),
                            "--votes", ws.path("v.jsonl"), "validate"});
  CHECK(dangling.code == 1);
  CHECK(dangling.err.find("NOPE") != std::string::npos);
}

}  // TEST_SUITE
