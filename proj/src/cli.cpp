#include "stylegraph/cli.hpp"

#include <csignal>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "io_util.hpp"
#include "stylegraph/catalog.hpp"
#include "stylegraph/comparisons.hpp"
#include "stylegraph/designer.hpp"
#include "stylegraph/errors.hpp"
#include "stylegraph/graph_io.hpp"
#include "stylegraph/json_codec.hpp"
#include "stylegraph/retrieval.hpp"
#include "stylegraph/service.hpp"
#include "stylegraph/simgraph.hpp"
#include "stylegraph/style_model.hpp"
#include "stylegraph/synth.hpp"

namespace stylegraph {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Resolved settings for one command: defaults, then the --config file, then
// explicit flags.
struct RunConfig {
  fs::path products;
  fs::path images;
  fs::path votes;
  fs::path checkpoint;
  fs::path embeddings;
  fs::path graph;
  fs::path split;
  std::uint64_t seed = 42;
  std::size_t k = 5;
  double w_min = 1.0;
  double w_max = 10.0;
  std::size_t min_group_size = 10;
  int threshold_x = TrainConfig{}.threshold_x;
  std::size_t epochs = TrainConfig{}.epochs;
  double lr = TrainConfig{}.learning_rate;
  std::size_t batch_size = TrainConfig{}.batch_size;
  std::size_t comparisons_per_epoch = TrainConfig{}.comparisons_per_epoch;
  std::size_t hidden = 32;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string admin_token;

  CatalogPaths catalog() const { return {products, images, votes}; }
  GraphFilterConfig filter() const { return {w_min, w_max, min_group_size}; }
  TrainConfig train() const {
    TrainConfig c;
    c.learning_rate = lr;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.comparisons_per_epoch = comparisons_per_epoch;
    c.threshold_x = threshold_x;
    c.seed = seed;
    return c;
  }
};

// Flag values as parsed; unset optionals fall back to the config file.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> products, images, votes, checkpoint, embeddings, graph, split;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k, min_group_size, epochs, batch_size, comparisons_per_epoch, hidden;
  std::optional<double> w_min, w_max, lr;
  std::optional<int> threshold_x, port;
  std::optional<std::string> host, admin_token;
};

template <typename T>
void take(const json& doc, const char* key, T& target) {
  if (auto it = doc.find(key); it != doc.end() && !it->is_null()) target = it->get<T>();
}

template <typename T, typename U>
void take(const std::optional<U>& flag, T& target) {
  if (flag) target = static_cast<T>(*flag);
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (f.config) {
    json doc;
    try {
      doc = json::parse(detail::read_text_file(*f.config));
    } catch (const json::parse_error& e) {
      throw ValidationError("config file '" + *f.config + "' is not valid JSON: " + e.what());
    }
    try {
      std::string s;
      auto path = [&](const char* key, fs::path& target) {
        s.clear();
        take(doc, key, s);
        if (!s.empty()) target = s;
      };
      path("products", c.products);
      path("images", c.images);
      path("votes", c.votes);
      path("checkpoint", c.checkpoint);
      path("embeddings", c.embeddings);
      path("graph", c.graph);
      path("split", c.split);
      take(doc, "seed", c.seed);
      take(doc, "k", c.k);
      take(doc, "wmin", c.w_min);
      take(doc, "wmax", c.w_max);
      take(doc, "min_group_size", c.min_group_size);
      take(doc, "threshold_x", c.threshold_x);
      take(doc, "epochs", c.epochs);
      take(doc, "lr", c.lr);
      take(doc, "batch_size", c.batch_size);
      take(doc, "comparisons_per_epoch", c.comparisons_per_epoch);
      take(doc, "hidden", c.hidden);
      take(doc, "host", c.host);
      take(doc, "port", c.port);
      take(doc, "admin_token", c.admin_token);
    } catch (const json::exception& e) {
      throw ValidationError("config file '" + *f.config + "': " + e.what());
    }
  }
  take(f.products, c.products);
  take(f.images, c.images);
  take(f.votes, c.votes);
  take(f.checkpoint, c.checkpoint);
  take(f.embeddings, c.embeddings);
  take(f.graph, c.graph);
  take(f.split, c.split);
  take(f.seed, c.seed);
  take(f.k, c.k);
  take(f.w_min, c.w_min);
  take(f.w_max, c.w_max);
  take(f.min_group_size, c.min_group_size);
  take(f.threshold_x, c.threshold_x);
  take(f.epochs, c.epochs);
  take(f.lr, c.lr);
  take(f.batch_size, c.batch_size);
  take(f.comparisons_per_epoch, c.comparisons_per_epoch);
  take(f.hidden, c.hidden);
  take(f.host, c.host);
  take(f.port, c.port);
  take(f.admin_token, c.admin_token);
  return c;
}

void require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw ValidationError(std::string("missing required flag ") + flag);
}

void require_input(const fs::path& p, const char* flag) {
  require_path(p, flag);
  if (!fs::exists(p)) throw IoError(std::string(flag) + ": no such file '" + p.string() + "'");
}

Dataset load_inputs(const RunConfig& c) {
  require_input(c.products, "--products");
  require_input(c.images, "--images");
  require_input(c.votes, "--votes");
  return load_catalog(c.catalog());
}

DatasetSplit split_for(const RunConfig& c, const Dataset& data) {
  if (!c.split.empty()) {
    require_input(c.split, "--split");
    return read_split(c.split);
  }
  const auto ids = data.images.ids();
  return split_dataset(ids, SplitRatios{}, c.seed);
}

EmbeddingStore store_for(const RunConfig& c, const Dataset& data) {
  if (!c.embeddings.empty() && fs::exists(c.embeddings)) return read_embeddings(c.embeddings);
  require_input(c.checkpoint, "--checkpoint");
  return embed_all(load_checkpoint(c.checkpoint), data.images, data.catalog);
}

std::vector<double> parse_feature_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad feature value '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Style embedding, retrieval and product-graph toolkit", "stylegraph"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON config file; flags override its values");
  app.add_option("--seed", f.seed, "Seed for every random choice");
  app.add_option("--products", f.products, "products.jsonl");
  app.add_option("--images", f.images, "images.jsonl");
  app.add_option("--votes", f.votes, "votes.jsonl");
  app.add_option("--checkpoint", f.checkpoint, "Model checkpoint (JSON)");
  app.add_option("--embeddings", f.embeddings, "embeddings.jsonl");
  app.add_option("--graph", f.graph, "Graph file (.graphml, .gexf or .csv)");
  app.add_option("--split", f.split, "Split file (JSON)");
  app.add_option("--k", f.k, "Neighbours per query");
  app.add_option("--wmin", f.w_min, "Lower edge-weight bound (inclusive)");
  app.add_option("--wmax", f.w_max, "Upper edge-weight bound (inclusive)");
  app.add_option("--min-group-size", f.min_group_size, "Smallest group kept in the graph");
  app.add_option("--threshold-x", f.threshold_x, "Vote differential needed for a comparison");
  app.add_option("--epochs", f.epochs, "Training epochs");
  app.add_option("--lr", f.lr, "Learning rate");
  app.add_option("--batch-size", f.batch_size, "Comparisons per gradient step");
  app.add_option("--comparisons-per-epoch", f.comparisons_per_epoch,
                 "Comparisons sampled per epoch");
  app.add_option("--hidden", f.hidden, "Hidden layer width");
  app.add_option("--host", f.host, "Bind address for serve");
  app.add_option("--port", f.port, "Port for serve");
  app.add_option("--admin-token", f.admin_token, "Token required by /admin endpoints");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate the synthetic 4-style benchmark");
  std::string synth_dir = ".";
  SynthConfig synth_cfg;
  synth->add_option("--out-dir", synth_dir, "Directory for the three .jsonl files");
  synth->add_option("--n-products", synth_cfg.products, "Number of products");
  synth->add_option("--n-images", synth_cfg.images, "Number of images");
  synth->add_option("--dim", synth_cfg.dim, "Feature dimension");
  synth->add_option("--fidelity", synth_cfg.fidelity, "Chance an expert votes the true style");
  synth->add_option("--experts", synth_cfg.experts, "Experts per image");

  auto* validate_cmd = app.add_subcommand("validate", "Check the catalog files");

  auto* split_cmd = app.add_subcommand("split", "Write a train/validation/test split");
  std::string split_out;
  split_cmd->add_option("--out", split_out, "Output path (defaults to --split)");

  auto* train_cmd = app.add_subcommand("train", "Train the style model");
  std::string history_out;
  train_cmd->add_option("--history", history_out, "Write per-epoch history JSON here");

  auto* eval_cmd = app.add_subcommand("eval", "Style estimation and retrieval accuracy");
  bool exclude_ties = false;
  eval_cmd->add_flag("--exclude-ties", exclude_ties, "Skip images whose majority is a tie");

  auto* embed_cmd = app.add_subcommand("embed", "Write image and product embeddings");

  auto* graph_cmd = app.add_subcommand("graph", "Similarity graph commands");
  graph_cmd->require_subcommand(1);
  auto* graph_build = graph_cmd->add_subcommand("build", "Build and filter the product graph");
  bool image_level = false;
  graph_build->add_flag("--image-level", image_level, "Nodes are images instead of products");
  auto* graph_export_cmd = graph_cmd->add_subcommand("export", "Convert a graph file");
  std::string export_format = "graphml";
  std::string export_out;
  bool export_groups = false;
  graph_export_cmd->add_option("--format", export_format, "graphml, gexf or edge-csv");
  graph_export_cmd->add_option("--out", export_out, "Output path")->required();
  graph_export_cmd->add_flag("--groups", export_groups, "Export the group-level graph");

  auto* recommend_cmd = app.add_subcommand("recommend", "Nearest products to a sku");
  std::string sku;
  bool frequency = false;
  std::size_t top_n = 25;
  bool images_scope = false;
  recommend_cmd->add_option("--sku", sku, "Seed product (or image with --images-scope)");
  recommend_cmd->add_flag("--frequency", frequency,
                          "Report how often each item appears in others' top-k");
  recommend_cmd->add_option("--top-n", top_n, "Rows of the frequency report");
  recommend_cmd->add_flag("--images-scope", images_scope, "Rank images instead of products");

  auto* score_cmd = app.add_subcommand("score", "Score a candidate design");
  std::string features_text;
  std::string features_file;
  score_cmd->add_option("--features", features_text, "Comma-separated feature vector");
  score_cmd->add_option("--features-file", features_file,
                        "JSON file with {\"features\": [...]}");

  auto* gaps_cmd = app.add_subcommand("gaps", "Isolated products and unconnected groups");
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig c = resolve(f);

    if (synth->parsed()) {
      synth_cfg.seed = c.seed;
      const SynthDataset s = generate_synthetic(synth_cfg);
      CatalogPaths paths = c.catalog();
      if (paths.products.empty()) paths.products = fs::path(synth_dir) / "products.jsonl";
      if (paths.images.empty()) paths.images = fs::path(synth_dir) / "images.jsonl";
      if (paths.votes.empty()) paths.votes = fs::path(synth_dir) / "votes.jsonl";
      write_catalog(s.data, paths);
      out << "products=" << s.data.catalog.size() << "\nimages=" << s.data.images.size()
          << "\nvotes=" << s.data.votes.size() << "\n";
      return 0;
    }

    if (validate_cmd->parsed()) {
      require_input(c.products, "--products");
      require_input(c.images, "--images");
      require_input(c.votes, "--votes");
      const RawDataset raw = read_raw_dataset(c.catalog());
      const ValidationReport report = validate(raw.products, raw.images, raw.votes);
      out << "products=" << raw.products.size() << "\nimages=" << raw.images.size()
          << "\nvotes=" << raw.votes.size() << "\n";
      for (const auto& [group, n] : report.products_per_group) {
        out << "group[" << group << "]=" << n << "\n";
      }
      for (Style s : kAllStyles) {
        out << "votes[" << style_name(s) << "]=" << report.votes_per_style[style_code(s)] << "\n";
      }
      for (const auto& w : raw.warnings) err << "warning: " << w << "\n";
      for (const auto& w : report.warnings) err << "warning: " << w << "\n";
      for (const auto& e : report.errors) err << "error: " << e.message << "\n";
      out << "errors=" << report.errors.size() << "\n";
      return report.ok() ? 0 : 1;
    }

    if (split_cmd->parsed()) {
      const Dataset data = load_inputs(c);
      const fs::path target = split_out.empty() ? c.split : fs::path(split_out);
      require_path(target, "--out or --split");
      const auto ids = data.images.ids();
      const DatasetSplit s = split_dataset(ids, SplitRatios{}, c.seed);
      write_split(s, target);
      out << "train=" << s.train.size() << "\nvalidation=" << s.validation.size()
          << "\ntest=" << s.test.size() << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      require_path(c.checkpoint, "--checkpoint");
      const Dataset data = load_inputs(c);
      const DatasetSplit s = split_for(c, data);
      StyleModel model = init_model(data.images.dimension(), c.hidden, c.seed);
      const TrainResult result = train(std::move(model), data, s, c.train());
      save_checkpoint(result.model, c.checkpoint);
      if (!history_out.empty()) {
        detail::write_text_file(history_out, to_json(result.history).dump(2) + "\n");
      }
      out << "epochs=" << result.history.train_loss.size()
          << "\nfirst_loss=" << detail::format_double(result.history.train_loss.front())
          << "\nfinal_loss=" << detail::format_double(result.history.train_loss.back())
          << "\nmodel=" << model_checksum(result.model) << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      require_input(c.checkpoint, "--checkpoint");
      const Dataset data = load_inputs(c);
      const DatasetSplit s = split_for(c, data);
      const StyleModel model = load_checkpoint(c.checkpoint);
      const EstimationReport est =
          evaluate_estimation(model, data.images, s.test, data.votes, exclude_ties);
      const EmbeddingStore store = embed_all(model, data.images, data.catalog);
      const double retrieval = retrieval_accuracy(store, s.test, data.votes, c.k);
      out << "overall=" << detail::format_double(est.overall) << "\n";
      for (Style st : kAllStyles) {
        const auto& v = est.per_style[style_code(st)];
        out << style_name(st) << "=" << (v ? detail::format_double(*v) : "nan") << "\n";
      }
      out << "retrieval=" << detail::format_double(retrieval) << "\n"
          << "k=" << c.k << "\nevaluated=" << est.evaluated << "\n";
      return 0;
    }

    if (embed_cmd->parsed()) {
      require_input(c.checkpoint, "--checkpoint");
      require_path(c.embeddings, "--embeddings");
      const Dataset data = load_inputs(c);
      const EmbeddingStore store =
          embed_all(load_checkpoint(c.checkpoint), data.images, data.catalog);
      write_embeddings(store, c.embeddings);
      for (const auto& sku_id : store.excluded_products) {
        err << "warning: product '" << sku_id << "' has no target images; excluded\n";
      }
      out << "images=" << store.images().size() << "\nproducts=" << store.products().size()
          << "\nexcluded=" << store.excluded_products.size() << "\n";
      return 0;
    }

    if (graph_build->parsed()) {
      require_path(c.graph, "--graph");
      const Dataset data = load_inputs(c);
      const EmbeddingStore store = store_for(c, data);
      SimilarityGraph g = image_level ? build_image_graph(store, data.images, data.catalog)
                                      : build_product_graph(store, data.catalog);
      const std::size_t built = g.edge_count();
      g = remove_overlap_edges(g, data.images);
      g = filter_edges(g, c.w_min, c.w_max);
      g = filter_small_groups(g, c.min_group_size);
      export_graph(to_export(g), format_for_path(c.graph), c.graph);
      for (const auto& [a, b] : g.duplicates) {
        err << "duplicate: " << a << " " << b << "\n";
      }
      out << "built_edges=" << built
          << "\noverlap_removed=" << g.provenance.overlap_edges_removed
          << "\nduplicates=" << g.duplicates.size() << "\nnodes=" << g.node_count()
          << "\nedges=" << g.edge_count() << "\n";
      return 0;
    }

    if (graph_export_cmd->parsed()) {
      require_input(c.graph, "--graph");
      const ExportFormat format = parse_export_format(export_format);
      const ExportedGraph in = import_graph(c.graph, format_for_path(c.graph));
      const ExportedGraph payload =
          export_groups ? to_export(group_graph(graph_from_export(in))) : in;
      export_graph(payload, format, export_out);
      out << "nodes=" << payload.nodes.size() << "\nedges=" << payload.edges.size() << "\n";
      return 0;
    }

    if (recommend_cmd->parsed()) {
      const Scope scope = images_scope ? Scope::kImages : Scope::kProducts;
      EmbeddingStore store;
      std::optional<Dataset> data;
      if (!c.embeddings.empty() && fs::exists(c.embeddings)) {
        store = read_embeddings(c.embeddings);
      } else {
        data = load_inputs(c);
        store = store_for(c, *data);
      }
      if (frequency) {
        std::vector<std::string> ids;
        for (const auto& e : store.entries(scope)) ids.push_back(e.id);
        const auto freq = recommendation_frequency(store, ids, c.k, scope);
        out << to_json(freq, top_n).dump(2) << "\n";
        return 0;
      }
      if (sku.empty()) throw ValidationError("recommend needs --sku or --frequency");
      if (!store.find(scope, sku)) {
        throw ValidationError("unknown " + std::string(images_scope ? "image" : "sku") +
                              " '" + sku + "'");
      }
      const RankedNeighbors ranked = top_k(store, sku, c.k, scope);
      for (const auto& n : ranked.neighbors) {
        out << n.id << "\t" << detail::format_double(n.distance) << "\n";
      }
      if (ranked.truncated) err << "warning: fewer than k candidates\n";
      return 0;
    }

    if (score_cmd->parsed()) {
      require_input(c.checkpoint, "--checkpoint");
      std::vector<double> features;
      if (!features_file.empty()) {
        const json doc = json::parse(detail::read_text_file(features_file));
        features = doc.at("features").get<std::vector<double>>();
      } else if (!features_text.empty()) {
        features = parse_feature_list(features_text);
      } else {
        throw ValidationError("score needs --features or --features-file");
      }
      Dataset data = load_inputs(c);
      StyleModel model = load_checkpoint(c.checkpoint);
      EmbeddingStore store = store_for(c, data);
      std::optional<SimilarityGraph> graph;
      if (!c.graph.empty()) {
        require_input(c.graph, "--graph");
        graph = graph_from_export(import_graph(c.graph, format_for_path(c.graph)));
      }
      const auto engine = make_engine(std::move(data), std::move(model), std::move(store),
                                      std::move(graph), c.filter(), c.k);
      if (features.size() != engine->model.input_dim()) {
        throw ValidationError("expected " + std::to_string(engine->model.input_dim()) +
                              " features, got " + std::to_string(features.size()));
      }
      out << to_json(score_design(*engine, features, c.k)).dump(2) << "\n";
      return 0;
    }

    if (gaps_cmd->parsed()) {
      require_input(c.graph, "--graph");
      const SimilarityGraph g =
          graph_from_export(import_graph(c.graph, format_for_path(c.graph)));
      out << to_json(find_gaps(g)).dump(2) << "\n";
      return 0;
    }

    if (serve_cmd->parsed()) {
      ServiceConfig sc;
      sc.catalog = c.catalog();
      sc.checkpoint = c.checkpoint;
      if (!c.embeddings.empty()) sc.embeddings = c.embeddings;
      if (!c.graph.empty()) sc.graph = c.graph;
      sc.host = c.host;
      sc.port = c.port;
      sc.filter = c.filter();
      sc.default_k = c.k;
      sc.admin_token = c.admin_token;
      DesignerService service(sc);
      HttpServer server(service);
      const int port = server.bind(sc.host, sc.port);
      out << "listening on " << sc.host << ":" << port << std::endl;
      static HttpServer* active = nullptr;
      active = &server;
      // Not strictly async-signal-safe, but stop() only flips flags and
      // shuts the listening socket.
      std::signal(SIGINT, [](int) { if (active) active->stop(); });
      std::signal(SIGTERM, [](int) { if (active) active->stop(); });
      server.listen();
      active = nullptr;
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kValidation: return 1;
      case ErrorKind::kIo: return 2;
      case ErrorKind::kInvariant: return 3;
    }
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
  err << "error: no command given\n";
  return 1;
}

}  // namespace stylegraph
