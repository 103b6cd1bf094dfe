#include "stylegraph/service.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <thread>

#include "httplib.h"
#include "stylegraph/errors.hpp"
#include "stylegraph/graph_io.hpp"
#include "stylegraph/json_codec.hpp"

namespace stylegraph {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump() + "\n"};
}

HttpResponse error_response(int status, const std::string& error, const std::string& detail,
                            json extra = json::object()) {
  json body = {{"error", error}, {"detail", detail}};
  body.update(extra);
  return json_response(status, body);
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string::npos) end = path.size();
    if (end > start) parts.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::size_t parse_k(const HttpRequest& req, std::size_t fallback) {
  auto it = req.query.find("k");
  if (it == req.query.end()) return fallback;
  std::size_t k = 0;
  const std::string& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
  if (ec != std::errc() || ptr != s.data() + s.size() || k == 0) {
    throw ValidationError("query parameter k must be a positive integer, got '" + s + "'");
  }
  return k;
}

json health_json(const EngineState& e) {
  return {{"status", "ok"},
          {"model_checksum", e.model_checksum},
          {"input_dim", e.model.input_dim()},
          {"products", e.data.catalog.size()},
          {"images", e.data.images.size()},
          {"graph", {{"nodes", e.graph.node_count()}, {"edges", e.graph.edge_count()}}}};
}

json styles_json() {
  json styles = json::array();
  for (Style s : kAllStyles) {
    const auto& d = style_description(s);
    styles.push_back({{"code", style_code(s)},
                      {"name", std::string(style_name(s))},
                      {"description",
                       {{"fabric", std::string(d.fabric)},
                        {"color_scheme", std::string(d.color_scheme)},
                        {"furniture", std::string(d.furniture)},
                        {"material", std::string(d.material)},
                        {"flooring", std::string(d.flooring)}}}});
  }
  return {{"styles", std::move(styles)}};
}

json groups_json(const EngineState& e) {
  std::map<std::string, std::size_t> in_graph;
  for (const auto& n : e.graph.nodes()) ++in_graph[n.group];
  std::map<std::string, std::size_t> in_catalog;
  for (const auto& p : e.data.catalog.products()) ++in_catalog[p.group];
  json groups = json::array();
  for (const auto& [name, count] : in_catalog) {
    groups.push_back({{"name", name},
                      {"product_count", count},
                      {"graph_nodes", in_graph.count(name) ? in_graph[name] : 0}});
  }
  return {{"groups", std::move(groups)}};
}

json product_json(const EngineState& e, const Product& p) {
  json images = json::array();
  for (const auto& im : e.data.images.images()) {
    if (im.target_sku() == p.sku) images.push_back(im.image_id);
  }
  json out = {{"sku", p.sku},
              {"group", p.group},
              {"name", p.display_name ? json(*p.display_name) : json(nullptr)},
              {"image_ids", std::move(images)}};
  if (const Embedding* emb = e.store.find(Scope::kProducts, p.sku)) {
    out["embedding"] = *emb;
    out["style_probs"] =
        style_probabilities_json(style_probabilities(scores_from_embedding(e.model, *emb)));
  } else {
    out["embedding"] = nullptr;
    out["style_probs"] = nullptr;
  }
  if (auto idx = e.graph.find(p.sku)) {
    out["in_graph"] = true;
    out["weighted_degree"] = e.graph.weighted_degrees()[*idx];
  } else {
    out["in_graph"] = false;
    out["weighted_degree"] = nullptr;
  }
  return out;
}

HttpResponse score(const EngineState& e, const HttpRequest& req) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error&) {
    return error_response(400, "bad_request", "request body is not valid JSON");
  }
  if (!body.is_object()) return error_response(400, "bad_request", "body must be a JSON object");

  std::size_t k = e.default_k;
  if (auto it = body.find("k"); it != body.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 1) {
      return error_response(400, "bad_request", "'k' must be a positive integer");
    }
    k = it->get<std::size_t>();
  }

  std::vector<double> features;
  if (auto it = body.find("features"); it != body.end()) {
    if (!it->is_array()) return error_response(400, "bad_request", "'features' must be an array");
    for (const auto& v : *it) {
      if (!v.is_number()) {
        return error_response(400, "bad_request", "'features' must contain only numbers");
      }
      const double d = v.get<double>();
      if (!std::isfinite(d)) return error_response(400, "bad_request", "non-finite feature");
      features.push_back(d);
    }
  } else if (auto id = body.find("image_id"); id != body.end() && id->is_string()) {
    const ImageRecord* im = e.data.images.find(id->get<std::string>());
    if (!im) {
      return error_response(404, "not_found", "unknown image_id '" + id->get<std::string>() + "'");
    }
    features = im->features;
  } else {
    return error_response(400, "bad_request", "body needs 'features' or 'image_id'");
  }

  if (features.size() != e.model.input_dim()) {
    return error_response(400, "dimension_mismatch",
                          "expected " + std::to_string(e.model.input_dim()) +
                              " features, got " + std::to_string(features.size()),
                          {{"expected_dimension", e.model.input_dim()}});
  }
  return json_response(200, to_json(score_design(e, features, k)));
}

HttpResponse graph_export(const EngineState& e, const HttpRequest& req) {
  auto it = req.query.find("format");
  const ExportFormat format =
      parse_export_format(it == req.query.end() ? "graphml" : it->second);
  auto level = req.query.find("level");
  const bool groups = level != req.query.end() && level->second == "groups";
  if (level != req.query.end() && !groups && level->second != "products") {
    throw ValidationError("level must be 'products' or 'groups'");
  }
  const ExportedGraph g = groups ? to_export(e.groups) : to_export(e.graph);
  const char* type = format == ExportFormat::kEdgeCsv ? "text/csv" : "application/xml";
  return {200, type, render_graph(g, format)};
}

HttpResponse route(const EngineState& e, const HttpRequest& req,
                   const std::function<HttpResponse()>& do_reload) {
  const auto parts = split_path(req.path);
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";
  auto method_not_allowed = [&] {
    return error_response(405, "method_not_allowed",
                          req.method + " is not supported on " + req.path);
  };

  if (parts.size() == 1 && parts[0] == "health") {
    return get ? json_response(200, health_json(e)) : method_not_allowed();
  }
  if (parts.size() == 1 && parts[0] == "styles") {
    return get ? json_response(200, styles_json()) : method_not_allowed();
  }
  if (parts.size() == 1 && parts[0] == "groups") {
    return get ? json_response(200, groups_json(e)) : method_not_allowed();
  }
  if (parts.size() == 1 && parts[0] == "score") {
    return post ? score(e, req) : method_not_allowed();
  }
  if (!parts.empty() && parts[0] == "products" && (parts.size() == 2 || parts.size() == 3)) {
    if (!get) return method_not_allowed();
    const Product* p = e.data.catalog.find(parts[1]);
    if (!p) return error_response(404, "not_found", "unknown sku '" + parts[1] + "'");
    if (parts.size() == 2) return json_response(200, product_json(e, *p));
    if (parts[2] != "neighbors") return error_response(404, "not_found", "no route " + req.path);
    const std::size_t k = parse_k(req, e.default_k);
    if (!e.store.find(Scope::kProducts, p->sku)) {
      return error_response(404, "not_found", "sku '" + p->sku + "' has no embedding");
    }
    json out = to_json(top_k(e.store, p->sku, k, Scope::kProducts), &e.data.catalog);
    out["seed"] = p->sku;
    out["k"] = k;
    return json_response(200, out);
  }
  if (parts.size() == 2 && parts[0] == "graph") {
    if (!get) return method_not_allowed();
    if (parts[1] == "groups") return json_response(200, to_json(e.groups, e.graph));
    if (parts[1] == "gaps") return json_response(200, to_json(find_gaps(e.graph)));
    if (parts[1] == "export") return graph_export(e, req);
  }
  if (parts.size() == 2 && parts[0] == "admin" && parts[1] == "reload") {
    return post ? do_reload() : method_not_allowed();
  }
  return error_response(404, "not_found", "no route " + req.method + " " + req.path);
}

}  // namespace

// ---------------------------------------------------------------------------

std::shared_ptr<const EngineState> load_engine(const ServiceConfig& config) {
  auto require = [](const std::filesystem::path& path, const char* what) {
    if (path.empty()) throw ValidationError(std::string("no ") + what + " path configured");
    if (!std::filesystem::exists(path)) {
      throw IoError(std::string(what) + " not found at '" + path.string() + "'");
    }
  };
  require(config.catalog.products, "products file");
  require(config.catalog.images, "images file");
  require(config.catalog.votes, "votes file");
  require(config.checkpoint, "model checkpoint");
  if (config.embeddings) require(*config.embeddings, "embeddings file");
  if (config.graph) require(*config.graph, "graph file");

  Dataset data = load_catalog(config.catalog);
  StyleModel model = load_checkpoint(config.checkpoint);
  EmbeddingStore store = config.embeddings ? read_embeddings(*config.embeddings)
                                           : embed_all(model, data.images, data.catalog);
  std::optional<SimilarityGraph> graph;
  if (config.graph) {
    graph = graph_from_export(import_graph(*config.graph, format_for_path(*config.graph)));
  }
  return make_engine(std::move(data), std::move(model), std::move(store), std::move(graph),
                     config.filter, config.default_k);
}

DesignerService::DesignerService(ServiceConfig config, std::shared_ptr<const EngineState> engine)
    : config_(std::move(config)), engine_(std::move(engine)) {
  if (!engine_) throw InvariantError("designer service needs an engine");
}

DesignerService::DesignerService(ServiceConfig config)
    : DesignerService(config, load_engine(config)) {}

std::shared_ptr<const EngineState> DesignerService::snapshot() const {
  std::lock_guard lock(mutex_);
  return engine_;
}

void DesignerService::reload() {
  std::lock_guard writer(reload_mutex_);
  auto fresh = load_engine(config_);
  std::lock_guard lock(mutex_);
  engine_ = std::move(fresh);
}

HttpResponse DesignerService::handle(const HttpRequest& request) {
  // Hold one snapshot for the whole request.
  const auto engine = snapshot();
  auto do_reload = [&]() -> HttpResponse {
    if (config_.admin_token.empty()) {
      return error_response(403, "forbidden", "admin endpoints are disabled (no admin token)");
    }
    auto it = request.headers.find("x-admin-token");
    if (it == request.headers.end() || it->second != config_.admin_token) {
      return error_response(401, "unauthorized", "missing or wrong X-Admin-Token");
    }
    try {
      reload();
    } catch (const std::exception& ex) {
      return error_response(500, "reload_failed", ex.what());
    }
    return json_response(200, health_json(*snapshot()));
  };
  try {
    return route(*engine, request, do_reload);
  } catch (const DanglingReferenceError& ex) {
    return error_response(404, "not_found", ex.what());
  } catch (const ValidationError& ex) {
    return error_response(400, "bad_request", ex.what());
  } catch (const std::exception& ex) {
    return error_response(500, "internal", ex.what());
  }
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  DesignerService& service;
  httplib::Server server;
  // httplib's stop() is a no-op until listen() is running, so an early stop
  // has to be remembered.
  std::atomic<bool> listening{false};
  std::atomic<bool> finished{false};
  std::atomic<bool> stop_requested{false};

  explicit Impl(DesignerService& s) : service(s) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      HttpRequest r;
      r.method = req.method;
      r.path = req.path;
      for (const auto& [k, v] : req.params) r.query.emplace(k, v);
      for (const auto& [k, v] : req.headers) {
        std::string key = k;
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        r.headers.emplace(std::move(key), v);
      }
      r.body = req.body;
      const HttpResponse out = service.handle(r);
      res.status = out.status;
      res.set_content(out.body, out.content_type);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);
    server.Patch(".*", handler);
  }
};

HttpServer::HttpServer(DesignerService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  // httplib defaults to SO_REUSEPORT, which lets a second instance share the
  // port silently. Plain SO_REUSEADDR still allows quick restarts.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host + " on an ephemeral port");
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port) +
                  " (port busy or not permitted)");
  }
  return port;
}

void HttpServer::listen() {
  impl_->listening = true;
  if (!impl_->stop_requested) impl_->server.listen_after_bind();
  impl_->finished = true;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->stop_requested = true;
  if (!impl_->listening) return;
  while (!impl_->server.is_running() && !impl_->finished) std::this_thread::yield();
  impl_->server.stop();
}

}  // namespace stylegraph
