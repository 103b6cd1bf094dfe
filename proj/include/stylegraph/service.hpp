#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "stylegraph/catalog.hpp"
#include "stylegraph/designer.hpp"

namespace stylegraph {

struct ServiceConfig {
  CatalogPaths catalog;
  std::filesystem::path checkpoint;
  // Optional precomputed artifacts; recomputed from the checkpoint if unset.
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> graph;
  std::string host = "127.0.0.1";
  int port = 8080;
  GraphFilterConfig filter;
  std::size_t default_k = 5;
  // Required in X-Admin-Token for /admin/*. Empty disables those endpoints.
  std::string admin_token;
};

// Loads every artifact named by the config. Failures carry a message that
// names the missing or broken file.
std::shared_ptr<const EngineState> load_engine(const ServiceConfig& config);

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Request routing over an atomically swappable engine snapshot. Handlers
// never mutate the snapshot; reload() builds a new one and swaps it in.
class DesignerService {
 public:
  DesignerService(ServiceConfig config, std::shared_ptr<const EngineState> engine);
  explicit DesignerService(ServiceConfig config);

  HttpResponse handle(const HttpRequest& request);

  std::shared_ptr<const EngineState> snapshot() const;
  void reload();

  const ServiceConfig& config() const { return config_; }

 private:
  ServiceConfig config_;
  mutable std::mutex mutex_;
  std::shared_ptr<const EngineState> engine_;
  std::mutex reload_mutex_;
};

// HTTP front end: bind(), then listen() blocks until stop() is called from
// another thread. Port 0 binds an ephemeral port.
class HttpServer {
 public:
  explicit HttpServer(DesignerService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Throws IoError when the address cannot be bound.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stylegraph
