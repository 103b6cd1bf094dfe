#include <atomic>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "service_fixture.hpp"
#include "stylegraph/errors.hpp"

using namespace stylegraph;

namespace {

fixtures::ServiceFixture& shared_fixture() {
  static fixtures::ServiceFixture fx;
  return fx;
}

// Runs an HttpServer on an ephemeral port for the lifetime of the object.
class RunningServer {
 public:
  explicit RunningServer(DesignerService& service) : server_(service) {
    port_ = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.listen(); });
  }
  ~RunningServer() {
    server_.stop();
    thread_.join();
  }
  int port() const { return port_; }

 private:
  HttpServer server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_SUITE("service") {

TEST_CASE("every endpoint matches its library call (in process)") {
  auto& fx = shared_fixture();
  DesignerService service(fx.config, fx.engine);
  const auto failure = fixtures::check_service_conformance(
      *fx.engine, fx.config.admin_token, [&](const HttpRequest& r) { return service.handle(r); });
  CHECK_MESSAGE(failure.empty(), failure);
}

TEST_CASE("every endpoint matches its library call (over HTTP)") {
  auto& fx = shared_fixture();
  DesignerService service(fx.config, fx.engine);
  RunningServer server(service);
  const auto failure = fixtures::check_service_conformance(
      *fx.engine, fx.config.admin_token, fixtures::http_sender("127.0.0.1", server.port()));
  CHECK_MESSAGE(failure.empty(), failure);
}

TEST_CASE("health reports checksum and graph size") {
  auto& fx = shared_fixture();
  DesignerService service(fx.config, fx.engine);
  const HttpResponse r = service.handle({"GET", "/health", {}, {}, {}});
  CHECK(r.status == 200);
  const auto j = nlohmann::json::parse(r.body);
  CHECK(j["model_checksum"] == fx.engine->model_checksum);
  CHECK(j["graph"]["nodes"] == fx.engine->graph.node_count());
}

TEST_CASE("wrong feature dimension is a 400 naming the expected size") {
  auto& fx = shared_fixture();
  DesignerService service(fx.config, fx.engine);
  const HttpResponse r = service.handle({"POST", "/score", {}, {}, R"({"features":[1,2,3]})"});
  CHECK(r.status == 400);
  const auto j = nlohmann::json::parse(r.body);
  CHECK(j["expected_dimension"] == 8);
  CHECK(j["detail"].get<std::string>().find("8") != std::string::npos);
}

TEST_CASE("admin endpoints are disabled without a configured token") {
  auto& fx = shared_fixture();
  ServiceConfig open = fx.config;
  open.admin_token.clear();
  DesignerService service(open, fx.engine);
  CHECK(service.handle({"POST", "/admin/reload", {}, {}, {}}).status == 403);
}

TEST_CASE("missing artifacts fail at startup with the path") {
  auto& fx = shared_fixture();
  ServiceConfig bad = fx.config;
  bad.checkpoint = fx.dir / "no_such_model.json";
  try {
    DesignerService service(bad);
    FAIL("expected startup failure");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("no_such_model.json") != std::string::npos);
  }
}

TEST_CASE("busy port is reported") {
  auto& fx = shared_fixture();
  DesignerService service(fx.config, fx.engine);
  RunningServer first(service);
  HttpServer second(service);
  CHECK_THROWS_AS(second.bind("127.0.0.1", first.port()), IoError);
}

TEST_CASE("reload while serving keeps every response well formed") {
  auto& fx = shared_fixture();
  DesignerService service(fx.config, fx.engine);
  RunningServer server(service);
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    httplib::Client client("127.0.0.1", server.port());
    while (!done) {
      auto res = client.Get("/health");
      if (!res || res->status != 200) ++bad;
    }
  });
  httplib::Client admin("127.0.0.1", server.port());
  for (int i = 0; i < 3; ++i) {
    auto res = admin.Post("/admin/reload", {{"X-Admin-Token", "secret"}}, "", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
  }
  done = true;
  reader.join();
  CHECK(bad == 0);
  CHECK(service.snapshot()->model_checksum == fx.engine->model_checksum);
}

}  // TEST_SUITE
