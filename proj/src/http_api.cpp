#include "pcaptopo/http_api.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <thread>

namespace pcaptopo {

namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

void reply(httplib::Response& res, int status, const json& body, std::uint64_t generation) {
  res.status = status;
  res.set_header("X-Generation", std::to_string(generation));
  res.set_content(dump(body), kJson);
}

void error_reply(httplib::Response& res, int status, json body, std::uint64_t generation) {
  body["generation"] = generation;
  reply(res, status, body, generation);
}

std::optional<std::size_t> query_number(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  auto text = req.get_param_value(key);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

}  // namespace

int port_from_env(int fallback) {
  const char* env = std::getenv("PCAPTOPO_PORT");
  if (!env) return fallback;
  int port = 0;
  std::string_view text(env);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), port);
  if (ec != std::errc{} || ptr != text.data() + text.size() || port < 0 || port > 65535) return fallback;
  return port;
}

struct ApiServer::Impl {
  Session& session;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;
  int bound_port = -1;

  Impl(Session& s, ServerOptions o) : session(s), options(std::move(o)) { routes(); }

  void routes() {
    server.set_payload_max_length(kMaxCaptureBytes);

    server.Post("/capture", [this](const httplib::Request& req, httplib::Response& res) {
      auto gen = session.snapshot()->generation;
      try {
        Bytes bytes(req.body.begin(), req.body.end());
        auto source = req.has_param("name") ? req.get_param_value("name") : std::string("upload");
        auto job = session.load_capture(std::move(bytes), source);
        reply(res, 202, {{"accepted", true}, {"job", job}, {"generation", gen}}, gen);
      } catch (const FormatError& e) {
        error_reply(res, 400, {{"error", e.what()}, {"magic", e.magic_hex()}}, gen);
      } catch (const HeaderError& e) {
        error_reply(res, 400, {{"error", e.what()}}, gen);
      }
    });

    server.Post("/filter", [this](const httplib::Request& req, httplib::Response& res) {
      auto gen = session.snapshot()->generation;
      auto body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object() || !body.contains("text") || !body["text"].is_string()) {
        return error_reply(res, 400, {{"error", "expected a JSON object {\"text\": string}"}}, gen);
      }
      try {
        session.set_filter(body["text"].get<std::string>());
        auto snap = session.snapshot();
        reply(res, 200,
              {{"ok", true},
               {"generation", snap->generation},
               {"filter", snap->filter_text},
               {"totalFiltered", snap->filtered.size()}},
              snap->generation);
      } catch (const ParseError& e) {
        error_reply(res, 400, {{"error", e.what()}, {"position", e.position()}, {"message", e.message()}}, gen);
      } catch (const SessionBusy& e) {
        error_reply(res, 409, {{"error", e.what()}}, gen);
      }
    });

    server.Get("/topology", [this](const httplib::Request&, httplib::Response& res) {
      auto snap = session.snapshot();
      res.set_header("X-Generation", std::to_string(snap->generation));
      res.set_content(topology_text(snap->topology), kJson);
    });

    server.Get("/legend", [this](const httplib::Request&, httplib::Response& res) {
      auto snap = session.snapshot();
      reply(res, 200, {{"legend", to_json(snap->topology.legend)}, {"generation", snap->generation}}, snap->generation);
    });

    server.Get("/packets", [this](const httplib::Request& req, httplib::Response& res) {
      auto snap = session.snapshot();
      auto offset = query_number(req, "offset", 0);
      auto count = query_number(req, "count", 100);
      if (!offset || !count) {
        return error_reply(res, 400, {{"error", "offset and count must be non-negative integers"}}, snap->generation);
      }
      try {
        reply(res, 200, to_json(packet_page(*snap, *offset, *count)), snap->generation);
      } catch (const std::invalid_argument& e) {
        error_reply(res, 400, {{"error", e.what()}}, snap->generation);
      }
    });

    server.Get(R"(/hosts/([^/]+)/conversations)", [this](const httplib::Request& req, httplib::Response& res) {
      auto snap = session.snapshot();
      auto key = httplib::detail::decode_url(req.matches[1].str(), false);
      auto host = Address::parse(key);
      if (!host) return error_reply(res, 400, {{"error", "not an address: " + key}}, snap->generation);
      try {
        auto body = to_json(*host, conversation_detail(snap->topology, *host));
        body["generation"] = snap->generation;
        reply(res, 200, body, snap->generation);
      } catch (const UnknownHost& e) {
        error_reply(res, 404, {{"error", e.what()}}, snap->generation);
      }
    });

    server.Get("/status", [this](const httplib::Request&, httplib::Response& res) {
      auto status = session.status();
      reply(res, 200, to_json(status), status.generation);
    });

    if (options.static_dir && !server.set_mount_point("/", *options.static_dir)) {
      throw std::runtime_error("static directory not found: " + *options.static_dir);
    }
  }
};

ApiServer::ApiServer(Session& session, ServerOptions options)
    : impl_(std::make_unique<Impl>(session, std::move(options))) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
  if (impl_->bound_port >= 0) return impl_->bound_port;
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(o.host);
  } else if (impl_->server.bind_to_port(o.host, o.port)) {
    impl_->bound_port = o.port;
  }
  if (impl_->bound_port < 0) throw std::runtime_error(fmt::format("cannot bind {}:{}", o.host, o.port));
  return impl_->bound_port;
}

void ApiServer::listen() {
  bind();
  impl_->server.listen_after_bind();
}

int ApiServer::start() {
  int port = bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void ApiServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace pcaptopo
