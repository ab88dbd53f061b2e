#include "gelscan/service.hpp"

#include <httplib.h>

#include <cstdio>
#include <random>

#include "gelscan/error.hpp"
#include "gelscan/image_io.hpp"

namespace gelscan {

using nlohmann::json;
using nlohmann::ordered_json;

Session::Session(std::string id_, GrayImage input_, SourceInfo source_)
    : id(std::move(id_)), input(std::move(input_)), source(std::move(source_)) {}

const PipelineResult& Session::analyze(const json& deltas) {
  PipelineConfig next = config_from_json(deltas, config);
  if (!result || !(next == config)) {
    // Commit the config only once the run succeeds.
    PipelineResult fresh = run_pipeline(input, next);
    ++analysis_runs;
    config = next;
    result = std::move(fresh);
  }
  return *result;
}

const PipelineResult& Session::ensure_result() { return analyze(json::object()); }

SessionStore::SessionStore(std::size_t capacity)
    : capacity_(capacity == 0 ? 1 : capacity), salt_(std::random_device{}()) {
  salt_ = (salt_ << 32) ^ std::random_device{}();
}

std::string SessionStore::fresh_id() {
  // splitmix64 of a counter keyed by a per-process salt: unique and opaque.
  std::uint64_t z = salt_ + 0x9E3779B97F4A7C15ULL * ++counter_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
  return buf;
}

std::shared_ptr<Session> SessionStore::create(GrayImage input, SourceInfo source) {
  std::lock_guard lock(mutex_);
  std::string id = fresh_id();
  while (sessions_.count(id)) id = fresh_id();
  auto session = std::make_shared<Session>(id, std::move(input), std::move(source));
  order_.push_front(id);
  sessions_.emplace(id, std::make_pair(session, order_.begin()));
  while (sessions_.size() > capacity_) {
    sessions_.erase(order_.back());
    order_.pop_back();
  }
  return session;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  order_.splice(order_.begin(), order_, it->second.second);
  return it->second.first;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

namespace {

// Request-level failures that are not pipeline errors.
struct RequestError {
  int status;
  std::string code;
  std::string message;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedFormat: return 415;
    case ErrorCode::CorruptData:
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadWindow: return 400;
    case ErrorCode::UnknownBand: return 404;
    case ErrorCode::FileNotFound:
    case ErrorCode::IoFailure: return 500;
    default: return 422;
  }
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message, const std::string& stage) {
  ordered_json err;
  err["code"] = code;
  err["message"] = message;
  err["stage"] = stage.empty() ? ordered_json() : ordered_json(stage);
  send_json(res, status, {{"error", err}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw RequestError{400, "MalformedBody", "request body must be a JSON object"};
    return j;
  } catch (const json::exception& e) {
    throw RequestError{400, "MalformedBody", std::string("request body is not valid JSON: ") + e.what()};
  }
}

std::shared_ptr<Session> session_for(SessionStore& store, const httplib::Request& req) {
  const std::string& id = req.path_params.at("id");
  auto session = store.find(id);
  if (!session) throw RequestError{404, "UnknownSession", "no session '" + id + "'"};
  return session;
}

std::int32_t label_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_number_integer()) {
    throw RequestError{400, "MalformedBody", std::string("'") + key + "' must be an integer band label"};
  }
  return it->get<std::int32_t>();
}

const Band& band_with_label(const PipelineResult& result, std::int32_t label) {
  for (const auto& b : result.bands) {
    if (b.label == label) return b;
  }
  throw Error(ErrorCode::UnknownBand, "no band with label " + std::to_string(label));
}

ordered_json bands_json(const BandReport& rep) {
  ordered_json arr = ordered_json::array();
  for (const auto& b : rep.bands) arr.push_back(band_to_json(b));
  return arr;
}

ordered_json analysis_json(const Session& s) {
  const BandReport rep = make_report(s.source, s.config, *s.result);
  ordered_json j;
  j["decision"] = decision_to_json(rep.decision);
  j["bands"] = bands_json(rep);
  ordered_json stages = ordered_json::array();
  for (const auto& st : s.result->stages) stages.push_back(st.name);
  j["stages"] = std::move(stages);
  j["config"] = config_to_json(s.config);
  return j;
}

ordered_json session_json(const Session& s) {
  ordered_json j;
  j["id"] = s.id;
  j["width"] = s.input.width();
  j["height"] = s.input.height();
  j["bit_depth"] = s.input.bit_depth();
  j["source"] = {{"path", s.source.path}, {"sha256", s.source.sha256}};
  j["analyzed"] = s.result.has_value();
  j["config"] = config_to_json(s.config);
  return j;
}

template <class F>
httplib::Server::Handler guarded(F body) {
  return [body](const httplib::Request& req, httplib::Response& res) {
    try {
      body(req, res);
    } catch (const RequestError& e) {
      send_error(res, e.status, e.code, e.message, {});
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), std::string(error_code_name(e.code())), e.detail(),
                 e.stage());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what(), {});
    }
  };
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)),
      store_(options_.max_sessions),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Service::~Service() { stop(); }

void Service::install_routes() {
  auto& srv = *server_;

  srv.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto* data = reinterpret_cast<const std::uint8_t*>(req.body.data());
    const std::span<const std::uint8_t> bytes(data, req.body.size());
    GrayImage img = decode_image(bytes);
    SourceInfo source{req.has_param("name") ? req.get_param_value("name") : "upload",
                      sha256_hex(bytes)};
    auto session = store_.create(std::move(img), std::move(source));
    std::lock_guard lock(session->mutex);
    send_json(res, 201, session_json(*session));
  }));

  srv.Get("/api/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto session = session_for(store_, req);
    std::lock_guard lock(session->mutex);
    send_json(res, 200, session_json(*session));
  }));

  srv.Get("/api/sessions/:id/image",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto session = session_for(store_, req);
            const std::string stage = req.has_param("stage") ? req.get_param_value("stage") : "input";
            std::lock_guard lock(session->mutex);
            const GrayImage* img = nullptr;
            if (stage == "input") {
              img = &session->input;
            } else {
              img = session->ensure_result().stage(stage);
            }
            if (!img) {
              throw RequestError{404, "UnknownStage",
                                 "stage '" + stage + "' is not available for this analysis"};
            }
            const auto png = encode_image(*img, ImageFormat::Png);
            res.status = 200;
            res.set_content(reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
          }));

  srv.Post("/api/sessions/:id/analyze",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto session = session_for(store_, req);
             const json deltas = parse_body(req);
             std::lock_guard lock(session->mutex);
             session->analyze(deltas);
             send_json(res, 200, analysis_json(*session));
           }));

  srv.Get("/api/sessions/:id/bands",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto session = session_for(store_, req);
            std::lock_guard lock(session->mutex);
            session->ensure_result();
            const BandReport rep = make_report(session->source, session->config, *session->result);
            send_json(res, 200, {{"bands", bands_json(rep)}});
          }));

  srv.Post("/api/sessions/:id/ratio",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto session = session_for(store_, req);
             const json body = parse_body(req);
             const std::int32_t ref = label_field(body, "ref");
             const std::int32_t n = label_field(body, "n");
             std::lock_guard lock(session->mutex);
             const PipelineResult& result = session->ensure_result();
             const Band& ref_band = band_with_label(result, ref);
             const Band& n_band = band_with_label(result, n);
             const double ratio =
                 ratio_size(static_cast<double>(n_band.area), static_cast<double>(ref_band.area));
             send_json(res, 200, {{"ref", ref}, {"n", n}, {"ratio", ratio}});
           }));

  srv.Post("/api/sessions/:id/report",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto session = session_for(store_, req);
             const json body = parse_body(req);
             std::optional<std::int32_t> reference;
             if (body.contains("reference") && !body["reference"].is_null()) {
               reference = label_field(body, "reference");
             }
             std::lock_guard lock(session->mutex);
             const PipelineResult& result = session->ensure_result();
             const BandReport rep = make_report(session->source, session->config, result, reference);
             const WrittenFiles files =
                 write_report(rep, options_.report_dir / session->id, session->input);
             ordered_json j;
             j["path"] = files.report->string();
             j["table"] = files.table->string();
             j["overlay"] = files.overlay.string();
             j["report"] = report_to_json(rep);
             send_json(res, 200, j);
           }));

  if (options_.static_dir) {
    if (!srv.set_mount_point("/", options_.static_dir->string())) {
      throw Error(ErrorCode::FileNotFound,
                  "static directory " + options_.static_dir->string() + " does not exist");
    }
  }
}

int Service::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool Service::bind(const std::string& host, int port) { return server_->bind_to_port(host, port); }

bool Service::serve() { return server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

void Service::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace gelscan
