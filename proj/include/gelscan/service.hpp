#pragma once

#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "json.hpp"

#include "gelscan/pipeline.hpp"
#include "gelscan/report.hpp"

namespace httplib {
class Server;
}

namespace gelscan {

/// One uploaded image and its most recent analysis.
struct Session {
  std::string id;
  GrayImage input;
  SourceInfo source;

  std::mutex mutex;  // serializes analysis and reads of the fields below
  PipelineConfig config;
  std::optional<PipelineResult> result;  // always computed from `config`
  std::uint64_t analysis_runs = 0;

  Session(std::string id, GrayImage input, SourceInfo source);

  /// Applies `deltas` on top of the current config and re-runs the pipeline
  /// only if the resulting config differs from the analysed one. Caller
  /// holds `mutex`.
  const PipelineResult& analyze(const nlohmann::json& deltas);
  /// Current result, running the pipeline on first use. Caller holds `mutex`.
  const PipelineResult& ensure_result();
};

/// In-memory sessions with a bounded count and least-recently-used eviction.
class SessionStore {
 public:
  explicit SessionStore(std::size_t capacity);

  std::shared_ptr<Session> create(GrayImage input, SourceInfo source);
  /// nullptr when the id is unknown or was evicted. Marks the session used.
  std::shared_ptr<Session> find(const std::string& id);
  std::size_t size() const;

 private:
  std::string fresh_id();

  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::list<std::string> order_;  // most recent first
  std::unordered_map<std::string,
                     std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>>
      sessions_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_;
};

struct ServiceOptions {
  std::size_t max_sessions = 16;
  std::filesystem::path report_dir = "reports";
  std::optional<std::filesystem::path> static_dir;  // served at "/"
};

/// HTTP front end. Endpoints (JSON bodies unless noted):
///   POST /api/sessions                       raw image bytes -> {id, ...}
///   GET  /api/sessions/{id}                  session summary
///   GET  /api/sessions/{id}/image?stage=S    PNG of a stage snapshot
///   POST /api/sessions/{id}/analyze          config deltas -> decision + bands
///   GET  /api/sessions/{id}/bands            band list with geometry
///   POST /api/sessions/{id}/ratio            {ref, n} -> {ratio}
///   POST /api/sessions/{id}/report           {reference?} -> written paths
/// Errors come back as {"error": {"code", "message", "stage"}}.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to an ephemeral port and returns it (-1 on failure).
  int bind_any_port(const std::string& host);
  bool bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool serve();
  void stop();
  void wait_until_ready() const;

  SessionStore& sessions() noexcept { return store_; }

 private:
  void install_routes();

  ServiceOptions options_;
  SessionStore store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace gelscan
