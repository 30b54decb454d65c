#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "airlens/extraction.hpp"

namespace airlens {

// Environment variable holding the live provider credential.
inline constexpr const char* kApiKeyEnv = "AIRLENS_API_KEY";

// OpenAI-compatible chat-completions endpoint over HTTP(S). The endpoint is a
// full URL, e.g. "https://api.example.com/v1/chat/completions".
class HttpProviderClient final : public ProviderClient {
 public:
  HttpProviderClient(std::string endpoint, std::string api_key);

  std::string complete(const ProviderRequest& request) override;

  // Request body sent for a given request (exposed for tests and logging).
  static std::string request_body(const ProviderRequest& request);

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
};

// Replays golden responses: <dir>/<review_id>.json for the first attempt and
// <dir>/<review_id>.attempt<N>.json for retry N when present.
class RecordedProviderClient final : public ProviderClient {
 public:
  explicit RecordedProviderClient(std::filesystem::path directory);

  std::string complete(const ProviderRequest& request) override;

  static std::filesystem::path golden_path(const std::filesystem::path& directory, const std::string& review_id,
                                           int attempt = 1);

 private:
  std::filesystem::path directory_;
};

// Scripted fake for tests: per-review queues of responses or errors, with a
// fallback when a queue is exhausted. Counts requests and peak concurrency.
class ScriptedProviderClient final : public ProviderClient {
 public:
  using Step = std::variant<std::string, Error>;

  void script(const std::string& review_id, std::deque<Step> steps);
  void set_fallback(std::optional<Step> step);
  void set_latency(std::chrono::milliseconds latency) { latency_ = latency; }
  // Every call after the first `n` throws Errc::authentication.
  void fail_after(std::size_t n) { fail_after_ = n; }

  std::string complete(const ProviderRequest& request) override;

  std::size_t requests() const noexcept { return requests_.load(); }
  std::size_t requests_for(const std::string& review_id) const;
  std::size_t peak_in_flight() const noexcept { return peak_.load(); }
  std::vector<ProviderRequest> log() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::deque<Step>> scripts_;
  std::map<std::string, std::size_t> per_review_;
  std::vector<ProviderRequest> log_;
  std::optional<Step> fallback_;
  std::chrono::milliseconds latency_{0};
  std::optional<std::size_t> fail_after_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_{0};
};

}  // namespace airlens
