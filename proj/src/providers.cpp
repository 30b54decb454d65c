#include "airlens/providers.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace airlens {

using nlohmann::json;
namespace fs = std::filesystem;

HttpProviderClient::HttpProviderClient(std::string endpoint, std::string api_key) : api_key_(std::move(api_key)) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::invalid_config, "endpoint must be an absolute URL");
  const auto scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error(Errc::invalid_config, "unsupported scheme " + scheme);
  const auto path_start = endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
  if (api_key_.empty()) throw Error(Errc::authentication, std::string(kApiKeyEnv) + " is empty");
}

std::string HttpProviderClient::request_body(const ProviderRequest& request) {
  json body;
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
  return body.dump();
}

std::string HttpProviderClient::complete(const ProviderRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(request.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  const httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

  auto res = client.Post(path_, headers, request_body(request), "application/json");
  if (!res) throw Error(Errc::transport, "request failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403) {
    throw Error(Errc::authentication, fmt::format("provider rejected credentials (HTTP {})", res->status));
  }
  if (res->status == 408 || res->status == 429 || res->status >= 500) {
    throw Error(Errc::transport, fmt::format("provider returned HTTP {}", res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(Errc::invalid_config, fmt::format("provider returned HTTP {}: {}", res->status, res->body));
  }
  try {
    auto doc = json::parse(res->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(Errc::transport, std::string("unexpected provider payload: ") + e.what());
  }
}

RecordedProviderClient::RecordedProviderClient(fs::path directory) : directory_(std::move(directory)) {
  if (!fs::is_directory(directory_)) throw Error(Errc::invalid_config, "no golden directory " + directory_.string());
}

fs::path RecordedProviderClient::golden_path(const fs::path& directory, const std::string& review_id, int attempt) {
  if (review_id.empty() || review_id.find('/') != std::string::npos || review_id == "." || review_id == "..") {
    throw Error(Errc::missing_golden, "review id not usable as a file name: " + review_id);
  }
  if (attempt <= 1) return directory / (review_id + ".json");
  return directory / fmt::format("{}.attempt{}.json", review_id, attempt);
}

std::string RecordedProviderClient::complete(const ProviderRequest& request) {
  auto path = golden_path(directory_, request.review_id, request.attempt);
  if (request.attempt > 1 && !fs::exists(path)) path = golden_path(directory_, request.review_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_golden, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ScriptedProviderClient::script(const std::string& review_id, std::deque<Step> steps) {
  std::lock_guard lock(mu_);
  scripts_[review_id] = std::move(steps);
}

void ScriptedProviderClient::set_fallback(std::optional<Step> step) {
  std::lock_guard lock(mu_);
  fallback_ = std::move(step);
}

std::string ScriptedProviderClient::complete(const ProviderRequest& request) {
  const auto now = ++in_flight_;
  auto peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }
  struct Leave {
    std::atomic<std::size_t>& counter;
    ~Leave() { --counter; }
  } leave{in_flight_};

  const auto n = ++requests_;
  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);

  std::optional<Step> step;
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
    ++per_review_[request.review_id];
    if (fail_after_ && n > *fail_after_) throw Error(Errc::authentication, "scripted interruption");
    auto it = scripts_.find(request.review_id);
    if (it != scripts_.end() && !it->second.empty()) {
      step = std::move(it->second.front());
      it->second.pop_front();
    } else {
      step = fallback_;
    }
  }
  if (!step) throw Error(Errc::missing_golden, "no scripted response for " + request.review_id);
  if (auto* e = std::get_if<Error>(&*step)) throw *e;
  return std::get<std::string>(*step);
}

std::size_t ScriptedProviderClient::requests_for(const std::string& review_id) const {
  std::lock_guard lock(mu_);
  auto it = per_review_.find(review_id);
  return it == per_review_.end() ? 0 : it->second;
}

std::vector<ProviderRequest> ScriptedProviderClient::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace airlens
