// Copyright 2026 The wcnslu Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wcnslu/llm_client.h"

#include <openssl/evp.h>

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "wcnslu/error.h"

namespace wcnslu {

namespace {

using nlohmann::json;

double NowSeconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string Sha256Hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char kHex[] = "0123456789abcdef";
  std::string hex(2 * len, '0');
  for (unsigned int i = 0; i < len; ++i) {
    hex[2 * i] = kHex[digest[i] >> 4];
    hex[2 * i + 1] = kHex[digest[i] & 0xf];
  }
  return hex;
}

}  // namespace

std::string CacheKey(const CompletionRequest& req) {
  char temp[32];
  std::snprintf(temp, sizeof(temp), "%.17g", req.temperature);
  std::string canonical = req.model_id;
  canonical += '\x1f';
  canonical += req.prompt;
  canonical += '\x1f';
  canonical += std::to_string(req.max_tokens);
  canonical += '\x1f';
  canonical += temp;
  return Sha256Hex(canonical);
}

CompletionResult MockBackend::Complete(const CompletionRequest& req) {
  auto it = by_key_.find(CacheKey(req));
  return {it != by_key_.end() ? it->second : default_, 0.0, false};
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  size_t scheme = config_.base_url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("base_url must start with http:// or https://");
  }
  size_t path = config_.base_url.find('/', scheme + 3);
  if (path == std::string::npos) {
    host_ = config_.base_url;
  } else {
    host_ = config_.base_url.substr(0, path);
    path_prefix_ = config_.base_url.substr(path);
  }
}

void HttpBackend::AwaitRequestBudget() {
  if (config_.requests_per_minute <= 0) return;
  while (true) {
    double wait_s = 0.0;
    {
      std::lock_guard<std::mutex> lock(budget_mutex_);
      double now = NowSeconds();
      std::erase_if(recent_requests_, [now](double t) { return now - t >= 60.0; });
      if (recent_requests_.size() < static_cast<size_t>(config_.requests_per_minute)) {
        recent_requests_.push_back(now);
        return;
      }
      wait_s = 60.0 - (now - recent_requests_.front());
    }
    std::this_thread::sleep_for(
        std::chrono::milliseconds(static_cast<int>(wait_s * 1000) + 1));
  }
}

CompletionResult HttpBackend::Complete(const CompletionRequest& req) {
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw AuthError("credential environment variable " + config_.api_key_env +
                      " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  json body = {
      {"model", req.model_id},
      {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
      {"max_tokens", req.max_tokens},
      {"temperature", req.temperature},
  };
  const std::string payload = body.dump();
  const std::string path = path_prefix_ + config_.completions_path;

  int backoff_ms = config_.backoff_initial_ms;
  std::string last_failure;
  for (int attempt = 1; attempt <= std::max(1, config_.max_attempts); ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms = std::min(backoff_ms * 2, config_.backoff_max_ms);
    }
    AwaitRequestBudget();

    auto start = std::chrono::steady_clock::now();
    httplib::Client client(host_);
    client.set_connection_timeout(config_.timeout_sec);
    client.set_read_timeout(config_.timeout_sec);
    auto res = client.Post(path, headers, payload, "application/json");
    double elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                  start)
            .count();

    if (!res) {
      last_failure = "connection failed: " + httplib::to_string(res.error());
      continue;  // transient
    }
    if (res->status == 200) {
      json reply;
      try {
        reply = json::parse(res->body);
      } catch (const json::exception& e) {
        throw MalformedResponse(std::string("response is not JSON: ") + e.what());
      }
      if (!reply.contains("choices") || !reply["choices"].is_array() ||
          reply["choices"].empty()) {
        throw MalformedResponse("response has no choices");
      }
      const json& choice = reply["choices"][0];
      if (choice.contains("message") && choice["message"].contains("content") &&
          choice["message"]["content"].is_string()) {
        return {choice["message"]["content"].get<std::string>(), elapsed_ms, false};
      }
      if (choice.contains("text") && choice["text"].is_string()) {
        return {choice["text"].get<std::string>(), elapsed_ms, false};
      }
      throw MalformedResponse("first choice carries no completion text");
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError("backend rejected credentials (HTTP " +
                      std::to_string(res->status) + ")");
    }
    if (res->status == 429) {
      last_failure = "HTTP 429";
      if (attempt == config_.max_attempts) {
        throw RateLimited("request budget exhausted after " +
                          std::to_string(attempt) + " attempts");
      }
      continue;  // transient
    }
    if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;  // transient
    }
    // Remaining 4xx-class failures are final; never re-send.
    throw BackendUnavailable("backend rejected request (HTTP " +
                             std::to_string(res->status) + ")");
  }
  throw BackendUnavailable("backend unreachable after " +
                           std::to_string(config_.max_attempts) +
                           " attempts: " + last_failure);
}

namespace {

// Runtime-sized counting semaphore guarding concurrent Complete calls.
class InFlightLimit {
 public:
  explicit InFlightLimit(int count) : count_(count) {}

  void Acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [this] { return count_ > 0; });
    --count_;
  }
  void Release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int count_;
};

}  // namespace

struct CachingClient::Impl {
  std::shared_ptr<CompletionBackend> backend;
  std::string cache_path;
  InFlightLimit limit;
  std::mutex cache_mutex;
  std::map<std::string, std::string> cache;
  std::ofstream appender;

  Impl(std::shared_ptr<CompletionBackend> b, std::string path, int in_flight)
      : backend(std::move(b)), cache_path(std::move(path)),
        limit(std::max(1, in_flight)) {
    LoadAndRepair();
    if (!cache_path.empty()) {
      appender.open(cache_path, std::ios::app);
      if (!appender) throw IoError("cannot open cache file " + cache_path);
    }
  }

  // Loads the append-only record file. A corrupt trailing record (e.g. a
  // half-written line after a crash) is dropped and the file truncated back
  // to its last valid record.
  void LoadAndRepair() {
    if (cache_path.empty()) return;
    std::ifstream in(cache_path, std::ios::binary);
    if (!in) return;  // no cache yet
    std::string line;
    std::uintmax_t valid_bytes = 0;
    bool corrupt = false;
    while (std::getline(in, line)) {
      bool had_newline = !in.eof();
      try {
        json rec = json::parse(line);
        cache[rec.at("key").get<std::string>()] = rec.at("response").get<std::string>();
      } catch (const json::exception&) {
        corrupt = true;
        break;
      }
      if (!had_newline) {
        // Complete JSON but no trailing newline; keep it and let the next
        // append start cleanly.
        valid_bytes += line.size();
        break;
      }
      valid_bytes += line.size() + 1;
    }
    if (corrupt) {
      std::filesystem::resize_file(cache_path, valid_bytes);
    }
  }

  void Append(const CompletionRequest& req, const std::string& key,
              const std::string& response) {
    cache[key] = response;
    if (!appender.is_open()) return;
    json rec = {
        {"key", key},
        {"model", req.model_id},
        {"max_tokens", req.max_tokens},
        {"temperature", req.temperature},
        {"response", response},
    };
    appender << rec.dump() << '\n';
    appender.flush();
  }
};

CachingClient::CachingClient(std::shared_ptr<CompletionBackend> backend,
                             std::string cache_path, int in_flight_limit)
    : impl_(std::make_unique<Impl>(std::move(backend), std::move(cache_path),
                                   in_flight_limit)) {}

CachingClient::~CachingClient() = default;

CompletionResult CachingClient::Complete(const CompletionRequest& req) {
  impl_->limit.Acquire();
  struct Releaser {
    InFlightLimit* l;
    ~Releaser() { l->Release(); }
  } releaser{&impl_->limit};

  const std::string key = CacheKey(req);
  {
    std::lock_guard<std::mutex> lock(impl_->cache_mutex);
    auto it = impl_->cache.find(key);
    if (it != impl_->cache.end()) {
      return {it->second, 0.0, true};
    }
  }
  if (impl_->backend == nullptr) {
    throw BackendUnavailable("replay cache miss for key " + key);
  }
  CompletionResult result = impl_->backend->Complete(req);
  {
    std::lock_guard<std::mutex> lock(impl_->cache_mutex);
    impl_->Append(req, key, result.text);
  }
  return result;
}

}  // namespace wcnslu
