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

#ifndef WCNSLU_LLM_CLIENT_H_
#define WCNSLU_LLM_CLIENT_H_

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace wcnslu {

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 256;
  double temperature = 0.0;  // deterministic decoding for evaluation
  std::string model_id;
};

struct CompletionResult {
  std::string text;  // raw completion, untrimmed
  double latency_ms = 0.0;
  bool from_cache = false;
};

// Stable SHA-256 digest (lowercase hex) over (model_id, prompt, max_tokens,
// temperature); identical requests produce identical keys across processes
// and platforms.
std::string CacheKey(const CompletionRequest& req);

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResult Complete(const CompletionRequest& req) = 0;
};

// Deterministic in-memory backend: responses are scripted per request digest,
// with a fixed fallback text. Configure before sharing across threads.
class MockBackend : public CompletionBackend {
 public:
  explicit MockBackend(std::string default_text = "") : default_(std::move(default_text)) {}

  void SetResponse(const std::string& cache_key, std::string text) {
    by_key_[cache_key] = std::move(text);
  }
  void SetResponseForRequest(const CompletionRequest& req, std::string text) {
    SetResponse(CacheKey(req), std::move(text));
  }

  CompletionResult Complete(const CompletionRequest& req) override;

 private:
  std::map<std::string, std::string> by_key_;
  std::string default_;
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. "http://127.0.0.1:8080/v1"
  std::string completions_path = "/chat/completions";
  std::string api_key_env;  // name of the env var holding the credential
  int max_attempts = 3;
  int backoff_initial_ms = 100;
  int backoff_max_ms = 2000;
  int requests_per_minute = 0;  // 0 = unlimited
  int timeout_sec = 120;
};

// Chat/completions-style HTTP backend. Sends one user message per request and
// takes the first choice's text as the completion. Transient failures
// (connect errors, 5xx, 429) are retried with bounded exponential backoff;
// 4xx-class rejections are never re-sent.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  CompletionResult Complete(const CompletionRequest& req) override;

 private:
  void AwaitRequestBudget();

  HttpBackendConfig config_;
  std::string host_;         // scheme://host[:port]
  std::string path_prefix_;  // path part of base_url
  std::mutex budget_mutex_;
  std::vector<double> recent_requests_;  // seconds, monotonic
};

// Record/replay decorator. Hits are served from the persistent cache with
// from_cache=true; misses go to the wrapped backend (when present) and are
// appended to the cache file. With no wrapped backend this is a replay-only
// client and a miss raises BackendUnavailable, which makes full harness runs
// bit-reproducible offline. Appends are serialized; Complete may be called
// concurrently up to the in-flight limit.
class CachingClient : public CompletionBackend {
 public:
  CachingClient(std::shared_ptr<CompletionBackend> backend, std::string cache_path,
                int in_flight_limit = 4);
  ~CachingClient() override;

  CompletionResult Complete(const CompletionRequest& req) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wcnslu

#endif  // WCNSLU_LLM_CLIENT_H_
