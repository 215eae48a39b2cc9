#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finsent/errors.hpp"

namespace finsent {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.5;
  int max_tokens = 256;
  std::optional<std::uint64_t> seed;
};

struct CompletionResult {
  std::string text;  // continuation only, prompt not echoed
  std::string backend_id;
  std::uint64_t latency_ms = 0;
};

struct SamplingConfig {
  int n_paths = 8;
  double temperature = 0.5;
  int max_tokens = 256;
  int parallelism = 1;
};

void validate(const CompletionRequest& request);
void validate(const SamplingConfig& config);

// Text-completion service. Implementations must be shareable across
// threads; complete() is reentrant.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
  virtual std::string id() const = 0;

  // Total completions served; used by manifests and tests.
  std::uint64_t calls() const { return calls_.load(); }

 protected:
  std::atomic<std::uint64_t> calls_{0};
};

// One scripted rule: a substring pattern matched against the final
// paragraph of the prompt (the query block), and weighted continuations.
struct MockRule {
  std::string match;
  std::vector<std::pair<std::string, double>> continuations;  // (text, weight)
};

// Deterministic scripted backend. A completion is a pure function of
// (prompt, temperature, seed): the first rule whose pattern occurs in the
// prompt's final paragraph supplies the continuation set; temperature 0
// picks the highest-weight continuation, otherwise continuation i is drawn
// with probability proportional to weight_i^(1/T) using a counter-free
// draw keyed by (fnv1a64(prompt), seed).
class MockBackend : public CompletionBackend {
 public:
  explicit MockBackend(std::vector<MockRule> rules,
                       std::string fallback = "(no opinion)");

  // Script file: JSONL of {"match": str, "continuations":
  // [{"text": str, "weight": number}]}.
  static std::vector<MockRule> load_script(const std::filesystem::path& path);

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return "mock"; }

 private:
  std::vector<MockRule> rules_;
  std::string fallback_;  // continuation when no rule matches
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://host:port
  std::string api_key;
  std::string path = "/v1/complete";
  int timeout_sec = 30;
  int max_attempts = 3;
  int backoff_initial_ms = 500;  // doubled per retry
};

// Reads FINSENT_API_ENDPOINT / FINSENT_API_KEY; throws BackendError when
// the endpoint is unset.
HttpBackendConfig http_config_from_env();

// Minimal completion-API client: POST {prompt, temperature, max_tokens,
// seed?} -> {"text": str}. Retries transport failures and 5xx statuses
// with exponential backoff.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return "http:" + config_.endpoint; }

 private:
  HttpBackendConfig config_;
};

// Runs n_paths completions of the same prompt, path i seeded with
// derive_seed(base_seed, i); results are ordered by path index. Paths may
// execute concurrently up to config.parallelism, but any failure fails the
// whole call so agreement denominators never shrink silently.
std::vector<CompletionResult> sample_paths(CompletionBackend& backend,
                                           const std::string& prompt,
                                           const SamplingConfig& config,
                                           std::uint64_t base_seed);

}  // namespace finsent
