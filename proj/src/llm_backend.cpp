#include "finsent/llm_backend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "finsent/jsonl.hpp"
#include "finsent/rng.hpp"

namespace finsent {

using nlohmann::json;

void validate(const CompletionRequest& request) {
  if (request.temperature < 0) {
    throw DataError("completion request: temperature must be >= 0");
  }
  if (request.max_tokens < 1) {
    throw DataError("completion request: max_tokens must be >= 1");
  }
}

void validate(const SamplingConfig& config) {
  if (config.n_paths < 1) {
    throw DataError("sampling config: n_paths must be >= 1");
  }
  if (config.temperature < 0) {
    throw DataError("sampling config: temperature must be >= 0");
  }
  if (config.max_tokens < 1) {
    throw DataError("sampling config: max_tokens must be >= 1");
  }
  if (config.parallelism < 1) {
    throw DataError("sampling config: parallelism must be >= 1");
  }
}

MockBackend::MockBackend(std::vector<MockRule> rules, std::string fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {
  for (const MockRule& rule : rules_) {
    if (rule.match.empty()) {
      throw DataError("mock script: empty match pattern");
    }
    if (rule.continuations.empty()) {
      throw DataError("mock script: rule \"" + rule.match +
                      "\" has no continuations");
    }
    for (const auto& [text, weight] : rule.continuations) {
      if (!(weight > 0) || !std::isfinite(weight)) {
        throw DataError("mock script: rule \"" + rule.match +
                        "\" has a non-positive weight");
      }
    }
  }
}

std::vector<MockRule> MockBackend::load_script(const std::filesystem::path& path) {
  std::vector<MockRule> rules;
  jsonl::for_each_object(path, [&](std::size_t line_no, const json& obj) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    MockRule rule;
    rule.match = jsonl::get_string(obj, "match", where);
    auto it = obj.find("continuations");
    if (it == obj.end() || !it->is_array() || it->empty()) {
      throw DataError(where + ": \"continuations\" must be a non-empty array");
    }
    for (const auto& c : *it) {
      if (!c.is_object()) {
        throw DataError(where + ": continuation entries must be objects");
      }
      rule.continuations.emplace_back(jsonl::get_string(c, "text", where),
                                      jsonl::get_number(c, "weight", where));
    }
    rules.push_back(std::move(rule));
  });
  return rules;
}

CompletionResult MockBackend::complete(const CompletionRequest& request) {
  validate(request);
  ++calls_;

  // Rules see only the query block (the prompt's final paragraph), so
  // pattern words inside demonstrations never trigger them.
  std::size_t para = request.prompt.rfind("\n\n");
  std::string tail =
      para == std::string::npos ? request.prompt : request.prompt.substr(para + 2);

  const MockRule* rule = nullptr;
  for (const MockRule& candidate : rules_) {
    if (tail.find(candidate.match) != std::string::npos) {
      rule = &candidate;
      break;
    }
  }

  CompletionResult result;
  result.backend_id = id();
  result.latency_ms = 0;
  if (rule == nullptr) {
    result.text = fallback_;
    return result;
  }

  const auto& conts = rule->continuations;
  std::size_t choice = 0;
  if (request.temperature == 0.0) {
    // Greedy limit: highest weight wins, first on ties.
    for (std::size_t i = 1; i < conts.size(); ++i) {
      if (conts[i].second > conts[choice].second) choice = i;
    }
  } else {
    // p_i proportional to w_i^(1/T), computed as a stable softmax over
    // log(w_i)/T. One draw keyed by (hash(prompt), seed).
    std::vector<double> logit(conts.size());
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < conts.size(); ++i) {
      logit[i] = std::log(conts[i].second) / request.temperature;
      max_logit = std::max(max_logit, logit[i]);
    }
    double z = 0;
    for (double& l : logit) {
      l = std::exp(l - max_logit);
      z += l;
    }
    DetRng rng(derive_seed(fnv1a64(request.prompt), request.seed.value_or(0)));
    double u = rng.next_double() * z;
    double cum = 0;
    for (std::size_t i = 0; i < conts.size(); ++i) {
      cum += logit[i];
      if (u < cum) {
        choice = i;
        break;
      }
      choice = i;  // numeric slack: fall through to the last continuation
    }
  }
  result.text = conts[choice].first;
  return result;
}

HttpBackendConfig http_config_from_env() {
  HttpBackendConfig config;
  const char* endpoint = std::getenv("FINSENT_API_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') {
    throw BackendError("FINSENT_API_ENDPOINT is not set");
  }
  config.endpoint = endpoint;
  if (const char* key = std::getenv("FINSENT_API_KEY")) {
    config.api_key = key;
  }
  return config;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    throw BackendError("http backend: empty endpoint");
  }
}

CompletionResult HttpBackend::complete(const CompletionRequest& request) {
  validate(request);
  ++calls_;

  json body{{"prompt", request.prompt},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
  if (request.seed) body["seed"] = *request.seed;
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          config_.backoff_initial_ms << (attempt - 1)));
    }
    auto start = std::chrono::steady_clock::now();
    // One client per call keeps complete() reentrant.
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout_sec, 0);
    client.set_read_timeout(config_.timeout_sec, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    auto res = client.Post(config_.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error (" + httplib::to_string(res.error()) + ")";
      continue;  // retryable
    }
    if (res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;  // retryable
    }
    if (res->status != 200) {
      throw BackendError("backend " + config_.endpoint + " returned status " +
                         std::to_string(res->status));
    }
    json reply = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") ||
        !reply["text"].is_string()) {
      throw BackendError("backend " + config_.endpoint +
                         " returned a malformed completion body");
    }
    CompletionResult result;
    result.text = reply["text"].get<std::string>();
    result.backend_id = id();
    result.latency_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start)
            .count());
    return result;
  }
  throw BackendError("backend " + config_.endpoint + " failed after " +
                     std::to_string(config_.max_attempts) + " attempts: " +
                     last_error);
}

std::vector<CompletionResult> sample_paths(CompletionBackend& backend,
                                           const std::string& prompt,
                                           const SamplingConfig& config,
                                           std::uint64_t base_seed) {
  validate(config);
  const int n = config.n_paths;
  std::vector<CompletionResult> results(static_cast<std::size_t>(n));

  auto run_path = [&](int i) {
    CompletionRequest request;
    request.prompt = prompt;
    request.temperature = config.temperature;
    request.max_tokens = config.max_tokens;
    request.seed = derive_seed(base_seed, static_cast<std::uint64_t>(i));
    results[static_cast<std::size_t>(i)] = backend.complete(request);
  };

  if (config.parallelism <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) run_path(i);
    return results;
  }

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure) return;
      }
      try {
        run_path(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  int n_workers = std::min(config.parallelism, n);
  threads.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  // A partial path set would bias agreement counts, so any failure fails
  // the whole batch.
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace finsent
