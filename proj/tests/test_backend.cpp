#include "finsent/llm_backend.hpp"

#include <cstdlib>
#include <set>
#include <thread>

#include <doctest.h>
#include <httplib.h>

#include "finsent/rng.hpp"
#include "support/synthetic.hpp"
#include "support/testutil.hpp"

using namespace finsent;
using namespace finsent::testsupport;

namespace {

std::vector<MockRule> two_rules() {
  return {
      {"moon", {{" Up story. Answer: go up.", 0.8}, {" Down story. Answer: go down.", 0.2}}},
      {"crash", {{" Down story. Answer: go down.", 1.0}}},
  };
}

CompletionRequest request_for(const std::string& prompt, double temperature,
                              std::uint64_t seed) {
  CompletionRequest request;
  request.prompt = prompt;
  request.temperature = temperature;
  request.seed = seed;
  return request;
}

}  // namespace

TEST_CASE("mock backend is a pure function of prompt, temperature, seed") {
  MockBackend backend(two_rules());
  auto a = backend.complete(request_for("intro\n\nquery about moon", 0.7, 5));
  auto b = backend.complete(request_for("intro\n\nquery about moon", 0.7, 5));
  CHECK(a.text == b.text);
  CHECK(backend.calls() == 2);
}

TEST_CASE("mock temperature zero returns the heaviest continuation") {
  MockBackend backend(two_rules());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto result = backend.complete(request_for("moon talk", 0.0, seed));
    CHECK(result.text == " Up story. Answer: go up.");
  }
}

TEST_CASE("mock matches patterns against the final paragraph only") {
  MockBackend backend(two_rules());
  // "moon" appears in a demonstration paragraph, the query mentions crash.
  auto result = backend.complete(
      request_for("demo about moon\n\nquery about crash\nTL;DR:", 0.0, 1));
  CHECK(result.text == " Down story. Answer: go down.");

  SUBCASE("no matching rule falls back to an unparseable stub") {
    auto fallback = backend.complete(request_for("nothing matches\n\nhere", 0.0, 1));
    CHECK(fallback.text == "(no opinion)");
  }
}

TEST_CASE("mock sampling frequencies follow weight^(1/T)") {
  MockBackend backend(two_rules());
  // weights 0.8 / 0.2 at T = 0.5: p(down) = 0.2^2 / (0.8^2 + 0.2^2) = 1/17
  int down = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    auto result = backend.complete(
        request_for("x\n\nmoon", 0.5, static_cast<std::uint64_t>(i)));
    down += result.text.find("go down") != std::string::npos ? 1 : 0;
  }
  double rate = static_cast<double>(down) / trials;
  CHECK(rate == doctest::Approx(1.0 / 17.0).epsilon(0.25));
}

TEST_CASE("mock script files load and validate") {
  auto dir = scratch_dir("backend");
  auto path = dir / "script.jsonl";

  SUBCASE("well-formed script") {
    write_file(path,
               R"({"match": "moon", "continuations": [{"text": "up", "weight": 1.0}]})" "\n");
    auto rules = MockBackend::load_script(path);
    REQUIRE(rules.size() == 1);
    CHECK(rules[0].match == "moon");
  }

  SUBCASE("non-positive weight rejected") {
    write_file(path,
               R"({"match": "moon", "continuations": [{"text": "up", "weight": 0}]})" "\n");
    expect_error<DataError>(
        [&] { MockBackend(MockBackend::load_script(path)); }, "weight");
  }

  SUBCASE("missing continuations rejected") {
    write_file(path, R"({"match": "moon", "continuations": []})" "\n");
    expect_error<DataError>([&] { MockBackend::load_script(path); },
                            "continuations");
  }
}

TEST_CASE("request and sampling validation") {
  MockBackend backend(two_rules());
  CompletionRequest bad;
  bad.prompt = "x";
  bad.temperature = -0.1;
  expect_error<DataError>([&] { backend.complete(bad); }, "temperature");

  SamplingConfig config;
  config.n_paths = 0;
  expect_error<DataError>([&] { sample_paths(backend, "x", config, 0); },
                          "n_paths");
}

TEST_CASE("sample_paths returns exactly n_paths results in path order") {
  MockBackend backend(two_rules());
  SamplingConfig config;
  config.n_paths = 8;
  config.temperature = 0.5;
  auto paths = sample_paths(backend, "x\n\nmoon", config, 99);
  CHECK(paths.size() == 8);

  SUBCASE("identical inputs give identical lists") {
    auto again = sample_paths(backend, "x\n\nmoon", config, 99);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      CHECK(paths[i].text == again[i].text);
    }
  }

  SUBCASE("concurrent fan-out does not change the result") {
    auto parallel_config = config;
    parallel_config.parallelism = 4;
    auto parallel = sample_paths(backend, "x\n\nmoon", parallel_config, 99);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      CHECK(parallel[i].text == paths[i].text);
    }
  }

  SUBCASE("single greedy path equals complete()") {
    SamplingConfig one;
    one.n_paths = 1;
    one.temperature = 0.0;
    auto single = sample_paths(backend, "x\n\nmoon", one, 4);
    REQUIRE(single.size() == 1);
    CompletionRequest request;
    request.prompt = "x\n\nmoon";
    request.temperature = 0.0;
    request.seed = derive_seed(4, 0);
    CHECK(single[0].text == backend.complete(request).text);
  }
}

TEST_CASE("per-path seed derivation is collision-free") {
  DetRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::uint64_t base = rng.next_u64();
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 64; ++i) {
      seeds.insert(derive_seed(base, i));
    }
    CHECK(seeds.size() == 64);
  }
}

TEST_CASE("http backend surfaces transport errors with the endpoint name") {
  HttpBackendConfig config;
  config.endpoint = "http://127.0.0.1:9";  // discard port: nothing listens
  config.max_attempts = 2;
  config.backoff_initial_ms = 1;
  config.timeout_sec = 1;
  HttpBackend backend(config);
  CompletionRequest request;
  request.prompt = "hello";
  expect_error<BackendError>([&] { backend.complete(request); },
                             "127.0.0.1:9");
}

TEST_CASE("http backend completes and retries against a live server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::atomic<int> failures_to_serve{0};
  server.Post("/v1/complete", [&](const httplib::Request& req,
                                  httplib::Response& res) {
    ++hits;
    if (failures_to_serve.fetch_sub(1) > 0) {
      res.status = 503;
      return;
    }
    auto body = nlohmann::json::parse(req.body);
    nlohmann::json reply{{"text", "echo:" + body["prompt"].get<std::string>()}};
    res.set_content(reply.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread serving([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port);
  config.backoff_initial_ms = 1;
  HttpBackend backend(config);

  CompletionRequest request;
  request.prompt = "ping";
  request.seed = 7;

  SUBCASE("successful completion") {
    auto result = backend.complete(request);
    CHECK(result.text == "echo:ping");
    CHECK(result.backend_id == "http:" + config.endpoint);
  }

  SUBCASE("5xx responses are retried") {
    failures_to_serve = 2;
    auto result = backend.complete(request);
    CHECK(result.text == "echo:ping");
    CHECK(hits == 3);
  }

  SUBCASE("retry budget exhausts into a backend error") {
    failures_to_serve = 100;
    expect_error<BackendError>([&] { backend.complete(request); }, "attempts");
    CHECK(hits == 3);
  }

  server.stop();
  serving.join();
}

TEST_CASE("environment-driven http config") {
  ::unsetenv("FINSENT_API_ENDPOINT");
  expect_error<BackendError>([] { http_config_from_env(); },
                             "FINSENT_API_ENDPOINT");
  ::setenv("FINSENT_API_ENDPOINT", "http://example:1234", 1);
  ::setenv("FINSENT_API_KEY", "sekrit", 1);
  auto config = http_config_from_env();
  CHECK(config.endpoint == "http://example:1234");
  CHECK(config.api_key == "sekrit");
  ::unsetenv("FINSENT_API_ENDPOINT");
  ::unsetenv("FINSENT_API_KEY");
}
