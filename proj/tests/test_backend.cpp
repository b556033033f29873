#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <thread>

#include "e2g/backend.hpp"
#include "e2g/errors.hpp"
#include "helpers.hpp"

using namespace e2g;
using e2g::test::TempDir;

TEST_CASE("cache keys hash the semantic request fields only") {
  CompletionRequest a{"model-x", "some prompt", 256, 0.0, "inst1:E"};
  CompletionRequest b = a;
  b.request_tag = "inst2:E";  // tag must not matter
  CHECK(cache_key_for(a) == cache_key_for(b));
  CHECK(cache_key_for(a).digest.size() == 64);

  CompletionRequest c = a;
  c.prompt = "some prompt!";
  CHECK(cache_key_for(a).digest != cache_key_for(c).digest);
  CompletionRequest d = a;
  d.model_id = "model-y";
  CHECK(cache_key_for(a).digest != cache_key_for(d).digest);
  CompletionRequest e = a;
  e.max_output_tokens = 512;
  CHECK(cache_key_for(a).digest != cache_key_for(e).digest);
  CompletionRequest f = a;
  f.temperature = 0.7;
  CHECK(cache_key_for(a).digest != cache_key_for(f).digest);
}

TEST_CASE("cost estimate uses per-1K rates") {
  CompletionResponse response;
  response.prompt_tokens = 2000;
  response.output_tokens = 500;
  CostModel model{0.5, 1.5};
  CHECK(estimate_cost(response, model) == doctest::Approx(2.0 * 0.5 + 0.5 * 1.5));
  CHECK(estimate_cost(response, CostModel{}) == doctest::Approx(0.0));
}

TEST_CASE("replay backend serves recorded transcripts and flags misses") {
  TempDir tmp;
  CompletionRequest request{"m", "recorded prompt", 256, 0.0, "i:E"};
  CompletionResponse recorded;
  recorded.text = "Answer: yes\nEvidence and explanation: stated.";
  recorded.prompt_tokens = 11;
  recorded.output_tokens = 12;
  recorded.latency_ms = 321;

  {
    TranscriptStore store(tmp / "store");
    store.put(cache_key_for(request), transcript_payload(request, recorded));
  }

  ReplayBackend backend{TranscriptStore(tmp / "store")};
  CompletionResponse served = backend.complete(request);
  CHECK(served.text == recorded.text);
  CHECK(served.prompt_tokens == 11);
  CHECK(served.output_tokens == 12);
  CHECK(served.latency_ms == 321);
  CHECK(served.source == ResponseSource::replay);

  CompletionRequest miss = request;
  miss.prompt = "never recorded";
  try {
    backend.complete(miss);
    FAIL_CHECK("expected ReplayMissError");
  } catch (const ReplayMissError& e) {
    CHECK(e.key() == cache_key_for(miss).digest);
  }
}

TEST_CASE("replay backend with fallback records fresh responses") {
  TempDir tmp;
  auto scripted = std::make_shared<e2g::test::ScriptedBackend>(
      [](const CompletionRequest&) { return std::string("fresh text"); });

  ReplayBackend backend{TranscriptStore(tmp / "store"), scripted};
  CompletionRequest request{"m", "new prompt", 256, 0.0, "i:E"};

  CompletionResponse first = backend.complete(request);
  CHECK(first.text == "fresh text");
  CHECK(scripted->calls() == 1);

  // second call replays; the fallback is not consulted again
  CompletionResponse second = backend.complete(request);
  CHECK(second.text == "fresh text");
  CHECK(second.source == ResponseSource::replay);
  CHECK(scripted->calls() == 1);
}

namespace {

struct LocalServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server.Post("/v1/completions", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this]() { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~LocalServer() {
    server.stop();
    thread.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

HttpBackendConfig fast_config(const std::string& url) {
  HttpBackendConfig config;
  config.base_url = url;
  config.api_key = "test-key";
  config.max_retries = 2;
  config.initial_backoff_ms = 1;
  config.timeout_sec = 5;
  return config;
}

}  // namespace

TEST_CASE("http backend round-trips an OpenAI-style completion") {
  std::atomic<int> hits{0};
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    hits.fetch_add(1);
    CHECK(req.get_header_value("Authorization") == "Bearer test-key");
    auto body = nlohmann::json::parse(req.body);
    CHECK(body.at("model") == "m1");
    CHECK(body.at("max_tokens") == 256);
    nlohmann::json out{{"choices", {{{"text", "Answer: 42"}}}},
                       {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
    res.set_content(out.dump(), "application/json");
  });

  HttpBackend backend(fast_config(server.url()));
  CompletionResponse response =
      backend.complete(CompletionRequest{"m1", "what is the answer", 256, 0.0, "t"});
  CHECK(response.text == "Answer: 42");
  CHECK(response.prompt_tokens == 7);
  CHECK(response.output_tokens == 3);
  CHECK(response.source == ResponseSource::live);
  CHECK(hits.load() == 1);
}

TEST_CASE("http backend estimates usage when the body omits it") {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    nlohmann::json out{{"choices", {{{"text", "yes"}}}}};
    res.set_content(out.dump(), "application/json");
  });
  HttpBackend backend(fast_config(server.url()));
  CompletionResponse response =
      backend.complete(CompletionRequest{"m1", "12345678", 256, 0.0, "t"});
  CHECK(response.prompt_tokens == 2);  // ceil(8 / 4)
  CHECK(response.output_tokens == 1);
}

TEST_CASE("http backend retries 5xx and succeeds") {
  std::atomic<int> hits{0};
  LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    if (hits.fetch_add(1) < 2) {
      res.status = 503;
      return;
    }
    nlohmann::json out{{"choices", {{{"text", "late success"}}}}};
    res.set_content(out.dump(), "application/json");
  });
  HttpBackend backend(fast_config(server.url()));
  CompletionResponse response = backend.complete(CompletionRequest{"m", "p", 64, 0.0, "t"});
  CHECK(response.text == "late success");
  CHECK(hits.load() == 3);
}

TEST_CASE("http backend maps terminal statuses to typed errors") {
  std::atomic<int> hits{0};
  std::atomic<int> status{401};
  LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    hits.fetch_add(1);
    res.status = status.load();
  });
  HttpBackend backend(fast_config(server.url()));

  CHECK_THROWS_AS(backend.complete(CompletionRequest{"m", "p", 64, 0.0, "t"}), AuthError);
  CHECK(hits.load() == 1);  // no retry on auth failures

  hits.store(0);
  status.store(429);
  CHECK_THROWS_AS(backend.complete(CompletionRequest{"m", "p", 64, 0.0, "t"}), RateLimitError);
  CHECK(hits.load() == 3);  // initial attempt plus two retries

  hits.store(0);
  status.store(500);
  CHECK_THROWS_AS(backend.complete(CompletionRequest{"m", "p", 64, 0.0, "t"}), BackendError);
  CHECK(hits.load() == 3);

  hits.store(0);
  status.store(404);
  CHECK_THROWS_AS(backend.complete(CompletionRequest{"m", "p", 64, 0.0, "t"}), BackendError);
  CHECK(hits.load() == 1);  // other 4xx do not retry
}

TEST_CASE("http backend surfaces transport failures as BackendError") {
  HttpBackendConfig config = fast_config("http://127.0.0.1:1");  // nothing listens there
  config.max_retries = 1;
  HttpBackend backend(config);
  CHECK_THROWS_AS(backend.complete(CompletionRequest{"m", "p", 64, 0.0, "t"}), BackendError);
}

TEST_CASE("backend config validation") {
  CHECK_THROWS_AS(HttpBackend{HttpBackendConfig{}}, ConfigError);
  HttpBackendConfig bad;
  bad.base_url = "http://x";
  bad.max_in_flight = 0;
  CHECK_THROWS_AS(HttpBackend{bad}, ConfigError);
}
