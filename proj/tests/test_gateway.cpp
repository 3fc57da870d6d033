#include <doctest.h>

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "promptlog/gateway.hpp"
#include "promptlog/json_io.hpp"
#include "promptlog/prompt.hpp"

#include "helpers.hpp"

using namespace promptlog;

namespace {

BackendConfig scripted_config() {
  BackendConfig config;
  config.kind = BackendKind::Scripted;
  return config;
}

PromptSpec anomaly_prompt(const std::vector<std::string>& logs) {
  return build_simple_prompt(Task::Anomaly, logs);
}

/// Backend that records every transmitted prompt before delegating.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(Backend& inner) : inner_(inner) {}

  std::string complete(const std::string& prompt_text, double temperature) override {
    transmitted.push_back(prompt_text);
    return inner_.complete(prompt_text, temperature);
  }

  std::vector<std::string> transmitted;

 private:
  Backend& inner_;
};

}  // namespace

TEST_CASE("scripted backend replays fixtures by digest") {
  ScriptedBackend backend;
  backend.script("prompt text", {"(1) normal - ok"});
  CHECK(backend.complete("prompt text", 0.5) == "(1) normal - ok");
  CHECK_THROWS_AS(backend.complete("unknown prompt", 0.5), FixtureMissingError);

  backend.script_fallback({"fallback"});
  CHECK(backend.complete("unknown prompt", 0.5) == "fallback");
}

TEST_CASE("scripted sequences consume in order and stick on the last") {
  ScriptedBackend backend;
  backend.script("p", {"one", "two"});
  CHECK(backend.complete("p", 0.5) == "one");
  CHECK(backend.complete("p", 0.5) == "two");
  CHECK(backend.complete("p", 0.5) == "two");
}

TEST_CASE("scripted fixtures load from a json file") {
  testutil::ScratchDir dir("fixtures_file");
  testutil::write_file(dir / "responses.json",
                       "{\"" + prompt_digest("p") + "\": [\"a\", \"b\"], \"*\": \"rest\"}");
  const auto backend = ScriptedBackend::from_file(dir / "responses.json");
  CHECK(backend->complete("p", 0.5) == "a");
  CHECK(backend->complete("p", 0.5) == "b");
  CHECK(backend->complete("other", 0.5) == "rest");

  testutil::write_file(dir / "broken.json", "not json");
  CHECK_THROWS_AS(ScriptedBackend::from_file(dir / "broken.json"), GatewayError);
}

TEST_CASE("first valid attempt wins at the initial temperature") {
  const PromptSpec prompt = anomaly_prompt({"log one"});
  ScriptedBackend backend;
  backend.script(prompt.assembled(), {"(1) normal - quiet"});

  const QueryResult result = query_with_retry(backend, scripted_config(), prompt, 1,
                                              make_coverage_validator(1, Task::Anomaly));
  REQUIRE(result.ok());
  REQUIRE(result.record.attempts.size() == 1);
  CHECK(result.record.attempts[0].temperature == 0.5);
  CHECK(result.record.attempts[0].format_valid);
  CHECK(result.answers.size() == 1);
  CHECK(result.answers[0].answer == "normal");
}

TEST_CASE("invalid responses escalate the temperature additively") {
  const PromptSpec prompt = anomaly_prompt({"log one", "log two"});
  ScriptedBackend backend;
  backend.script(prompt.assembled(),
                 {"garbage", "(1) normal - a\n(2) abnormal - b"});

  const QueryResult result = query_with_retry(backend, scripted_config(), prompt, 2,
                                              make_coverage_validator(2, Task::Anomaly));
  REQUIRE(result.ok());
  REQUIRE(result.record.attempts.size() == 2);
  CHECK(result.record.attempts[0].temperature == 0.5);
  CHECK(result.record.attempts[1].temperature == 0.9);
  CHECK_FALSE(result.record.attempts[0].format_valid);
  CHECK(result.record.attempts[1].format_valid);
}

TEST_CASE("fail twice then succeed yields the documented schedules") {
  const PromptSpec prompt = anomaly_prompt({"log one"});

  SUBCASE("additive mode") {
    ScriptedBackend backend;
    backend.script(prompt.assembled(), {"bad", "bad", "(1) normal - fine"});
    const QueryResult result = query_with_retry(backend, scripted_config(), prompt, 1,
                                                make_coverage_validator(1, Task::Anomaly));
    REQUIRE(result.record.attempts.size() == 3);
    CHECK(result.record.attempts[0].temperature == 0.5);
    CHECK(result.record.attempts[1].temperature == 0.9);
    CHECK(result.record.attempts[2].temperature == 1.3);
    CHECK(result.ok());
  }

  SUBCASE("set mode") {
    BackendConfig config = scripted_config();
    config.retry_mode = RetryMode::Set;
    ScriptedBackend backend;
    backend.script(prompt.assembled(), {"bad", "bad", "(1) normal - fine"});
    const QueryResult result = query_with_retry(backend, config, prompt, 1,
                                                make_coverage_validator(1, Task::Anomaly));
    REQUIRE(result.record.attempts.size() == 3);
    CHECK(result.record.attempts[0].temperature == 0.5);
    CHECK(result.record.attempts[1].temperature == 0.4);
    CHECK(result.record.attempts[2].temperature == 0.4);
  }
}

TEST_CASE("temperatures never exceed the cap and never decrease in add mode") {
  const PromptSpec prompt = anomaly_prompt({"log one"});
  BackendConfig config = scripted_config();
  config.max_retries = 10;
  ScriptedBackend backend;
  backend.script(prompt.assembled(), {"never valid"});

  const QueryResult result = query_with_retry(backend, config, prompt, 1,
                                              make_coverage_validator(1, Task::Anomaly));
  REQUIRE(result.record.attempts.size() == 11);
  double previous = 0.0;
  for (const Attempt& attempt : result.record.attempts) {
    CHECK(attempt.temperature >= previous);
    CHECK(attempt.temperature <= config.temperature_cap);
    previous = attempt.temperature;
  }
  CHECK(result.record.attempts.back().temperature == 2.0);
}

TEST_CASE("exhausted retries leave a failure marker") {
  const PromptSpec prompt = anomaly_prompt({"log one"});
  BackendConfig config = scripted_config();
  config.max_retries = 2;
  ScriptedBackend backend;
  backend.script(prompt.assembled(), {"nope"});

  const QueryResult result = query_with_retry(backend, config, prompt, 1,
                                              make_coverage_validator(1, Task::Anomaly));
  CHECK_FALSE(result.ok());
  CHECK(result.record.attempts.size() == 3);
  CHECK_FALSE(result.record.final_response.has_value());
  CHECK(result.answers.empty());
}

TEST_CASE("every attempt transmits identical prompt bytes") {
  const PromptSpec prompt = anomaly_prompt({"log one", "log two"});
  ScriptedBackend scripted;
  scripted.script(prompt.assembled(), {"bad", "bad", "(1) normal - a\n(2) normal - b"});
  RecordingBackend recorder(scripted);

  query_with_retry(recorder, scripted_config(), prompt, 2,
                   make_coverage_validator(2, Task::Anomaly));
  REQUIRE(recorder.transmitted.size() == 3);
  CHECK(recorder.transmitted[0] == prompt.assembled());
  CHECK(recorder.transmitted[1] == recorder.transmitted[0]);
  CHECK(recorder.transmitted[2] == recorder.transmitted[0]);
}

TEST_CASE("a verdict that does not normalize makes the response invalid") {
  const PromptSpec prompt = anomaly_prompt({"log one", "log two"});
  ScriptedBackend backend;
  backend.script(prompt.assembled(),
                 {"(1) normal - a\n(2) maybe - b", "(1) normal - a\n(2) abnormal - b"});
  const QueryResult result = query_with_retry(backend, scripted_config(), prompt, 2,
                                              make_coverage_validator(2, Task::Anomaly));
  REQUIRE(result.record.attempts.size() == 2);
  CHECK_FALSE(result.record.attempts[0].format_valid);
  CHECK(result.ok());
}

TEST_CASE("run records survive a json round trip") {
  const PromptSpec prompt = anomaly_prompt({"log one"});
  ScriptedBackend backend;
  backend.script(prompt.assembled(), {"bad", "(1) normal - quiet"});
  const QueryResult result = query_with_retry(backend, scripted_config(), prompt, 1,
                                              make_coverage_validator(1, Task::Anomaly));
  const RunRecord& record = result.record;
  const RunRecord reread = json(record).get<RunRecord>();
  CHECK(reread.prompt == record.prompt);
  CHECK(reread.attempts == record.attempts);
  CHECK(reread.final_response == record.final_response);
}

TEST_CASE("format failure rate counts first attempts only") {
  const auto record_with = [](bool first_valid) {
    RunRecord record;
    record.attempts.push_back({0.5, "r", first_valid});
    if (!first_valid) record.attempts.push_back({0.9, "r", true});
    record.final_response = "r";
    return record;
  };
  std::vector<RunRecord> records;
  for (int i = 0; i < 99; ++i) records.push_back(record_with(true));
  records.push_back(record_with(false));
  CHECK(format_failure_rate(records) == doctest::Approx(0.01));

  CHECK(format_failure_rate({record_with(true)}) == 0.0);
  CHECK_THROWS_AS(format_failure_rate({}), Error);
}

TEST_CASE("bounded workers do not change the results") {
  std::vector<PromptSpec> prompts;
  std::vector<std::size_t> expected;
  ScriptedBackend backend;
  for (int i = 0; i < 23; ++i) {
    const PromptSpec prompt = anomaly_prompt({"log " + std::to_string(i)});
    backend.script(prompt.assembled(),
                   {"(1) " + std::string(i % 2 == 0 ? "normal" : "abnormal") + " - r" +
                    std::to_string(i)});
    prompts.push_back(prompt);
    expected.push_back(1);
  }
  const auto validator_for = [&](std::size_t i) {
    return make_coverage_validator(expected[i], Task::Anomaly);
  };

  BackendConfig serial = scripted_config();
  serial.workers = 1;
  BackendConfig parallel = scripted_config();
  parallel.workers = 8;

  const auto serial_results = run_queries(backend, serial, prompts, expected, validator_for);
  const auto parallel_results =
      run_queries(backend, parallel, prompts, expected, validator_for);
  REQUIRE(serial_results.size() == parallel_results.size());
  for (std::size_t i = 0; i < serial_results.size(); ++i) {
    CHECK(serial_results[i].answers == parallel_results[i].answers);
    CHECK(serial_results[i].record.final_response ==
          parallel_results[i].record.final_response);
  }
}

TEST_CASE("backend config validation rejects nonsense") {
  BackendConfig config = scripted_config();
  config.initial_temperature = 3.0;
  CHECK_THROWS_AS(config.validate(), Error);
  config = scripted_config();
  config.max_retries = -1;
  CHECK_THROWS_AS(config.validate(), Error);
  config = scripted_config();
  config.workers = 0;
  CHECK_THROWS_AS(config.validate(), Error);
  config = scripted_config();
  config.kind = BackendKind::HttpChat;
  CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("the http backend speaks the chat-completions wire format") {
  httplib::Server server;
  json seen_body;
  std::string seen_auth;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& request, httplib::Response& response) {
                seen_body = json::parse(request.body);
                seen_auth = request.get_header_value("Authorization");
                const json reply = {
                    {"choices",
                     json::array({{{"message",
                                    {{"role", "assistant"},
                                     {"content", "(1) normal - all quiet"}}}}})}};
                response.set_content(reply.dump(), "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("PROMPTLOG_TEST_KEY", "sekrit", 1);
  BackendConfig config;
  config.kind = BackendKind::HttpChat;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.model_name = "test-model";
  config.auth_env = "PROMPTLOG_TEST_KEY";
  HttpChatBackend backend(config);

  const std::string reply = backend.complete("hello logs", 0.7);
  CHECK(reply == "(1) normal - all quiet");
  CHECK(seen_body.at("model") == "test-model");
  CHECK(seen_body.at("temperature").get<double>() == 0.7);
  REQUIRE(seen_body.at("messages").size() == 1);
  CHECK(seen_body.at("messages")[0].at("role") == "user");
  CHECK(seen_body.at("messages")[0].at("content") == "hello logs");
  CHECK(seen_auth == "Bearer sekrit");

  SUBCASE("missing credentials are a fatal auth error") {
    BackendConfig broken = config;
    broken.auth_env = "PROMPTLOG_UNSET_KEY";
    HttpChatBackend no_auth(broken);
    CHECK_THROWS_AS(no_auth.complete("hello", 0.5), AuthError);
  }

  server.stop();
  server_thread.join();
}

TEST_CASE("http transport failures surface as retryable attempts") {
  BackendConfig config;
  config.kind = BackendKind::HttpChat;
  config.endpoint = "http://127.0.0.1:1/v1/chat/completions";  // nothing listens here
  config.timeout_seconds = 0.2;
  config.max_retries = 1;
  HttpChatBackend backend(config);
  CHECK_THROWS_AS(backend.complete("hello", 0.5), TransportError);

  const PromptSpec prompt = anomaly_prompt({"log one"});
  const QueryResult result = query_with_retry(backend, config, prompt, 1,
                                              make_coverage_validator(1, Task::Anomaly));
  CHECK_FALSE(result.ok());
  REQUIRE(result.record.attempts.size() == 2);
  CHECK(result.record.attempts[0].response.rfind("<transport-error>", 0) == 0);
}
