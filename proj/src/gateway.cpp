#include "promptlog/gateway.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#ifdef PROMPTLOG_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "promptlog/parser.hpp"

namespace promptlog {
namespace {

// Computed from the attempt index rather than by accumulation so the
// escalation sequence stays exact in floating point.
double temperature_for_attempt(const BackendConfig& config, int attempt) {
  if (attempt == 0) return config.initial_temperature;
  if (config.retry_mode == RetryMode::Add) {
    return std::min(config.initial_temperature + attempt * config.temperature_step,
                    config.temperature_cap);
  }
  return std::min(config.temperature_step, config.temperature_cap);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

RetryMode retry_mode_from_string(const std::string& text) {
  if (text == "add") return RetryMode::Add;
  if (text == "set") return RetryMode::Set;
  throw Error("unknown retry mode: " + text);
}

void BackendConfig::validate() const {
  if (initial_temperature < 0.0 || initial_temperature > temperature_cap) {
    throw Error("backend config: initial temperature must lie in [0, cap]");
  }
  if (temperature_step < 0.0) throw Error("backend config: temperature step must be >= 0");
  if (temperature_cap < 0.0 || temperature_cap > 2.0) {
    throw Error("backend config: temperature cap must lie in [0, 2]");
  }
  if (max_retries < 0) throw Error("backend config: max retries must be >= 0");
  if (workers < 1) throw Error("backend config: worker count must be >= 1");
  if (min_request_interval_seconds < 0.0) {
    throw Error("backend config: request interval must be >= 0");
  }
  if (kind == BackendKind::HttpChat && endpoint.empty()) {
    throw Error("backend config: http backend needs an endpoint URL");
  }
}

std::string prompt_digest(std::string_view prompt_text) {
  // 64-bit FNV-1a; stability matters more than collision strength here.
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : prompt_text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  auto backend = std::make_unique<ScriptedBackend>();
  backend->load_file(path);
  return backend;
}

void ScriptedBackend::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GatewayError("cannot open fixtures file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError("fixtures file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw GatewayError("fixtures file must hold a JSON object");
  for (const auto& [digest, value] : doc.items()) {
    std::vector<std::string> responses;
    if (value.is_string()) {
      responses.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      for (const auto& entry : value) responses.push_back(entry.get<std::string>());
    } else {
      throw GatewayError("fixture entry '" + digest + "' must be a string or array");
    }
    script_digest(digest, std::move(responses));
  }
}

void ScriptedBackend::script(std::string_view prompt_text, std::vector<std::string> responses) {
  script_digest(prompt_digest(prompt_text), std::move(responses));
}

void ScriptedBackend::script_digest(std::string digest, std::vector<std::string> responses) {
  if (responses.empty()) throw GatewayError("scripted response sequence may not be empty");
  std::lock_guard lock(mutex_);
  scripts_[std::move(digest)] = std::deque<std::string>(responses.begin(), responses.end());
}

void ScriptedBackend::script_fallback(std::vector<std::string> responses) {
  script_digest("*", std::move(responses));
}

std::string ScriptedBackend::complete(const std::string& prompt_text, double /*temperature*/) {
  std::lock_guard lock(mutex_);
  auto it = scripts_.find(prompt_digest(prompt_text));
  if (it == scripts_.end()) it = scripts_.find("*");
  if (it == scripts_.end()) {
    throw FixtureMissingError("no scripted response for prompt digest " +
                              prompt_digest(prompt_text) + " (prompt starts: \"" +
                              prompt_text.substr(0, 60) + "\")");
  }
  std::deque<std::string>& queue = it->second;
  if (queue.size() > 1) {
    std::string response = std::move(queue.front());
    queue.pop_front();
    return response;
  }
  return queue.front();  // final response repeats
}

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::string HttpChatBackend::complete(const std::string& prompt_text, double temperature) {
  // Honor the configured minimum inter-request spacing.
  if (config_.min_request_interval_seconds > 0.0) {
    double wait = 0.0;
    {
      std::lock_guard lock(throttle_mutex_);
      const double now = std::chrono::duration<double>(
                             std::chrono::steady_clock::now().time_since_epoch())
                             .count();
      if (now < next_allowed_monotonic_) wait = next_allowed_monotonic_ - now;
      next_allowed_monotonic_ = std::max(now, next_allowed_monotonic_) +
                                config_.min_request_interval_seconds;
    }
    if (wait > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
  }

  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error("endpoint URL must carry a scheme: " + config_.endpoint);
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  const std::string base = config_.endpoint.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
  client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
  client.set_write_timeout(std::chrono::duration<double>(config_.timeout_seconds));

  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    const char* credential = std::getenv(config_.auth_env.c_str());
    if (credential == nullptr || *credential == '\0') {
      throw AuthError("credential environment variable '" + config_.auth_env + "' is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + credential);
  }

  nlohmann::json body = {
      {"model", config_.model_name},
      {"temperature", temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt_text}}})},
  };

  auto result = client.Post(path, headers, body.dump(), "application/json");
  if (!result) {
    throw TransportError("request to " + config_.endpoint +
                         " failed: " + httplib::to_string(result.error()));
  }
  if (result->status == 401 || result->status == 403) {
    throw AuthError("backend rejected credentials (HTTP " + std::to_string(result->status) +
                    ")");
  }
  if (result->status != 200) {
    throw TransportError("backend returned HTTP " + std::to_string(result->status));
  }
  try {
    nlohmann::json doc = nlohmann::json::parse(result->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed chat response: ") + e.what());
  }
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendKind::Scripted) {
    if (config.fixtures_path.empty()) {
      throw GatewayError("scripted backend needs a fixtures file");
    }
    return ScriptedBackend::from_file(config.fixtures_path);
  }
  return std::make_unique<HttpChatBackend>(config);
}

ResponseValidator make_coverage_validator(std::size_t expected_n, Task task) {
  return [expected_n, task](const std::string& raw, std::vector<ParsedAnswer>& answers) {
    auto [parsed, diagnostics] = parse_numbered_answers(raw, expected_n);
    if (!diagnostics.format_valid()) return false;
    if (!validate_coverage(parsed, expected_n, task)) return false;
    answers = std::move(parsed);
    return true;
  };
}

ResponseValidator make_list_validator(std::size_t expected_n) {
  return [expected_n](const std::string& raw, std::vector<ParsedAnswer>& answers) {
    auto [parsed, diagnostics] = parse_numbered_list(raw, expected_n);
    if (!diagnostics.format_valid()) return false;
    for (const ParsedAnswer& answer : parsed) {
      if (answer.answer.empty()) return false;
    }
    answers = std::move(parsed);
    return true;
  };
}

namespace {

QueryResult run_retry_loop(Backend& backend, const BackendConfig& config, PromptSpec prompt,
                           const std::string& prompt_text, const ResponseValidator& validator) {
  if (prompt_text.empty()) throw Error("cannot query with an empty prompt");
  const auto start = std::chrono::steady_clock::now();
  QueryResult result;
  result.record.prompt = std::move(prompt);

  const int attempts_allowed = config.max_retries + 1;
  for (int attempt = 0; attempt < attempts_allowed; ++attempt) {
    const double temperature = temperature_for_attempt(config, attempt);
    std::string raw;
    bool transported = true;
    try {
      raw = backend.complete(prompt_text, temperature);
    } catch (const TransportError& error) {
      raw = std::string("<transport-error> ") + error.what();
      transported = false;
    }
    std::vector<ParsedAnswer> answers;
    const bool valid = transported && validator(raw, answers);
    result.record.attempts.push_back({temperature, std::move(raw), valid});
    if (valid) {
      result.record.final_response = result.record.attempts.back().response;
      result.answers = std::move(answers);
      break;
    }
  }

  result.record.wall_time_seconds = seconds_since(start);
  return result;
}

}  // namespace

QueryResult query_with_retry(Backend& backend, const BackendConfig& config,
                             const PromptSpec& prompt, std::size_t expected_n,
                             const ResponseValidator& validator) {
  (void)expected_n;  // bound inside the validator; kept for call-site clarity
  return run_retry_loop(backend, config, prompt, prompt.assembled(), validator);
}

QueryResult query_raw_with_retry(Backend& backend, const BackendConfig& config,
                                 const std::string& prompt_text,
                                 const ResponseValidator& validator) {
  PromptSpec spec;
  spec.strategy = StrategyTag::Self;
  spec.prefix = prompt_text;
  spec.temperature = config.initial_temperature;
  return run_retry_loop(backend, config, std::move(spec), prompt_text, validator);
}

std::vector<QueryResult> run_queries(Backend& backend, const BackendConfig& config,
                                     const std::vector<PromptSpec>& prompts,
                                     const std::vector<std::size_t>& expected_ns,
                                     const std::function<ResponseValidator(std::size_t)>&
                                         validator_for) {
  if (prompts.size() != expected_ns.size()) {
    throw Error("run_queries: prompts and expected counts differ in length");
  }
  std::vector<QueryResult> results(prompts.size());
  if (prompts.empty()) return results;

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(config.workers, 1)),
                            prompts.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      results[i] = query_with_retry(backend, config, prompts[i], expected_ns[i],
                                    validator_for(i));
    }
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= prompts.size()) break;
      try {
        results[i] = query_with_retry(backend, config, prompts[i], expected_ns[i],
                                      validator_for(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        break;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (std::thread& thread : threads) thread.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

double format_failure_rate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw Error("format_failure_rate: no records");
  std::size_t failures = 0;
  for (const RunRecord& record : records) {
    if (record.attempts.empty() || !record.attempts.front().format_valid) ++failures;
  }
  return static_cast<double>(failures) / static_cast<double>(records.size());
}

}  // namespace promptlog
