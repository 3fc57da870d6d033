// Backend-agnostic completion gateway with format-validation retries. An
// invalid response is resubmitted at an escalated temperature (additive step
// by default, capped) until it validates or attempts run out. A scripted
// backend replays fixture responses keyed by a digest of the prompt text so
// the whole pipeline can run deterministically offline.

#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "promptlog/core.hpp"

namespace promptlog {

class GatewayError : public Error {
 public:
  using Error::Error;
};

/// Transient transport problem (connection, timeout, throttling). Consumes a
/// retry attempt.
class TransportError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// Credential rejected; retrying cannot help.
class AuthError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// A scripted run asked for a prompt with no fixture entry, i.e. the test
/// fixture has a gap.
class FixtureMissingError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

enum class BackendKind { HttpChat, Scripted };
enum class RetryMode { Add, Set };

RetryMode retry_mode_from_string(const std::string& text);

struct BackendConfig {
  BackendKind kind = BackendKind::Scripted;
  std::string endpoint;    ///< http_chat: full URL of the chat-completions route
  std::string model_name;
  std::string auth_env;    ///< name of the environment variable holding the credential
  double timeout_seconds = 60.0;
  int max_retries = 2;
  double initial_temperature = 0.5;
  double temperature_step = 0.4;  ///< added per retry (Add) or used verbatim (Set)
  double temperature_cap = 2.0;
  RetryMode retry_mode = RetryMode::Add;
  double min_request_interval_seconds = 0.0;
  int workers = 1;
  std::filesystem::path fixtures_path;  ///< scripted: JSON response map

  void validate() const;  ///< throws Error on out-of-range fields
};

struct Attempt {
  double temperature = 0.0;
  std::string response;
  bool format_valid = false;

  bool operator==(const Attempt&) const = default;
};

/// Persisted unit of one gateway query: the prompt, every attempt with its
/// temperature, and the final accepted response (unset after exhaustion).
struct RunRecord {
  PromptSpec prompt;
  std::vector<Attempt> attempts;
  std::optional<std::string> final_response;
  double wall_time_seconds = 0.0;

  bool succeeded() const { return final_response.has_value(); }
};

class Backend {
 public:
  virtual ~Backend() = default;

  /// Issues one completion request and returns the raw assistant text.
  virtual std::string complete(const std::string& prompt_text, double temperature) = 0;
};

/// Stable hex digest of a prompt text (64-bit FNV-1a). Keys scripted
/// fixtures.
std::string prompt_digest(std::string_view prompt_text);

/// Deterministic fixture-replay backend. Each digest maps to a response
/// sequence consumed in order, the last entry repeating once the sequence is
/// exhausted; the wildcard key "*" catches any prompt without an exact
/// entry. File form: a JSON object mapping digest (or "*") to a string or
/// array of strings.
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend() = default;

  static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  /// Merges the entries of a fixtures file into this backend.
  void load_file(const std::filesystem::path& path);

  /// Registers a response sequence for the exact prompt text.
  void script(std::string_view prompt_text, std::vector<std::string> responses);
  void script_digest(std::string digest, std::vector<std::string> responses);
  void script_fallback(std::vector<std::string> responses);

  std::string complete(const std::string& prompt_text, double temperature) override;

 private:
  std::unordered_map<std::string, std::deque<std::string>> scripts_;
  std::mutex mutex_;
};

/// Chat-completions client: one user message per request, body fields
/// {model, temperature, messages}. Credentials come from the environment
/// variable named in the config and are sent as a bearer token.
class HttpChatBackend : public Backend {
 public:
  explicit HttpChatBackend(BackendConfig config);

  std::string complete(const std::string& prompt_text, double temperature) override;

 private:
  BackendConfig config_;
  std::mutex throttle_mutex_;
  double next_allowed_monotonic_ = 0.0;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// Validates one raw response; on success fills `answers` with the parsed
/// result handed back to the caller.
using ResponseValidator =
    std::function<bool(const std::string& raw, std::vector<ParsedAnswer>& answers)>;

/// Coverage validator for a batch of expected_n inputs (see
/// validate_coverage).
ResponseValidator make_coverage_validator(std::size_t expected_n, Task task);

/// Numbered-list validator (full-line answers, no x-y split).
ResponseValidator make_list_validator(std::size_t expected_n);

struct QueryResult {
  std::vector<ParsedAnswer> answers;  ///< from the first valid attempt; empty on failure
  RunRecord record;

  bool ok() const { return record.succeeded(); }
};

/// Runs the retry protocol for one prompt: attempt 1 at the configured
/// initial temperature, then on each validation failure an escalated
/// temperature (Add: previous + step, capped; Set: the step value itself)
/// until a response validates or max_retries extra attempts are spent. The
/// prompt bytes never change across attempts. Transport errors consume an
/// attempt and are recorded as invalid; auth and fixture errors propagate.
QueryResult query_with_retry(Backend& backend, const BackendConfig& config,
                             const PromptSpec& prompt, std::size_t expected_n,
                             const ResponseValidator& validator);

/// Same retry protocol for a verbatim text that bypasses the prompt
/// assembly (meta-prompts). The record's prompt holds the text as its
/// prefix.
QueryResult query_raw_with_retry(Backend& backend, const BackendConfig& config,
                                 const std::string& prompt_text,
                                 const ResponseValidator& validator);

/// Runs one query per prompt using config.workers concurrent workers.
/// Results come back ordered by prompt index, so concurrency never changes
/// outputs. expected_ns[i] is the input count of prompts[i].
std::vector<QueryResult> run_queries(Backend& backend, const BackendConfig& config,
                                     const std::vector<PromptSpec>& prompts,
                                     const std::vector<std::size_t>& expected_ns,
                                     const std::function<ResponseValidator(std::size_t)>&
                                         validator_for);

/// Fraction of records whose first attempt already failed validation.
/// Throws Error on empty input.
double format_failure_rate(const std::vector<RunRecord>& records);

}  // namespace promptlog
