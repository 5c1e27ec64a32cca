#pragma once

#include <map>
#include <memory>
#include <string>

#include "toolmimic/jsonio.hpp"
#include "toolmimic/ports.hpp"

namespace toolmimic {

/// Connection settings for an OpenAI-compatible chat-completions endpoint
/// serving the vision-language prompts. Image payloads ride along as base64
/// PGM data URLs; wire defaults (temperature, encoding) are non-normative.
struct RemoteVlmConfig {
  std::string endpoint;      // base URL, e.g. http://127.0.0.1:8080/v1
  std::string api_key;       // bearer token when non-empty
  std::string model;
  std::string template_dir;  // directory with manifest.json and the prompt files
  int retries = 3;           // total attempts per query
  int backoff_ms = 1000;     // fixed wait between attempts
  double temperature = 0.0;
  std::string log_dir;       // when set, request/response bodies dumped for replay

  static constexpr int kSchemaVersion = 1;

  void validate() const;  // endpoint/model nonempty, retries >= 1, backoff >= 0
  Json to_json() const;
  static RemoteVlmConfig from_json(const Json& j);

  /// TOOLMIMIC_VLM_ENDPOINT, TOOLMIMIC_VLM_API_KEY and TOOLMIMIC_VLM_MODEL
  /// override the stored values when set.
  void apply_env_overrides();
};

/// Prompt texts keyed by template id, loaded from a manifest directory.
struct PromptTemplates {
  std::map<std::string, std::string> by_id;

  /// Throws SchemaError for an id the manifest does not list.
  const std::string& require(const std::string& id) const;
};

/// Reads manifest.json in `dir` and the template files it names. Throws
/// IoError / SchemaError.
PromptTemplates load_prompt_templates(const std::string& dir);

struct RemoteVlmPorts {
  std::unique_ptr<FunctionPointSelector> selector;
  std::unique_ptr<RegionProposer> proposer;
  std::unique_ptr<DenseCorrespondence> correspondence;
  std::unique_ptr<AxisRefiner> refiner;
};

/// Builds all four perception ports against the remote endpoint. Each query
/// renders its template plus the task fields, attaches the images, and
/// parses the JSON object out of the reply (``` fences and surrounding prose
/// tolerated). Candidate answers accept "P3", "3", or 3. Parse failures are
/// retried up to config.retries attempts with a fixed backoff, then surface
/// as MalformedResponse; connection failures as TransportError; a well formed
/// but out-of-range index as OutOfRangeSelection without retry.
RemoteVlmPorts remote_vlm_client(const RemoteVlmConfig& config);

// Building blocks exposed for tests.

/// data:image/x-portable-graymap;base64,... of the P5 encoding.
std::string pgm_data_url(const PortImage& img);

/// Candidate index from a response value: integer, digit string, or "P<i>".
/// Throws MalformedResponse.
int parse_candidate_index(const Json& value);

/// First balanced JSON object embedded in a chat reply. Throws
/// MalformedResponse.
Json extract_json_object(const std::string& content);

}  // namespace toolmimic
