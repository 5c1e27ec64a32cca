#include "toolmimic/vlm_client.hpp"

#include <httplib.h>

#include <cctype>
#include <cstdio>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "toolmimic/errors.hpp"
#include "toolmimic/image.hpp"

namespace toolmimic {

void RemoteVlmConfig::validate() const {
  if (endpoint.empty()) throw DegenerateConfiguration("remote vlm endpoint is empty");
  if (model.empty()) throw DegenerateConfiguration("remote vlm model is empty");
  if (retries < 1) throw DegenerateConfiguration("remote vlm retries must be >= 1");
  if (backoff_ms < 0) throw DegenerateConfiguration("remote vlm backoff must be >= 0");
}

Json RemoteVlmConfig::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["endpoint"] = endpoint;
  j["api_key"] = api_key;
  j["model"] = model;
  j["template_dir"] = template_dir;
  j["retries"] = retries;
  j["backoff_ms"] = backoff_ms;
  j["temperature"] = temperature;
  j["log_dir"] = log_dir;
  return j;
}

RemoteVlmConfig RemoteVlmConfig::from_json(const Json& j) {
  if (require_field(j, "schema_version", "remote vlm config").get<int>() != kSchemaVersion)
    throw SchemaError("remote vlm config: unsupported schema_version");
  RemoteVlmConfig c;
  c.endpoint = require_field(j, "endpoint", "remote vlm config").get<std::string>();
  c.api_key = require_field(j, "api_key", "remote vlm config").get<std::string>();
  c.model = require_field(j, "model", "remote vlm config").get<std::string>();
  c.template_dir = require_field(j, "template_dir", "remote vlm config").get<std::string>();
  c.retries = require_field(j, "retries", "remote vlm config").get<int>();
  c.backoff_ms = require_field(j, "backoff_ms", "remote vlm config").get<int>();
  c.temperature = require_field(j, "temperature", "remote vlm config").get<double>();
  c.log_dir = require_field(j, "log_dir", "remote vlm config").get<std::string>();
  return c;
}

void RemoteVlmConfig::apply_env_overrides() {
  if (const char* e = std::getenv("TOOLMIMIC_VLM_ENDPOINT")) endpoint = e;
  if (const char* e = std::getenv("TOOLMIMIC_VLM_API_KEY")) api_key = e;
  if (const char* e = std::getenv("TOOLMIMIC_VLM_MODEL")) model = e;
}

const std::string& PromptTemplates::require(const std::string& id) const {
  auto it = by_id.find(id);
  if (it == by_id.end()) throw SchemaError("prompt template '" + id + "' is not in the manifest");
  return it->second;
}

PromptTemplates load_prompt_templates(const std::string& dir) {
  Json manifest = load_json_file(dir + "/manifest.json");
  if (require_field(manifest, "schema_version", "prompt manifest").get<int>() != 1)
    throw SchemaError("prompt manifest: unsupported schema_version");
  const Json& entries = require_field(manifest, "templates", "prompt manifest");
  if (!entries.is_object()) throw SchemaError("prompt manifest: templates must be an object");
  PromptTemplates t;
  for (auto it = entries.begin(); it != entries.end(); ++it) {
    std::string path = dir + "/" + it.value().get<std::string>();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open prompt template " + path);
    t.by_id[it.key()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return t;
}

namespace {

std::string base64(const std::uint8_t* data, std::size_t len) {
  static const char tab[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    std::uint32_t word = std::uint32_t(data[i]) << 16;
    if (i + 1 < len) word |= std::uint32_t(data[i + 1]) << 8;
    if (i + 2 < len) word |= data[i + 2];
    out.push_back(tab[(word >> 18) & 63]);
    out.push_back(tab[(word >> 12) & 63]);
    out.push_back(i + 1 < len ? tab[(word >> 6) & 63] : '=');
    out.push_back(i + 2 < len ? tab[word & 63] : '=');
  }
  return out;
}

}  // namespace

std::string pgm_data_url(const PortImage& img) {
  std::string pgm = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                    "\n255\n";
  pgm.append(reinterpret_cast<const char*>(img.gray.data()), img.gray.size());
  return "data:image/x-portable-graymap;base64," +
         base64(reinterpret_cast<const std::uint8_t*>(pgm.data()), pgm.size());
}

int parse_candidate_index(const Json& value) {
  if (value.is_number_integer()) return value.get<int>();
  if (value.is_string()) {
    std::string s = value.get<std::string>();
    std::size_t pos = 0;
    if (!s.empty() && (s[0] == 'P' || s[0] == 'p')) pos = 1;
    if (pos == s.size()) throw MalformedResponse("candidate index '" + s + "' has no digits");
    for (std::size_t i = pos; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i])))
        throw MalformedResponse("candidate index '" + s + "' is not P<i> or a number");
    return std::stoi(s.substr(pos));
  }
  throw MalformedResponse("candidate index has an unsupported JSON type");
}

Json extract_json_object(const std::string& content) {
  std::size_t start = content.find('{');
  std::size_t end = content.rfind('}');
  if (start == std::string::npos || end == std::string::npos || end < start)
    throw MalformedResponse("reply contains no JSON object");
  Json parsed = Json::parse(content.substr(start, end - start + 1), nullptr, false);
  if (parsed.is_discarded()) throw MalformedResponse("reply JSON does not parse");
  return parsed;
}

namespace {

// Shared transport: renders the request, walks the retry budget, and returns
// the JSON object embedded in the model's reply.
class ChatCore {
public:
  ChatCore(const RemoteVlmConfig& config, PromptTemplates templates)
      : cfg_(config), templates_(std::move(templates)) {
    cfg_.validate();
    std::size_t scheme = cfg_.endpoint.find("://");
    std::size_t slash =
        scheme == std::string::npos ? cfg_.endpoint.find('/') : cfg_.endpoint.find('/', scheme + 3);
    base_ = slash == std::string::npos ? cfg_.endpoint : cfg_.endpoint.substr(0, slash);
    path_ = (slash == std::string::npos ? "" : cfg_.endpoint.substr(slash)) + "/chat/completions";
  }

  const PromptTemplates& templates() const { return templates_; }

  Json ask(const std::string& prompt, const std::vector<const PortImage*>& images) {
    Json content = Json::array();
    content.push_back({{"type", "text"}, {"text", prompt}});
    for (const PortImage* img : images)
      content.push_back(
          {{"type", "image_url"}, {"image_url", {{"url", pgm_data_url(*img)}}}});
    Json body;
    body["model"] = cfg_.model;
    body["temperature"] = cfg_.temperature;
    body["messages"] = Json::array({Json{{"role", "user"}, {"content", content}}});
    std::string payload = body.dump();

    std::string last_error;
    bool transport_failed = false;
    for (int attempt = 0; attempt < cfg_.retries; ++attempt) {
      if (attempt > 0 && cfg_.backoff_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms));
      httplib::Client cli(base_);
      cli.set_connection_timeout(10, 0);
      cli.set_read_timeout(60, 0);
      httplib::Headers headers;
      if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
      auto res = cli.Post(path_, headers, payload, "application/json");
      if (!res) {
        transport_failed = true;
        last_error = "no response from " + base_;
        continue;
      }
      log_exchange(payload, res->body);
      if (res->status != 200) {
        transport_failed = true;
        last_error = "status " + std::to_string(res->status) + " from " + base_;
        continue;
      }
      transport_failed = false;
      try {
        Json reply = Json::parse(res->body, nullptr, false);
        if (reply.is_discarded()) throw MalformedResponse("response body is not JSON");
        const Json& choices = require_field(reply, "choices", "chat response");
        if (!choices.is_array() || choices.empty())
          throw MalformedResponse("chat response has no choices");
        const Json& message = require_field(choices[0], "message", "chat response");
        const Json& text = require_field(message, "content", "chat response");
        if (!text.is_string()) throw MalformedResponse("chat content is not a string");
        return extract_json_object(text.get<std::string>());
      } catch (const MalformedResponse& e) {
        last_error = e.what();
      } catch (const SchemaError& e) {
        last_error = e.what();
      }
    }
    if (transport_failed)
      throw TransportError("remote vlm unreachable after " + std::to_string(cfg_.retries) +
                           " attempts: " + last_error);
    throw MalformedResponse("remote vlm reply unusable after " + std::to_string(cfg_.retries) +
                            " attempts: " + last_error);
  }

  std::string task_block(const TaskTriple& task) const {
    return "\n\nThe task information:\n" + to_json(task).dump() + "\n";
  }

  static std::string candidate_block(const std::vector<Vec2>& pixels) {
    std::string s = "\nCandidate keypoints (pixel coordinates on the test image):\n";
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      char line[64];
      std::snprintf(line, sizeof(line), "P%zu at (%.0f, %.0f)\n", i, pixels[i].x(), pixels[i].y());
      s += line;
    }
    return s;
  }

  int checked_index(const Json& obj, const std::string& key, std::size_t n_candidates) {
    int idx = parse_candidate_index(require_missing_as_malformed(obj, key));
    if (idx < 0 || std::size_t(idx) >= n_candidates)
      throw OutOfRangeSelection("remote vlm chose " + key + " " + std::to_string(idx) +
                                " of " + std::to_string(n_candidates) + " candidates");
    return idx;
  }

  static const Json& require_missing_as_malformed(const Json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw MalformedResponse("reply object lacks '" + key + "'");
    return *it;
  }

private:
  void log_exchange(const std::string& request, const std::string& response) {
    if (cfg_.log_dir.empty()) return;
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg_.log_dir, ec);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "vlm_%04d", seq_++);
    for (auto [suffix, text] : {std::pair<const char*, const std::string*>{"_request.json", &request},
                                {"_response.json", &response}}) {
      std::ofstream out(cfg_.log_dir + "/" + stem + suffix, std::ios::binary);
      out << *text;
    }
  }

  RemoteVlmConfig cfg_;
  PromptTemplates templates_;
  std::string base_;
  std::string path_;
  int seq_ = 0;
};

// Grid of candidate pixels covering a mask's bounding box (the whole image
// when no mask is given), used where the wire protocol needs a discrete
// multiple-choice answer.
std::vector<Vec2> candidate_grid(int width, int height, const Mask* mask, int per_side) {
  double u0 = 0.0, v0 = 0.0, u1 = width - 1.0, v1 = height - 1.0;
  if (mask != nullptr) {
    MaskBBox bb = mask_bbox(*mask);
    u0 = bb.u_min;
    v0 = bb.v_min;
    u1 = bb.u_max;
    v1 = bb.v_max;
  }
  std::vector<Vec2> out;
  for (int r = 0; r < per_side; ++r)
    for (int c = 0; c < per_side; ++c) {
      double fu = per_side == 1 ? 0.5 : double(c) / (per_side - 1);
      double fv = per_side == 1 ? 0.5 : double(r) / (per_side - 1);
      Vec2 p(u0 + fu * (u1 - u0), v0 + fv * (v1 - v0));
      if (p.x() >= 0 && p.x() < width && p.y() >= 0 && p.y() < height) out.push_back(p);
    }
  return out;
}

PortImage marked_copy(const PortImage& img, const std::vector<Vec2>& pixels) {
  PortImage out = img;
  for (const Vec2& p : pixels) draw_disc(out, p.x(), p.y(), 2, 255);
  return out;
}

const char* transfer_template_id(const std::string& role) {
  if (role == "func") return "function_point_transfer";
  if (role == "grasp") return "grasp_point_transfer";
  throw UnknownTask("no transfer prompt for keypoint role '" + role + "'");
}

const char* transfer_answer_key(const std::string& role) {
  return role == "func" ? "function_keypoint" : "grasp_keypoint";
}

class RemoteSelector : public FunctionPointSelector {
public:
  explicit RemoteSelector(std::shared_ptr<ChatCore> core) : core_(std::move(core)) {}

  int select_function_point(const FunctionPointQuery& query) override {
    std::string prompt = core_->templates().require("function_point_detection") +
                         core_->task_block(query.task) +
                         ChatCore::candidate_block(query.candidate_pixels);
    Json reply = core_->ask(prompt, {&query.annotated_frame});
    return core_->checked_index(reply, "function_keypoint", query.candidate_pixels.size());
  }

private:
  std::shared_ptr<ChatCore> core_;
};

class RemoteProposer : public RegionProposer {
public:
  explicit RemoteProposer(std::shared_ptr<ChatCore> core) : core_(std::move(core)) {}

  PixelRegion propose_region(const RegionQuery& query) override {
    const char* id = transfer_template_id(query.role);
    std::vector<Vec2> candidates = candidate_grid(query.test_frame.width,
                                                  query.test_frame.height,
                                                  query.test_tool_mask, 5);
    if (candidates.empty()) throw RegionOutsideMask("no candidate pixels on the test frame");
    PortImage marked = marked_copy(query.test_frame, candidates);
    std::string prompt = core_->templates().require(id) + core_->task_block(query.task) +
                         ChatCore::candidate_block(candidates);
    Json reply = core_->ask(prompt, {&query.demo_marked_frame, &marked});
    int idx = core_->checked_index(reply, transfer_answer_key(query.role), candidates.size());
    // Side 0: the transfer step widens to its adaptive minimum.
    return PixelRegion{candidates[std::size_t(idx)], 0.0};
  }

private:
  std::shared_ptr<ChatCore> core_;
};

class RemoteCorrespondence : public DenseCorrespondence {
public:
  explicit RemoteCorrespondence(std::shared_ptr<ChatCore> core) : core_(std::move(core)) {}

  std::optional<Vec2> correspond(const CorrespondenceQuery& query) override {
    const char* id = transfer_template_id(query.role);
    std::vector<Vec2> candidates = region_grid(query);
    if (candidates.empty()) return std::nullopt;
    PortImage marked = marked_copy(query.test_frame, candidates);
    std::string prompt = core_->templates().require(id) +
                         ChatCore::candidate_block(candidates);
    Json reply = core_->ask(prompt, {&query.demo_marked_frame, &marked});
    const Json& value =
        ChatCore::require_missing_as_malformed(reply, transfer_answer_key(query.role));
    if (value.is_null()) return std::nullopt;  // declared no-match
    int idx = parse_candidate_index(value);
    if (idx < 0 || std::size_t(idx) >= candidates.size())
      throw OutOfRangeSelection("remote vlm chose candidate " + std::to_string(idx) + " of " +
                                std::to_string(candidates.size()));
    return candidates[std::size_t(idx)];
  }

private:
  std::vector<Vec2> region_grid(const CorrespondenceQuery& query) const {
    std::vector<Vec2> out;
    double half = query.region.side / 2.0;
    const int per_side = 5;
    for (int r = 0; r < per_side; ++r)
      for (int c = 0; c < per_side; ++c) {
        Vec2 p = query.region.center +
                 Vec2((double(c) / (per_side - 1) - 0.5) * 2.0 * half,
                      (double(r) / (per_side - 1) - 0.5) * 2.0 * half);
        if (p.x() >= 0 && p.x() < query.test_frame.width && p.y() >= 0 &&
            p.y() < query.test_frame.height)
          out.push_back(p);
      }
    return out;
  }

  std::shared_ptr<ChatCore> core_;
};

class RemoteRefiner : public AxisRefiner {
public:
  explicit RemoteRefiner(std::shared_ptr<ChatCore> core) : core_(std::move(core)) {}

  int select_axis(const AxisQuery& query) override {
    std::string prompt = core_->templates().require("function_axis_alignment") +
                         core_->task_block(query.task) + "\nThere are " +
                         std::to_string(query.candidates.size()) +
                         " interaction frames, indexed from 0 in the order attached.\n";
    std::vector<const PortImage*> images = {&query.demo_function_frame};
    for (const AxisCandidate& c : query.candidates) images.push_back(&c.render);
    Json reply = core_->ask(prompt, images);
    return core_->checked_index(reply, "selected_idx", query.candidates.size());
  }

private:
  std::shared_ptr<ChatCore> core_;
};

}  // namespace

RemoteVlmPorts remote_vlm_client(const RemoteVlmConfig& config) {
  RemoteVlmConfig cfg = config;
  cfg.apply_env_overrides();
  std::string dir = cfg.template_dir.empty() ? std::string(TOOLMIMIC_DATA_DIR) + "/prompts"
                                             : cfg.template_dir;
  auto core = std::make_shared<ChatCore>(cfg, load_prompt_templates(dir));
  RemoteVlmPorts ports;
  ports.selector = std::make_unique<RemoteSelector>(core);
  ports.proposer = std::make_unique<RemoteProposer>(core);
  ports.correspondence = std::make_unique<RemoteCorrespondence>(core);
  ports.refiner = std::make_unique<RemoteRefiner>(core);
  return ports;
}

}  // namespace toolmimic
