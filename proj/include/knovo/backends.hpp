#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "knovo/gateway.hpp"

namespace knovo {

// Key used by scripted manifests: sha256 of "<prompt_id>\n<canonical payload JSON>".
std::string scripted_digest(std::string_view prompt_id, const nlohmann::json& payload);

// Deterministic replay backend. Manifest layout:
//   { "backend_id": "...", "default": null,
//     "entries": [ { "prompt_id": ..., "payload": {...}, "output": {...} },
//                  { "digest": "<hex>", "outputs": [ {...}, {...} ] } ] }
// "outputs" lists one reply per attempt (the last one repeats). Unknown digests answer `default`.
class ScriptedBackend final : public Backend {
  public:
    explicit ScriptedBackend(const nlohmann::json& manifest);
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    std::string id() const override { return id_; }
    BackendReply run(const InferenceTask& task, const PromptTemplate* tmpl, std::span<const std::string> feedback) override;

    std::size_t entries() const { return replies_.size(); }
    std::size_t embedding_dim() const { return embedding_dim_; }
    std::size_t misses() const { return misses_.load(); }
    std::size_t calls() const { return calls_.load(); }

  private:
    std::string id_;
    nlohmann::json default_;
    std::size_t embedding_dim_ = 0;
    std::unordered_map<std::string, std::vector<nlohmann::json>> replies_;
    std::atomic<std::size_t> misses_{0};
    std::atomic<std::size_t> calls_{0};
};

struct ChatBackendConfig {
    std::string base_url = "http://localhost:11434/v1";
    std::string model;
    std::string embedding_model;
    std::string api_key;
    std::chrono::seconds timeout{120};
};

// OpenAI-style chat-completion endpoint with forced function calling, plus /embeddings.
// Requests are sent with temperature 0.
class ChatCompletionBackend final : public Backend {
  public:
    explicit ChatCompletionBackend(ChatBackendConfig config);

    std::string id() const override;
    BackendReply run(const InferenceTask& task, const PromptTemplate* tmpl, std::span<const std::string> feedback) override;

    nlohmann::json build_request(const InferenceTask& task, const PromptTemplate& tmpl,
                                 std::span<const std::string> feedback) const;
    static BackendReply parse_reply(const nlohmann::json& response);

  private:
    nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

    ChatBackendConfig config_;
    std::string host_;
    std::string prefix_;
};

// Builds a gateway from a JSON config file (see docs/configuration.md). Relative paths resolve
// against the config file's directory. KNOVO_LLM_BASE_URL / KNOVO_LLM_MODEL / KNOVO_LLM_API_KEY
// override the chat backend settings.
std::unique_ptr<Gateway> load_gateway(const std::filesystem::path& config_path,
                                      std::optional<std::filesystem::path> cache_dir_override = std::nullopt);
std::unique_ptr<Gateway> make_gateway(const nlohmann::json& config, const std::filesystem::path& base_dir,
                                      std::optional<std::filesystem::path> cache_dir_override = std::nullopt);

}  // namespace knovo
