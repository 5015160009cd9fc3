#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace knovo {

enum class TaskKind { extract_dimensions, extract_values, compare, relate, embed, direction, value_type };

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(std::string_view s);

struct InferenceTask {
    TaskKind kind = TaskKind::compare;
    std::string prompt_id;
    nlohmann::json payload;
    std::string schema_id;
};

struct BackendResponse {
    nlohmann::json structured_output;
    std::optional<std::string> raw_text;
    std::string backend_id;
    bool cache_hit = false;
};

// What a backend produced for one attempt; validated by the gateway.
struct BackendReply {
    nlohmann::json output;
    std::optional<std::string> raw_text;
};

// The backend could not be reached. Retriable.
class BackendUnavailable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A task could not produce a usable result (e.g. an embedding after all re-asks).
class BackendError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class GatewayConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PromptTemplate {
    std::string id;
    std::string system;
    std::string user;        // "{{field}}" placeholders filled from the task payload
    nlohmann::json function; // function-calling declaration: name, description, parameters
    std::string digest;      // sha256 of the template file

    std::string render_user(const nlohmann::json& payload) const;
};

class PromptLibrary {
  public:
    PromptLibrary() = default;
    static PromptLibrary load_directory(const std::filesystem::path& dir);

    void add(PromptTemplate tmpl);
    const PromptTemplate* find(std::string_view id) const;
    std::size_t size() const { return templates_.size(); }

  private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    // `feedback` holds the validation errors of earlier attempts for the same task.
    // Throws BackendUnavailable when the backend cannot be reached.
    virtual BackendReply run(const InferenceTask& task, const PromptTemplate* tmpl,
                             std::span<const std::string> feedback) = 0;
};

// Returns an error message when `output` does not satisfy `schema_id` for this payload.
std::optional<std::string> validate_output(std::string_view schema_id, const nlohmann::json& output,
                                           const nlohmann::json& payload);

struct GatewayOptions {
    int max_attempts = 3;
    int unavailable_retries = 2;
    std::chrono::milliseconds unavailable_backoff{500};
    std::size_t parallelism = 4;
    std::optional<std::filesystem::path> cache_dir;
    std::size_t embedding_dim = 0;
    std::function<void(std::chrono::milliseconds)> sleep;
};

struct GatewayStats {
    std::size_t requests = 0;
    std::size_t cache_hits = 0;
    std::size_t backend_calls = 0;
    std::size_t rejections = 0;
    std::size_t failures = 0;
};

// Cache-backed, schema-validating access to inference backends. Thread-safe.
class Gateway {
  public:
    explicit Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {},
                     std::shared_ptr<const PromptLibrary> prompts = nullptr);
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    void bind(TaskKind kind, std::shared_ptr<Backend> backend);
    const Backend& backend_for(TaskKind kind) const;

    // nullopt is the null outcome: every attempt produced output that failed validation.
    std::optional<BackendResponse> invoke(const InferenceTask& task);

    // Unit-normalized embedding of non-empty text with the configured dimensionality.
    std::vector<double> embed(std::string_view text);

    nlohmann::json cache_key(const InferenceTask& task) const;
    GatewayStats stats() const;
    const GatewayOptions& options() const { return options_; }

  private:
    struct CacheEntry {
        nlohmann::json key;
        nlohmann::json output;
        std::optional<std::string> raw_text;
    };

    std::optional<CacheEntry> lookup(const std::string& digest, const nlohmann::json& key);
    void store(const std::string& digest, CacheEntry entry);
    BackendReply run_backend(Backend& backend, const InferenceTask& task, const PromptTemplate* tmpl,
                             std::span<const std::string> feedback);

    std::shared_ptr<Backend> default_backend_;
    std::map<TaskKind, std::shared_ptr<Backend>> bound_;
    GatewayOptions options_;
    std::shared_ptr<const PromptLibrary> prompts_;

    mutable std::mutex mu_;
    std::unordered_map<std::string, CacheEntry> cache_;
    GatewayStats stats_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace knovo
