#include "knovo/backends.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "knovo/digest.hpp"
#include "knovo/text.hpp"

namespace knovo {

using nlohmann::json;

std::string scripted_digest(std::string_view prompt_id, const json& payload) {
    std::string material(prompt_id);
    material += '\n';
    material += payload.dump();
    return sha256_hex(material);
}

ScriptedBackend::ScriptedBackend(const json& manifest) {
    if (!manifest.is_object()) throw GatewayConfigError("scripted manifest must be an object");
    id_ = manifest.value("backend_id", "scripted");
    default_ = manifest.value("default", json());
    embedding_dim_ = manifest.value("embedding_dim", std::size_t{0});
    const json entries = manifest.value("entries", json::array());
    if (!entries.is_array()) throw GatewayConfigError("scripted manifest 'entries' must be an array");
    for (const auto& e : entries) {
        std::string digest;
        if (e.contains("digest")) {
            digest = e["digest"].get<std::string>();
        } else if (e.contains("prompt_id") && e.contains("payload")) {
            digest = scripted_digest(e["prompt_id"].get<std::string>(), e["payload"]);
        } else {
            throw GatewayConfigError("scripted entry needs 'digest' or 'prompt_id' + 'payload'");
        }
        std::vector<json> outputs;
        if (e.contains("outputs")) {
            outputs = e["outputs"].get<std::vector<json>>();
        } else if (e.contains("output")) {
            outputs.push_back(e["output"]);
        }
        if (outputs.empty()) throw GatewayConfigError("scripted entry " + digest + " has no output");
        if (!replies_.emplace(digest, std::move(outputs)).second) {
            throw GatewayConfigError("duplicate scripted entry " + digest);
        }
    }
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GatewayConfigError("cannot open scripted manifest " + path.string());
    try {
        return std::make_shared<ScriptedBackend>(json::parse(in));
    } catch (const json::parse_error& e) {
        throw GatewayConfigError("scripted manifest " + path.string() + ": " + e.what());
    }
}

BackendReply ScriptedBackend::run(const InferenceTask& task, const PromptTemplate*, std::span<const std::string> feedback) {
    ++calls_;
    auto digest = scripted_digest(task.prompt_id, task.payload);
    auto it = replies_.find(digest);
    if (it == replies_.end()) {
        ++misses_;
        if (feedback.empty()) {
            spdlog::warn("scripted backend {}: no entry for {} payload {} (digest {})", id_, task.prompt_id,
                         task.payload.dump(), digest);
        }
        return {default_, std::nullopt};
    }
    const auto& outputs = it->second;
    return {outputs[std::min(feedback.size(), outputs.size() - 1)], std::nullopt};
}

namespace {

void split_url(const std::string& url, std::string& host, std::string& prefix) {
    auto scheme = url.find("://");
    auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    host = url.substr(0, path_start);
    prefix = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

std::string strip_fences(std::string s) {
    s = text::trim(s);
    if (s.rfind("```", 0) == 0) {
        auto nl = s.find('\n');
        s = nl == std::string::npos ? "" : s.substr(nl + 1);
        auto end = s.rfind("```");
        if (end != std::string::npos) s = s.substr(0, end);
    }
    return text::trim(s);
}

json parse_or_null(const std::string& s) {
    json j = json::parse(strip_fences(s), nullptr, false);
    return j.is_discarded() ? json() : j;
}

}  // namespace

ChatCompletionBackend::ChatCompletionBackend(ChatBackendConfig config) : config_(std::move(config)) {
    if (config_.model.empty()) throw GatewayConfigError("chat backend needs a model name");
    split_url(config_.base_url, host_, prefix_);
}

std::string ChatCompletionBackend::id() const { return "chat:" + config_.model; }

json ChatCompletionBackend::build_request(const InferenceTask& task, const PromptTemplate& tmpl,
                                          std::span<const std::string> feedback) const {
    json messages = json::array();
    if (!tmpl.system.empty()) messages.push_back({{"role", "system"}, {"content", tmpl.system}});
    messages.push_back({{"role", "user"}, {"content", tmpl.render_user(task.payload)}});
    for (const auto& problem : feedback) {
        messages.push_back({{"role", "user"},
                            {"content", "Your previous function call was rejected: " + problem +
                                            ". Call the function again with arguments that satisfy its schema."}});
    }
    json body{{"model", config_.model}, {"temperature", 0}, {"messages", messages}};
    if (tmpl.function.is_object() && tmpl.function.contains("name")) {
        body["tools"] = json::array({{{"type", "function"}, {"function", tmpl.function}}});
        body["tool_choice"] = {{"type", "function"}, {"function", {{"name", tmpl.function["name"]}}}};
    }
    return body;
}

BackendReply ChatCompletionBackend::parse_reply(const json& response) {
    BackendReply reply;
    if (!response.contains("choices") || !response["choices"].is_array() || response["choices"].empty()) return reply;
    const json& message = response["choices"][0].value("message", json::object());
    if (message.contains("tool_calls") && message["tool_calls"].is_array() && !message["tool_calls"].empty()) {
        const json& fn = message["tool_calls"][0].value("function", json::object());
        const json args = fn.value("arguments", json());
        if (args.is_string()) {
            reply.raw_text = args.get<std::string>();
            reply.output = parse_or_null(*reply.raw_text);
        } else {
            reply.raw_text = args.dump();
            reply.output = args;
        }
        return reply;
    }
    if (message.contains("content") && message["content"].is_string()) {
        reply.raw_text = message["content"].get<std::string>();
        reply.output = parse_or_null(*reply.raw_text);
    }
    return reply;
}

json ChatCompletionBackend::post(const std::string& path, const json& body) const {
    httplib::Client client(host_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(prefix_ + path, headers, body.dump(), "application/json");
    if (!res) throw BackendUnavailable(host_ + prefix_ + path + ": " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw BackendUnavailable(host_ + prefix_ + path + ": HTTP " + std::to_string(res->status));
    }
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw BackendUnavailable(host_ + prefix_ + path + ": response is not JSON");
    return j;
}

BackendReply ChatCompletionBackend::run(const InferenceTask& task, const PromptTemplate* tmpl,
                                        std::span<const std::string> feedback) {
    if (task.kind == TaskKind::embed) {
        const std::string& model = config_.embedding_model.empty() ? config_.model : config_.embedding_model;
        json res = post("/embeddings", {{"model", model}, {"input", task.payload.value("text", "")}});
        BackendReply reply;
        if (res.contains("data") && res["data"].is_array() && !res["data"].empty() && res["data"][0].contains("embedding"))
            reply.output = {{"embedding", res["data"][0]["embedding"]}};
        return reply;
    }
    if (!tmpl) throw GatewayConfigError("no prompt template loaded for '" + task.prompt_id + "'");
    return parse_reply(post("/chat/completions", build_request(task, *tmpl, feedback)));
}

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

std::unique_ptr<Gateway> make_gateway(const json& config, const std::filesystem::path& base_dir,
                                      std::optional<std::filesystem::path> cache_dir_override) {
    GatewayOptions options;
    options.max_attempts = config.value("max_attempts", 3);
    options.parallelism = config.value("parallelism", std::size_t{4});
    options.embedding_dim = config.value("embedding_dim", std::size_t{0});
    if (cache_dir_override) {
        options.cache_dir = *cache_dir_override;
    } else if (config.contains("cache_dir") && config["cache_dir"].is_string()) {
        options.cache_dir = resolve(base_dir, config["cache_dir"].get<std::string>());
    }

    const std::string kind = config.value("backend", "chat");
    if (kind == "scripted") {
        if (!config.contains("manifest")) throw GatewayConfigError("scripted backend needs 'manifest'");
        auto backend = ScriptedBackend::from_file(resolve(base_dir, config["manifest"].get<std::string>()));
        if (options.embedding_dim == 0) options.embedding_dim = backend->embedding_dim();
        return std::make_unique<Gateway>(std::move(backend), std::move(options));
    }
    if (kind != "chat") throw GatewayConfigError("unknown backend kind '" + kind + "'");

    ChatBackendConfig chat;
    chat.base_url = env_or("KNOVO_LLM_BASE_URL", config.value("base_url", chat.base_url));
    chat.model = env_or("KNOVO_LLM_MODEL", config.value("model", std::string()));
    chat.embedding_model = config.value("embedding_model", std::string());
    chat.api_key = env_or("KNOVO_LLM_API_KEY", "");
    chat.timeout = std::chrono::seconds(config.value("timeout_seconds", 120));

    std::shared_ptr<const PromptLibrary> prompts;
    if (config.contains("prompts")) {
        prompts = std::make_shared<PromptLibrary>(
            PromptLibrary::load_directory(resolve(base_dir, config["prompts"].get<std::string>())));
    }
    auto gateway = std::make_unique<Gateway>(std::make_shared<ChatCompletionBackend>(chat), std::move(options), prompts);
    if (config.contains("task_models")) {
        for (const auto& [name, model] : config["task_models"].items()) {
            auto task_kind = task_kind_from_string(name);
            if (!task_kind) throw GatewayConfigError("unknown task kind '" + name + "' in task_models");
            ChatBackendConfig per_task = chat;
            per_task.model = model.get<std::string>();
            if (*task_kind == TaskKind::embed) per_task.embedding_model = per_task.model;
            gateway->bind(*task_kind, std::make_shared<ChatCompletionBackend>(per_task));
        }
    }
    return gateway;
}

std::unique_ptr<Gateway> load_gateway(const std::filesystem::path& config_path,
                                      std::optional<std::filesystem::path> cache_dir_override) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw GatewayConfigError("cannot open backend config " + config_path.string());
    json config = json::parse(in, nullptr, false);
    if (config.is_discarded()) throw GatewayConfigError("backend config " + config_path.string() + " is not valid JSON");
    return make_gateway(config, config_path.parent_path(), std::move(cache_dir_override));
}

}  // namespace knovo
