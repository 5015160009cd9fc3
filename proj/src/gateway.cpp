#include "knovo/gateway.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "knovo/digest.hpp"
#include "knovo/text.hpp"

namespace knovo {

using nlohmann::json;

namespace {

struct KindName {
    TaskKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {TaskKind::extract_dimensions, "extract_dimensions"},
    {TaskKind::extract_values, "extract_values"},
    {TaskKind::compare, "compare"},
    {TaskKind::relate, "relate"},
    {TaskKind::embed, "embed"},
    {TaskKind::direction, "direction"},
    {TaskKind::value_type, "value_type"},
};

bool is_string_member(const json& j, const char* key) { return j.contains(key) && j[key].is_string(); }

std::optional<std::string> check_dimensions(const json& out, const json&) {
    if (!out.contains("dimensions") || !out["dimensions"].is_array()) return "missing array 'dimensions'";
    if (out["dimensions"].empty()) return "'dimensions' is empty";
    for (const auto& d : out["dimensions"]) {
        if (!d.is_object() || !is_string_member(d, "key") || !is_string_member(d, "value"))
            return "each dimension needs string 'key' and 'value'";
        if (text::is_blank(d["key"].get<std::string>())) return "blank dimension key";
    }
    return std::nullopt;
}

std::optional<std::string> check_values(const json& out, const json& payload) {
    if (!out.contains("values") || !out["values"].is_object()) return "missing object 'values'";
    const json& values = out["values"];
    std::set<std::string> expected;
    if (payload.contains("dimensions") && payload["dimensions"].is_array()) {
        for (const auto& k : payload["dimensions"])
            if (k.is_string()) expected.insert(k.get<std::string>());
    }
    for (const auto& k : expected) {
        if (!values.contains(k)) return "missing dimension '" + k + "' (use an empty string when not addressed)";
        if (!values[k].is_string()) return "value for '" + k + "' is not a string";
    }
    for (const auto& [k, v] : values.items()) {
        if (!expected.count(k)) return "unexpected dimension '" + k + "'";
    }
    return std::nullopt;
}

std::optional<std::string> check_compare(const json& out, const json&) {
    if (!out.contains("score")) return "missing 'score'";
    const json& s = out["score"];
    if (!s.is_null()) {
        if (!s.is_number_integer()) return "'score' must be -1, 0, 1 or null";
        auto v = s.get<int>();
        if (v < -1 || v > 1) return "'score' must be -1, 0, 1 or null";
    }
    if (!is_string_member(out, "justification")) return "missing string 'justification'";
    if (!s.is_null() && text::is_blank(out["justification"].get<std::string>())) return "empty justification";
    return std::nullopt;
}

std::optional<std::string> check_relate(const json& out, const json&) {
    if (!out.contains("related") || !out["related"].is_boolean()) return "'related' must be a boolean";
    return std::nullopt;
}

std::optional<std::string> check_direction(const json& out, const json&) {
    if (!is_string_member(out, "direction")) return "missing string 'direction'";
    auto d = out["direction"].get<std::string>();
    if (d != "higher_better" && d != "lower_better") return "'direction' must be higher_better or lower_better";
    return std::nullopt;
}

std::optional<std::string> check_value_type(const json& out, const json&) {
    if (!is_string_member(out, "value_type")) return "missing string 'value_type'";
    auto v = out["value_type"].get<std::string>();
    if (v != "numeric" && v != "categorical") return "'value_type' must be numeric or categorical";
    return std::nullopt;
}

std::optional<std::string> check_embedding(const json& out, const json&) {
    if (!out.contains("embedding") || !out["embedding"].is_array() || out["embedding"].empty())
        return "missing non-empty array 'embedding'";
    for (const auto& x : out["embedding"]) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) return "'embedding' must hold finite numbers";
    }
    return std::nullopt;
}

struct SlotGuard {
    std::counting_semaphore<>& sem;
    explicit SlotGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
    ~SlotGuard() { sem.release(); }
};

}  // namespace

std::string_view to_string(TaskKind kind) {
    for (const auto& k : kKindNames)
        if (k.kind == kind) return k.name;
    return "compare";
}

std::optional<TaskKind> task_kind_from_string(std::string_view s) {
    for (const auto& k : kKindNames)
        if (k.name == s) return k.kind;
    return std::nullopt;
}

std::optional<std::string> validate_output(std::string_view schema_id, const json& output, const json& payload) {
    using Check = std::optional<std::string> (*)(const json&, const json&);
    static const std::map<std::string, Check, std::less<>> kSchemas = {
        {"dimensions.v1", check_dimensions}, {"values.v1", check_values},       {"compare.v1", check_compare},
        {"relate.v1", check_relate},         {"direction.v1", check_direction}, {"value_type.v1", check_value_type},
        {"embedding.v1", check_embedding},
    };
    auto it = kSchemas.find(schema_id);
    if (it == kSchemas.end()) throw GatewayConfigError("unknown output schema '" + std::string(schema_id) + "'");
    if (!output.is_object()) return "output is not an object";
    return it->second(output, payload);
}

std::string PromptTemplate::render_user(const json& payload) const {
    std::string out;
    std::size_t pos = 0;
    while (pos < user.size()) {
        auto open = user.find("{{", pos);
        if (open == std::string::npos) break;
        auto close = user.find("}}", open + 2);
        if (close == std::string::npos) break;
        out.append(user, pos, open - pos);
        std::string name = text::trim(std::string_view(user).substr(open + 2, close - open - 2));
        if (payload.contains(name)) {
            const json& v = payload[name];
            out += v.is_string() ? v.get<std::string>() : v.dump();
        }
        pos = close + 2;
    }
    out.append(user, pos, std::string::npos);
    return out;
}

PromptLibrary PromptLibrary::load_directory(const std::filesystem::path& dir) {
    PromptLibrary lib;
    if (!std::filesystem::is_directory(dir)) throw GatewayConfigError("prompt directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        std::string content = buf.str();
        json j;
        try {
            j = json::parse(content);
        } catch (const json::parse_error& e) {
            throw GatewayConfigError("prompt template " + path.string() + ": " + e.what());
        }
        PromptTemplate t;
        t.id = j.value("id", path.stem().string());
        t.system = j.value("system", "");
        t.user = j.value("user", "");
        t.function = j.value("function", json());
        t.digest = sha256_hex(content);
        lib.add(std::move(t));
    }
    return lib;
}

void PromptLibrary::add(PromptTemplate tmpl) {
    std::string id = tmpl.id;
    templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

const PromptTemplate* PromptLibrary::find(std::string_view id) const {
    auto it = templates_.find(id);
    return it == templates_.end() ? nullptr : &it->second;
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options, std::shared_ptr<const PromptLibrary> prompts)
    : default_backend_(std::move(backend)), options_(std::move(options)), prompts_(std::move(prompts)) {
    if (!default_backend_) throw GatewayConfigError("gateway needs a backend");
    if (options_.max_attempts < 1) throw GatewayConfigError("max_attempts must be at least 1");
    if (options_.parallelism == 0) options_.parallelism = 1;
    if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    slots_ = std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(options_.parallelism));
    if (options_.cache_dir) std::filesystem::create_directories(*options_.cache_dir);
}

Gateway::~Gateway() = default;

void Gateway::bind(TaskKind kind, std::shared_ptr<Backend> backend) {
    if (!backend) throw GatewayConfigError("cannot bind a null backend");
    bound_[kind] = std::move(backend);
}

const Backend& Gateway::backend_for(TaskKind kind) const {
    auto it = bound_.find(kind);
    return it == bound_.end() ? *default_backend_ : *it->second;
}

json Gateway::cache_key(const InferenceTask& task) const {
    const PromptTemplate* tmpl = prompts_ ? prompts_->find(task.prompt_id) : nullptr;
    return json{{"backend", backend_for(task.kind).id()},
                {"kind", to_string(task.kind)},
                {"prompt", task.prompt_id},
                {"template", tmpl ? tmpl->digest : ""},
                {"schema", task.schema_id},
                {"payload", task.payload}};
}

GatewayStats Gateway::stats() const {
    std::lock_guard lock(mu_);
    return stats_;
}

std::optional<Gateway::CacheEntry> Gateway::lookup(const std::string& digest, const json& key) {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(digest); it != cache_.end()) {
        if (it->second.key == key) return it->second;
        spdlog::warn("cache entry {} does not match its request; ignoring", digest);
        return std::nullopt;
    }
    if (!options_.cache_dir) return std::nullopt;
    auto path = *options_.cache_dir / digest.substr(0, 2) / (digest + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        json j = json::parse(in);
        if (j.at("key") != key) {
            spdlog::warn("cache file {} does not match its request; ignoring", path.string());
            return std::nullopt;
        }
        CacheEntry entry{j["key"], j.at("response").at("structured_output"), std::nullopt};
        if (j["response"].contains("raw_text") && j["response"]["raw_text"].is_string())
            entry.raw_text = j["response"]["raw_text"].get<std::string>();
        cache_.emplace(digest, entry);
        return entry;
    } catch (const json::exception& e) {
        spdlog::warn("unreadable cache file {}: {}", path.string(), e.what());
        return std::nullopt;
    }
}

void Gateway::store(const std::string& digest, CacheEntry entry) {
    std::lock_guard lock(mu_);
    auto [it, inserted] = cache_.emplace(digest, std::move(entry));
    if (!inserted || !options_.cache_dir) return;
    auto dir = *options_.cache_dir / digest.substr(0, 2);
    std::filesystem::create_directories(dir);
    json j{{"key", it->second.key},
           {"response", {{"structured_output", it->second.output},
                         {"raw_text", it->second.raw_text ? json(*it->second.raw_text) : json()}}}};
    auto final_path = dir / (digest + ".json");
    auto tmp_path = dir / (digest + ".json.tmp");
    {
        std::ofstream out(tmp_path, std::ios::binary);
        out << j.dump(2) << '\n';
    }
    std::error_code ec;
    std::filesystem::rename(tmp_path, final_path, ec);
    if (ec) spdlog::warn("could not write cache file {}: {}", final_path.string(), ec.message());
}

BackendReply Gateway::run_backend(Backend& backend, const InferenceTask& task, const PromptTemplate* tmpl,
                                  std::span<const std::string> feedback) {
    for (int retry = 0;; ++retry) {
        try {
            {
                std::lock_guard lock(mu_);
                ++stats_.backend_calls;
            }
            return backend.run(task, tmpl, feedback);
        } catch (const BackendUnavailable& e) {
            if (retry >= options_.unavailable_retries) throw;
            auto delay = options_.unavailable_backoff * (1 << retry);
            spdlog::warn("backend {} unavailable ({}); retrying in {} ms", backend.id(), e.what(), delay.count());
            options_.sleep(delay);
        }
    }
}

std::optional<BackendResponse> Gateway::invoke(const InferenceTask& task) {
    {
        std::lock_guard lock(mu_);
        ++stats_.requests;
    }
    auto it = bound_.find(task.kind);
    Backend& backend = it == bound_.end() ? *default_backend_ : *it->second;
    const PromptTemplate* tmpl = prompts_ ? prompts_->find(task.prompt_id) : nullptr;
    json key = cache_key(task);
    std::string digest = sha256_hex(key.dump());

    if (auto hit = lookup(digest, key)) {
        std::lock_guard lock(mu_);
        ++stats_.cache_hits;
        return BackendResponse{hit->output, hit->raw_text, backend.id(), true};
    }

    SlotGuard slot(*slots_);
    std::vector<std::string> feedback;
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
        BackendReply reply = run_backend(backend, task, tmpl, feedback);
        auto error = validate_output(task.schema_id, reply.output, task.payload);
        if (!error) {
            store(digest, CacheEntry{key, reply.output, reply.raw_text});
            return BackendResponse{std::move(reply.output), std::move(reply.raw_text), backend.id(), false};
        }
        {
            std::lock_guard lock(mu_);
            ++stats_.rejections;
        }
        spdlog::debug("{} ({}): attempt {} rejected: {}", task.prompt_id, backend.id(), attempt + 1, *error);
        feedback.push_back(std::move(*error));
    }
    {
        std::lock_guard lock(mu_);
        ++stats_.failures;
    }
    spdlog::warn("{} ({}): no valid output after {} attempts: {}", task.prompt_id, backend.id(), options_.max_attempts,
                 feedback.back());
    return std::nullopt;
}

std::vector<double> Gateway::embed(std::string_view text_in) {
    if (text::is_blank(text_in)) throw std::invalid_argument("cannot embed empty text");
    if (options_.embedding_dim == 0) throw GatewayConfigError("embedding dimensionality is not configured");
    InferenceTask task{TaskKind::embed, "embed.v1", json{{"text", std::string(text_in)}}, "embedding.v1"};
    auto response = invoke(task);
    if (!response) throw BackendError("no embedding for '" + std::string(text_in) + "'");
    auto v = response->structured_output["embedding"].get<std::vector<double>>();
    if (v.size() != options_.embedding_dim) {
        throw GatewayConfigError("embedding backend returned " + std::to_string(v.size()) + " dimensions, configured " +
                                 std::to_string(options_.embedding_dim));
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw BackendError("zero embedding for '" + std::string(text_in) + "'");
    for (double& x : v) x /= norm;
    return v;
}

}  // namespace knovo
