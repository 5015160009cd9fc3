#include <doctest.h>

#include <httplib.h>

#include <mutex>
#include <thread>

#include "knovo/backends.hpp"

using namespace knovo;
using nlohmann::json;

namespace {

PromptLibrary prompts() { return PromptLibrary::load_directory(KNOVO_PROMPTS); }

InferenceTask compare_task() {
    return {TaskKind::compare, "compare.v1",
            json{{"dimension", "architecture type"}, {"target_value", "Transformer"}, {"other_value", "RNN"},
                 {"value_type", "categorical"}},
            "compare.v1"};
}

struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

}  // namespace

TEST_CASE("requests force the template function at temperature zero") {
    auto lib = prompts();
    ChatCompletionBackend backend({.model = "m"});
    std::vector<std::string> feedback{"missing key 'score'"};
    json body = backend.build_request(compare_task(), *lib.find("compare.v1"), feedback);
    CHECK(body["model"] == "m");
    CHECK(body["temperature"] == 0);
    REQUIRE(body["messages"].size() == 3);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"].get<std::string>().find("Transformer") != std::string::npos);
    CHECK(body["messages"][2]["content"].get<std::string>().find("missing key 'score'") != std::string::npos);
    CHECK(body["tools"][0]["function"]["name"] == body["tool_choice"]["function"]["name"]);
}

TEST_CASE("replies are read from tool calls, then from fenced content") {
    json tool = {{"choices", {{{"message", {{"tool_calls", {{{"function", {{"arguments", R"({"score":1,"justification":"x"})"}}}}}}}}}}}};
    auto r = ChatCompletionBackend::parse_reply(tool);
    CHECK(r.output["score"] == 1);

    json object_args = {{"choices", {{{"message", {{"tool_calls", {{{"function", {{"arguments", {{"related", true}}}}}}}}}}}}}};
    CHECK(ChatCompletionBackend::parse_reply(object_args).output["related"] == true);

    json fenced = {{"choices", {{{"message", {{"content", "```json\n{\"related\": false}\n```"}}}}}}};
    CHECK(ChatCompletionBackend::parse_reply(fenced).output["related"] == false);

    json prose = {{"choices", {{{"message", {{"content", "I think they are related."}}}}}}};
    auto p = ChatCompletionBackend::parse_reply(prose);
    CHECK(p.output.is_null());
    CHECK(p.raw_text == "I think they are related.");

    CHECK(ChatCompletionBackend::parse_reply(json::object()).output.is_null());
}

TEST_CASE("a model name is required") { CHECK_THROWS_AS(ChatCompletionBackend({}), GatewayConfigError); }

TEST_CASE("round trip against a local chat-completion server") {
    LocalServer local;
    std::mutex mu;
    std::vector<json> bodies;
    std::string auth;
    local.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mu);
        bodies.push_back(json::parse(req.body));
        auth = req.get_header_value("Authorization");
        // First answer is invalid so the gateway has to re-ask.
        json args = bodies.size() == 1 ? json{{"score", 7}, {"justification", "x"}} : json{{"score", -1}, {"justification", "older"}};
        json reply = {{"choices", {{{"message", {{"tool_calls", {{{"function", {{"name", "f"}, {"arguments", args.dump()}}}}}}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    local.server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body);
        CHECK(body["model"] == "embedder");
        res.set_content(json{{"data", {{{"embedding", {0.0, 2.0}}}}}}.dump(), "application/json");
    });
    local.start();

    auto backend = std::make_shared<ChatCompletionBackend>(
        ChatBackendConfig{.base_url = local.url(), .model = "m", .embedding_model = "embedder", .api_key = "secret"});
    GatewayOptions o;
    o.embedding_dim = 2;
    o.sleep = [](std::chrono::milliseconds) {};
    Gateway gw(backend, o, std::make_shared<PromptLibrary>(prompts()));
    auto r = gw.invoke(compare_task());
    REQUIRE(r);
    CHECK(r->structured_output["score"] == -1);
    CHECK(r->backend_id == "chat:m");
    CHECK(bodies.size() == 2);
    CHECK(bodies[1]["messages"].size() == bodies[0]["messages"].size() + 1);
    CHECK(auth == "Bearer secret");
    CHECK(gw.embed("attention") == std::vector<double>{0.0, 1.0});
}

TEST_CASE("server errors surface as an unavailable backend") {
    LocalServer local;
    local.server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    local.start();
    auto backend = std::make_shared<ChatCompletionBackend>(ChatBackendConfig{.base_url = local.url(), .model = "m"});
    GatewayOptions o;
    o.sleep = [](std::chrono::milliseconds) {};
    Gateway gw(backend, o, std::make_shared<PromptLibrary>(prompts()));
    CHECK_THROWS_AS(gw.invoke(compare_task()), BackendUnavailable);
}
