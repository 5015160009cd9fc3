#include "knovo/scholar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace knovo {

using nlohmann::json;

Sleeper thread_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

TokenBucket::TokenBucket(double rate, double burst, Sleeper sleep, SteadyClock now)
    : rate_(rate),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      sleep_(std::move(sleep)),
      now_(now ? std::move(now) : SteadyClock([] { return std::chrono::steady_clock::now(); })) {
    last_ = now_();
}

void TokenBucket::acquire() {
    if (rate_ <= 0) return;
    auto now = now_();
    double elapsed = std::chrono::duration<double>(now - last_).count();
    if (elapsed > 0) {
        tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
        last_ = now;
    }
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
    }
    double wait_s = (1.0 - tokens_) / rate_;
    auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::duration<double>(wait_s));
    sleep_(wait);
    tokens_ = 0.0;
    last_ = std::max(now_(), last_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                         std::chrono::duration<double>(wait_s)));
}

namespace {

class HttpScholarTransport final : public ScholarTransport {
  public:
    HttpScholarTransport(std::string base_url, std::string api_key, std::chrono::seconds timeout)
        : api_key_(std::move(api_key)) {
        auto scheme = base_url.find("://");
        auto path_start = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        host_ = base_url.substr(0, path_start);
        prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
        client_ = std::make_unique<httplib::Client>(host_);
        client_->set_connection_timeout(timeout);
        client_->set_read_timeout(timeout);
    }

    HttpReply get(const std::string& path, const QueryParams& query) override {
        httplib::Params params(query.begin(), query.end());
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("x-api-key", api_key_);
        auto res = client_->Get(prefix_ + path, params, headers);
        if (!res) throw NetworkUnreachable("GET " + host_ + prefix_ + path + ": " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

  private:
    std::string host_;
    std::string prefix_;
    std::string api_key_;
    std::unique_ptr<httplib::Client> client_;
};

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::move(fallback);
}

bool retriable(int status) { return status == 429 || status >= 500; }

}  // namespace

std::unique_ptr<ScholarTransport> make_http_transport(std::string base_url, std::string api_key,
                                                      std::chrono::seconds timeout) {
    return std::make_unique<HttpScholarTransport>(std::move(base_url), std::move(api_key), timeout);
}

std::unique_ptr<ScholarTransport> make_http_transport_from_env() {
    return make_http_transport(env_or("KNOVO_S2_BASE_URL", "https://api.semanticscholar.org/graph/v1"),
                               env_or("KNOVO_S2_API_KEY", ""));
}

ScholarClient::ScholarClient(ScholarTransport& transport, TokenBucket& limiter, RetryPolicy policy, Sleeper sleep)
    : transport_(transport), limiter_(limiter), policy_(policy), sleep_(std::move(sleep)) {}

const std::string& ScholarClient::fields() {
    static const std::string kFields =
        "paperId,title,abstract,authors,publicationVenue,year,referenceCount,citationCount,"
        "influentialCitationCount,isOpenAccess,openAccessPdf,fieldsOfStudy,publicationDate,journal";
    return kFields;
}

json ScholarClient::get_json(const std::string& path, QueryParams query) {
    for (int attempt = 0;; ++attempt) {
        limiter_.acquire();
        HttpReply reply = transport_.get(path, query);
        if (reply.status == 200) {
            try {
                return json::parse(reply.body);
            } catch (const json::parse_error& e) {
                throw CorpusError("GET " + path + ": malformed response: " + e.what());
            }
        }
        if (reply.status == 404) return nullptr;
        if (!retriable(reply.status)) {
            throw CorpusError("GET " + path + ": HTTP " + std::to_string(reply.status));
        }
        if (attempt >= policy_.max_retries) {
            if (reply.status == 429) throw RateLimited("GET " + path + ": rate limited after retries");
            throw NetworkUnreachable("GET " + path + ": HTTP " + std::to_string(reply.status) + " after retries");
        }
        auto delay = std::chrono::milliseconds(static_cast<std::int64_t>(
            static_cast<double>(policy_.base_delay.count()) * std::pow(policy_.multiplier, attempt)));
        delay = std::min(delay, policy_.max_delay);
        spdlog::debug("GET {}: HTTP {}, retrying in {} ms", path, reply.status, delay.count());
        sleep_(delay);
    }
}

std::optional<PaperRecord> ScholarClient::paper(const std::string& paper_id) {
    json j = get_json("/paper/" + paper_id, {{"fields", fields()}});
    if (j.is_null()) return std::nullopt;
    return record_from_json(j, Relation::target, 0);
}

std::vector<PaperRecord> ScholarClient::page_through(const std::string& path, const char* member,
                                                     std::optional<std::size_t> limit) {
    constexpr std::size_t kPage = 100;
    std::vector<PaperRecord> out;
    std::size_t offset = 0;
    while (!limit || out.size() < *limit) {
        std::size_t n = limit ? std::min(kPage, *limit - out.size()) : kPage;
        json j = get_json(path, {{"fields", fields()}, {"offset", std::to_string(offset)}, {"limit", std::to_string(n)}});
        if (j.is_null() || !j.contains("data") || !j["data"].is_array() || j["data"].empty()) break;
        for (const auto& item : j["data"]) {
            if (limit && out.size() >= *limit) break;
            auto it = item.find(member);
            if (it == item.end() || !it->is_object()) continue;
            auto id = it->find("paperId");
            if (id == it->end() || !id->is_string()) continue;
            out.push_back(record_from_json(*it, Relation::reference, 1));
        }
        offset += j["data"].size();
        if (!j.contains("next") || j["next"].is_null()) break;
    }
    return out;
}

std::vector<PaperRecord> ScholarClient::references(const std::string& paper_id) {
    return page_through("/paper/" + paper_id + "/references", "citedPaper", std::nullopt);
}

std::vector<PaperRecord> ScholarClient::citations(const std::string& paper_id, std::size_t limit) {
    return page_through("/paper/" + paper_id + "/citations", "citingPaper", limit);
}

FetchResult fetch_network(ScholarClient& client, const std::string& target_id, FetchCaps caps) {
    auto target = client.paper(target_id);
    if (!target) throw CorpusError("target paper " + target_id + " not found");

    FetchResult result;
    std::vector<PaperRecord> records;
    records.push_back(*target);
    auto add = [&](std::vector<PaperRecord> batch, Relation relation, int layer) {
        for (auto& r : batch) {
            r.relation = relation;
            r.layer = layer;
            records.push_back(std::move(r));
        }
    };

    try {
        auto refs = client.references(target_id);
        auto cites = client.citations(target_id, caps.citations_per_layer);
        std::vector<std::string> ref_ids, cite_ids;
        for (const auto& r : refs) ref_ids.push_back(r.paper_id);
        for (const auto& r : cites) cite_ids.push_back(r.paper_id);
        add(std::move(refs), Relation::reference, 1);
        add(std::move(cites), Relation::citation, 1);
        for (const auto& id : ref_ids) add(client.references(id), Relation::reference, 2);
        for (const auto& id : cite_ids) add(client.citations(id, caps.citations_per_layer), Relation::citation, 2);
    } catch (const RateLimited& e) {
        result.partial = true;
        result.warnings.push_back(std::string("partial network: ") + e.what());
        spdlog::warn("partial network for {}: {}", target_id, e.what());
    }

    auto loaded = assemble_network(std::move(records),
                                   "semantic-scholar:target=" + target_id + ";cap=" + std::to_string(caps.citations_per_layer));
    result.network = std::move(loaded.network);
    result.warnings.insert(result.warnings.end(), loaded.report.warnings.begin(), loaded.report.warnings.end());
    for (const auto& rej : loaded.report.rejected) result.warnings.push_back("rejected " + rej.paper_id + ": " + rej.reason);
    return result;
}

}  // namespace knovo
