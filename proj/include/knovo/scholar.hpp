#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "knovo/corpus.hpp"

namespace knovo {

// Connection-level failure talking to the scholarly API.
class NetworkUnreachable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Rate-limit responses persisted past the retry budget.
class RateLimited : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
using SteadyClock = std::function<std::chrono::steady_clock::time_point()>;

Sleeper thread_sleeper();

// Token bucket: `rate` tokens per second, holding at most `burst` tokens.
class TokenBucket {
  public:
    TokenBucket(double rate, double burst, Sleeper sleep = thread_sleeper(), SteadyClock now = {});

    void acquire();

  private:
    double rate_;
    double burst_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    Sleeper sleep_;
    SteadyClock now_;
};

struct HttpReply {
    int status = 0;
    std::string body;
};

using QueryParams = std::vector<std::pair<std::string, std::string>>;

class ScholarTransport {
  public:
    virtual ~ScholarTransport() = default;
    // Throws NetworkUnreachable when no HTTP response is received.
    virtual HttpReply get(const std::string& path, const QueryParams& query) = 0;
};

// Semantic Scholar Graph API over HTTP(S). Base URL and key come from
// KNOVO_S2_BASE_URL / KNOVO_S2_API_KEY unless given explicitly.
std::unique_ptr<ScholarTransport> make_http_transport(std::string base_url, std::string api_key,
                                                      std::chrono::seconds timeout = std::chrono::seconds(30));
std::unique_ptr<ScholarTransport> make_http_transport_from_env();

struct RetryPolicy {
    int max_retries = 5;
    std::chrono::milliseconds base_delay{1000};
    double multiplier = 2.0;
    std::chrono::milliseconds max_delay{30000};
};

class ScholarClient {
  public:
    ScholarClient(ScholarTransport& transport, TokenBucket& limiter, RetryPolicy policy = {},
                  Sleeper sleep = thread_sleeper());

    std::optional<PaperRecord> paper(const std::string& paper_id);
    // Cited papers of `paper_id`, all pages.
    std::vector<PaperRecord> references(const std::string& paper_id);
    // Citing papers of `paper_id` in the order the API returns them (relevance), at most `limit`.
    std::vector<PaperRecord> citations(const std::string& paper_id, std::size_t limit);

    static const std::string& fields();

  private:
    nlohmann::json get_json(const std::string& path, QueryParams query);
    std::vector<PaperRecord> page_through(const std::string& path, const char* member, std::optional<std::size_t> limit);

    ScholarTransport& transport_;
    TokenBucket& limiter_;
    RetryPolicy policy_;
    Sleeper sleep_;
};

struct FetchCaps {
    std::size_t citations_per_layer = 50;
};

struct FetchResult {
    CitationNetwork network;
    std::vector<std::string> warnings;
    bool partial = false;
};

// Two-layer network: references of the target and of each reference (uncapped), citations of the
// target and of each citing paper (capped per parent). Rate-limit exhaustion yields a partial network.
FetchResult fetch_network(ScholarClient& client, const std::string& target_id, FetchCaps caps = {});

}  // namespace knovo
