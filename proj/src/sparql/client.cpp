#include "fedkg/sparql/client.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "httplib.h"

#include "fedkg/errors.hpp"
#include "fedkg/log.hpp"
#include "fedkg/sparql/parser.hpp"
#include "fedkg/version.hpp"

namespace fedkg::sparql {

ScopeResult scope_to_graph(const std::string& query, const std::string& graph_uri) {
    SelectQuery parsed;
    try {
        parsed = parse_query(query);
    } catch (const Error& e) {
        throw Error(ErrorKind::Rewrite, e.what());
    }
    if (contains_graph_block(parsed.where)) {
        return ScopeResult{query, true};
    }
    GraphBlock block;
    block.graph = PatternTerm::constant(RdfTerm::uri(graph_uri));
    block.body = std::make_shared<GroupPattern>(std::move(parsed.where));
    parsed.where = GroupPattern{};
    parsed.where.elements.emplace_back(std::move(block));
    return ScopeResult{serialize(parsed), false};
}

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /path, "/" when empty
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorKind::Config, "endpoint URL must be absolute: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

// Per-endpoint concurrency gate.
class Gate {
public:
    explicit Gate(int cap) : cap_(cap) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return in_flight_ < cap_; });
        ++in_flight_;
    }
    void release() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            --in_flight_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    int cap_;
};

Gate& gate_for(const std::string& url, int cap) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<Gate>> gates;
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto it = gates.find(url);
    if (it == gates.end()) it = gates.emplace(url, std::make_unique<Gate>(cap)).first;
    return *it->second;
}

struct GateGuard {
    Gate& gate;
    explicit GateGuard(Gate& g) : gate(g) { gate.acquire(); }
    ~GateGuard() { gate.release(); }
};

bool transient_http_status(int status) { return status >= 500 && status < 600; }

std::string excerpt(const std::string& body) {
    if (body.size() <= 200) return body;
    return body.substr(0, 200) + "...";
}

} // namespace

SparqlResultSet SparqlClient::execute_select(const EndpointConfig& endpoint,
                                             const std::string& query) const {
    if (query.empty()) throw Error(ErrorKind::InvalidArgument, "query must be non-empty");

    SplitUrl url = split_url(endpoint.url);
    GateGuard guard(gate_for(endpoint.url, endpoint.max_concurrent));

    httplib::Headers headers = {
        {"Accept", "application/sparql-results+json"},
        {"User-Agent", std::string(kServerName) + "/" + kServerVersion},
    };

    std::string last_error;
    ErrorKind last_kind = ErrorKind::Endpoint;
    for (int attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
        if (attempt > 0) {
            int delay = endpoint.retry_backoff_ms * (1 << (attempt - 1));
            log::debug("retrying SPARQL request to ", endpoint.url, " in ", delay, "ms (attempt ",
                       attempt + 1, ")");
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }

        httplib::Client client(url.base);
        auto timeout_s = static_cast<time_t>(endpoint.request_timeout_s);
        auto timeout_us =
            static_cast<time_t>((endpoint.request_timeout_s - static_cast<double>(timeout_s)) * 1e6);
        client.set_connection_timeout(timeout_s, timeout_us);
        client.set_read_timeout(timeout_s, timeout_us);
        client.set_write_timeout(timeout_s, timeout_us);

        auto result = client.Post(url.path, headers, query, "application/sparql-query");
        if (!result) {
            bool timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                             result.error() == httplib::Error::Read ||
                             result.error() == httplib::Error::Write;
            last_kind = timed_out ? ErrorKind::Timeout : ErrorKind::Endpoint;
            last_error = "request to " + endpoint.url +
                         " failed: " + httplib::to_string(result.error());
            continue;  // connection-level failures are transient
        }
        if (result->status < 200 || result->status >= 300) {
            last_kind = ErrorKind::Endpoint;
            last_error = "HTTP " + std::to_string(result->status) + " from " + endpoint.url +
                         ": " + excerpt(result->body);
            if (transient_http_status(result->status)) continue;
            throw Error(last_kind, last_error);
        }

        nlohmann::json document;
        try {
            document = nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Parse,
                        "malformed SPARQL results from " + endpoint.url + ": " + e.what());
        }
        SparqlResultSet results = result_set_from_json(document);
        if (results.rows.size() >= endpoint.max_results_per_request) {
            results.rows.resize(endpoint.max_results_per_request);
            results.truncated = true;
        }
        return results;
    }
    throw Error(last_kind, last_error + " (after " + std::to_string(endpoint.max_retries) +
                               " retries)");
}

} // namespace fedkg::sparql
