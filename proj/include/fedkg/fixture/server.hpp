#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fedkg/fixture/store.hpp"

namespace httplib {
class Server;
}

namespace fedkg::fixture {

// Serves a TripleStore over the SPARQL 1.1 Protocol: POST with
// application/sparql-query or form-encoded bodies, GET with a query
// parameter, results as SPARQL JSON. Intended for offline tests; also
// usable as a standalone mock endpoint via the CLI.
class FixtureServer {
public:
    explicit FixtureServer(TripleStore store, std::string host = "127.0.0.1");
    ~FixtureServer();

    FixtureServer(const FixtureServer&) = delete;
    FixtureServer& operator=(const FixtureServer&) = delete;

    // Binds and starts serving on a background thread. port 0 picks a
    // free port. Returns the bound port.
    int start(int port = 0);
    void stop();

    int port() const { return port_; }
    std::string url() const;

    // Fault injection: the next `count` requests answer with `status`
    // before any evaluation happens.
    void fail_next(int count, int status = 503);

    // Every query string received, in arrival order.
    std::vector<std::string> queries() const;
    void clear_queries();

    const TripleStore& store() const { return store_; }

private:
    void handle(const std::string& query, int& status, std::string& body);

    TripleStore store_;
    std::string host_;
    int port_ = 0;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::atomic<int> fail_count_{0};
    std::atomic<int> fail_status_{503};
    mutable std::mutex log_mutex_;
    std::vector<std::string> query_log_;
};

} // namespace fedkg::fixture
