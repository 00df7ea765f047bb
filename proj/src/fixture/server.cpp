#include "fedkg/fixture/server.hpp"

#include <chrono>

#include "httplib.h"

#include "fedkg/errors.hpp"
#include "fedkg/fixture/eval.hpp"
#include "fedkg/log.hpp"

namespace fedkg::fixture {

FixtureServer::FixtureServer(TripleStore store, std::string host)
    : store_(std::move(store)), host_(std::move(host)), server_(std::make_unique<httplib::Server>()) {}

FixtureServer::~FixtureServer() { stop(); }

int FixtureServer::start(int port) {
    auto sparql_handler = [this](const httplib::Request& req, httplib::Response& res) {
        std::string query;
        if (req.method == "GET") {
            query = req.get_param_value("query");
        } else if (req.get_header_value("Content-Type").rfind("application/sparql-query", 0) == 0) {
            query = req.body;
        } else {
            query = req.get_param_value("query");  // form-encoded body
        }

        int status = 200;
        std::string body;
        handle(query, status, body);
        res.status = status;
        res.set_content(body, status == 200 ? "application/sparql-results+json" : "text/plain");
    };
    server_->Post("/sparql", sparql_handler);
    server_->Get("/sparql", sparql_handler);

    if (port == 0) {
        port_ = server_->bind_to_any_port(host_);
        if (port_ <= 0) throw Error(ErrorKind::Config, "failed to bind fixture server");
    } else {
        if (!server_->bind_to_port(host_, port))
            throw Error(ErrorKind::Config, "failed to bind fixture server on port " +
                                               std::to_string(port));
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    log::debug("fixture endpoint listening on ", url());
    return port_;
}

void FixtureServer::stop() {
    if (server_ && server_->is_running()) server_->stop();
    if (thread_.joinable()) thread_.join();
}

std::string FixtureServer::url() const {
    return "http://" + host_ + ":" + std::to_string(port_) + "/sparql";
}

void FixtureServer::fail_next(int count, int status) {
    fail_status_ = status;
    fail_count_ = count;
}

std::vector<std::string> FixtureServer::queries() const {
    std::lock_guard<std::mutex> lock(log_mutex_);
    return query_log_;
}

void FixtureServer::clear_queries() {
    std::lock_guard<std::mutex> lock(log_mutex_);
    query_log_.clear();
}

void FixtureServer::handle(const std::string& query, int& status, std::string& body) {
    {
        std::lock_guard<std::mutex> lock(log_mutex_);
        query_log_.push_back(query);
    }
    int remaining = fail_count_.load();
    while (remaining > 0) {
        if (fail_count_.compare_exchange_weak(remaining, remaining - 1)) {
            status = fail_status_.load();
            body = "injected failure";
            return;
        }
    }
    if (query.empty()) {
        status = 400;
        body = "missing query";
        return;
    }
    try {
        SparqlResultSet results = evaluate(store_, query);
        body = result_set_to_json(results).dump();
        status = 200;
    } catch (const Error& e) {
        status = 400;
        body = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
        status = 500;
        body = e.what();
    }
}

} // namespace fedkg::fixture
