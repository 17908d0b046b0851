#pragma once

#include "mwer/cli.hpp"
#include "mwer/corpus.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

namespace httplib {
class Server;
}

namespace mwer {

/// JSON API over a corpus file plus an optional static dashboard bundle.
///   GET  /api/corpus
///   GET  /api/sample/{id}/multialign
///   GET  /api/sample/{id}/streaming
///   POST /api/sample/{id}/annotation   body {"annotation": "..."}
/// Reads share a lock; an accepted edit is written to the corpus file
/// under an exclusive one before the response is sent.
class DashboardServer {
public:
    DashboardServer(std::filesystem::path corpus, EvalConfig config = {}, StreamingOptions streaming = {},
                    std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~DashboardServer();

    DashboardServer(const DashboardServer&) = delete;
    DashboardServer& operator=(const DashboardServer&) = delete;

    // Returns the bound port (an ephemeral one when port is 0), or -1.
    int bind(const std::string& host, int port);
    void listen(); // blocks until stop()
    void stop();

    // Handlers, callable without a socket. Return (status, JSON body).
    std::pair<int, json> get_corpus() const;
    std::pair<int, json> get_multialign(const std::string& id) const;
    std::pair<int, json> get_streaming(const std::string& id) const;
    std::pair<int, json> post_annotation(const std::string& id, const std::string& body);

private:
    void install_routes();

    EvalConfig config_;
    StreamingOptions streaming_;
    std::optional<std::filesystem::path> static_dir_;
    mutable std::shared_mutex mutex_;
    Corpus corpus_;
    std::unique_ptr<httplib::Server> http_;
};

} // namespace mwer
