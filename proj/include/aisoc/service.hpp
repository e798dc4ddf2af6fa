#pragma once

#include <memory>
#include <string>

#include "aisoc/artifact.hpp"

namespace httplib {
class Server;
}

namespace aisoc {

/// HTTP front end over a shared immutable Scorer:
///   POST /v1/score, GET /v1/health, GET /v1/model-info.
class ScoringServer {
public:
    explicit ScoringServer(std::shared_ptr<const Scorer> scorer);
    ~ScoringServer();
    ScoringServer(const ScoringServer&) = delete;
    ScoringServer& operator=(const ScoringServer&) = delete;

    // Port 0 binds an ephemeral port. Returns the bound port.
    int bind(const std::string& host, int port);
    // Blocks until stop(); requires a prior bind().
    void run();
    void stop();
    bool running() const;

private:
    std::shared_ptr<const Scorer> scorer_;
    std::unique_ptr<httplib::Server> server_;
};

// Refuses PARTIAL artifacts before any socket is opened.
std::shared_ptr<const Scorer> make_serving_scorer(ModelArtifact artifact);

}  // namespace aisoc
