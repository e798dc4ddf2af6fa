#include <httplib.h>

#include "aisoc/service.hpp"

namespace aisoc {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

}  // namespace

std::shared_ptr<const Scorer> make_serving_scorer(ModelArtifact artifact) {
    if (artifact.status() != ArtifactStatus::Serving)
        throw ArtifactError("refusing to serve PARTIAL artifact: missing component '" +
                            artifact.missing_components().front() + "'");
    return std::make_shared<const Scorer>(std::move(artifact));
}

ScoringServer::ScoringServer(std::shared_ptr<const Scorer> scorer)
    : scorer_(std::move(scorer)), server_(std::make_unique<httplib::Server>()) {
    if (!scorer_) throw ArtifactError("server needs a scorer");
    server_->set_tcp_nodelay(true);  // small JSON replies; avoid delayed-ACK stalls
    const auto scorer_ref = scorer_;
    server_->Post("/v1/score", [scorer_ref](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception& e) {
            reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
            return;
        }
        try {
            reply(res, 200, score_response_to_json(scorer_ref->score(parse_score_request(body))));
        } catch (const RequestError& e) {
            reply(res, 400, {{"error", e.what()}});
        } catch (const Error& e) {
            reply(res, 500, {{"error", e.what()}});
        }
    });
    server_->Get("/v1/health", [scorer_ref](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, {{"status", "ok"}, {"artifact_version", scorer_ref->version()}});
    });
    server_->Get("/v1/model-info", [scorer_ref](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, model_info(*scorer_ref));
    });
}

ScoringServer::~ScoringServer() { stop(); }

int ScoringServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound <= 0) throw Error("cannot bind " + host + " on an ephemeral port");
        return bound;
    }
    if (!server_->bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void ScoringServer::run() { server_->listen_after_bind(); }

void ScoringServer::stop() {
    if (server_) server_->stop();
}

bool ScoringServer::running() const { return server_->is_running(); }

}  // namespace aisoc
