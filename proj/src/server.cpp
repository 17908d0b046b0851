#include "mwer/server.hpp"

#include "mwer/error.hpp"

#include "httplib.h"

#include <mutex>

namespace mwer {

namespace {

json error_body(const std::exception& e)
{
    json body{{"error", "InternalError"}, {"message", e.what()}, {"span", nullptr}};
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        body["error"] = std::string(error_name(err->code()));
        if (err->span()) {
            body["span"] = json{{"offset", err->span()->offset}, {"length", err->span()->length}};
        }
    }
    return body;
}

std::pair<int, json> not_found(const std::string& id)
{
    return {404, json{{"error", "NotFound"}, {"message", "no sample with id '" + id + "'"}, {"span", nullptr}}};
}

} // namespace

DashboardServer::DashboardServer(std::filesystem::path corpus, EvalConfig config, StreamingOptions streaming,
                                 std::optional<std::filesystem::path> static_dir)
    : config_(std::move(config)),
      streaming_(std::move(streaming)),
      static_dir_(std::move(static_dir)),
      corpus_(load_corpus(corpus, config_.tokenizer)),
      http_(std::make_unique<httplib::Server>())
{
    install_routes();
}

DashboardServer::~DashboardServer()
{
    stop();
}

std::pair<int, json> DashboardServer::get_corpus() const
{
    std::shared_lock lock(mutex_);
    json samples = json::array();
    for (const auto& r : corpus_.records) {
        json hyps = json::object();
        for (const auto& [name, text] : r.hypotheses) {
            hyps[name] = text;
        }
        json entry{{"id", r.id},
                   {"annotation", r.annotation},
                   {"hypotheses", std::move(hyps)},
                   {"streaming", r.timed_words.has_value() && r.session_history.has_value()},
                   {"error", nullptr}};
        try {
            parse_annotation(r.annotation, config_.tokenizer);
        } catch (const Error& e) {
            entry["error"] = error_body(e);
        }
        samples.push_back(std::move(entry));
    }
    json failures = json::array();
    for (const auto& f : corpus_.failures) {
        failures.push_back(json{{"line", f.line}, {"id", f.id}, {"error", f.message}});
    }
    return {200, json{{"v", corpus_version},
                      {"config", json{{"mode", mode_name(config_.mode)},
                                      {"insertion_cap", config_.insertion_cap ? json(*config_.insertion_cap)
                                                                              : json(nullptr)}}},
                      {"samples", std::move(samples)},
                      {"failures", std::move(failures)}}};
}

std::pair<int, json> DashboardServer::get_multialign(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    const CorpusRecord* r = corpus_.find(id);
    if (r == nullptr) {
        return not_found(id);
    }
    try {
        const Annotation a = parse_annotation(r->annotation, config_.tokenizer);
        json body = to_json(multi_align(a, r->hypotheses, config_));
        body["id"] = id;
        body["annotation"] = r->annotation;
        return {200, std::move(body)};
    } catch (const Error& e) {
        return {422, error_body(e)};
    }
}

std::pair<int, json> DashboardServer::get_streaming(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    const CorpusRecord* r = corpus_.find(id);
    if (r == nullptr) {
        return not_found(id);
    }
    if (!r->timed_words || !r->session_history) {
        return {404, json{{"error", "NoStreamingData"},
                          {"message", "sample '" + id + "' has no timed words or session history"},
                          {"span", nullptr}}};
    }
    try {
        const Annotation a = parse_annotation(r->annotation, config_.tokenizer);
        const StreamingSample sample = evaluate_streaming(id, a, *r->timed_words, load_history(*r->session_history),
                                                          std::nullopt, streaming_, config_);
        const StreamingHistogram h = prescription_histogram(sample.rows, streaming_.histogram);
        return {200, streaming_json({sample}, h, streaming_)};
    } catch (const Error& e) {
        return {422, error_body(e)};
    }
}

std::pair<int, json> DashboardServer::post_annotation(const std::string& id, const std::string& body)
{
    std::string text;
    try {
        const json j = json::parse(body);
        if (!j.is_object() || !j.contains("annotation") || !j["annotation"].is_string()) {
            throw Error(ErrorCode::InvalidInput, "body must be {\"annotation\": string}");
        }
        text = j["annotation"].get<std::string>();
        parse_annotation(text, config_.tokenizer);
    } catch (const json::parse_error& e) {
        return {400, error_body(Error(ErrorCode::InvalidInput, e.what()))};
    } catch (const Error& e) {
        return {400, error_body(e)};
    }

    std::unique_lock lock(mutex_);
    CorpusRecord* r = corpus_.find(id);
    if (r == nullptr) {
        return not_found(id);
    }
    const CorpusRecord before = *r;
    set_annotation(*r, text);
    try {
        save_corpus(corpus_);
    } catch (const std::exception& e) {
        *r = before;
        return {500, error_body(e)};
    }
    return {200, json{{"id", id}, {"annotation", text}}};
}

void DashboardServer::install_routes()
{
    auto reply = [](httplib::Response& res, const std::pair<int, json>& result) {
        res.status = result.first;
        res.set_content(dump_line(result.second), "application/json");
    };
    http_->Get("/api/corpus", [this, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, get_corpus());
    });
    http_->Get(R"(/api/sample/([^/]+)/multialign)", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, get_multialign(req.matches[1]));
    });
    http_->Get(R"(/api/sample/([^/]+)/streaming)", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, get_streaming(req.matches[1]));
    });
    http_->Post(R"(/api/sample/([^/]+)/annotation)",
                [this, reply](const httplib::Request& req, httplib::Response& res) {
                    reply(res, post_annotation(req.matches[1], req.body));
                });
    if (static_dir_) {
        http_->set_mount_point("/", static_dir_->string());
    }
}

int DashboardServer::bind(const std::string& host, int port)
{
    if (port == 0) {
        return http_->bind_to_any_port(host);
    }
    return http_->bind_to_port(host, port) ? port : -1;
}

void DashboardServer::listen()
{
    http_->listen_after_bind();
}

void DashboardServer::stop()
{
    if (http_) {
        http_->stop();
    }
}

} // namespace mwer
