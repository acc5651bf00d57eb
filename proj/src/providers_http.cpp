#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "lokg/error.hpp"
#include "lokg/providers.hpp"

namespace lokg {

using nlohmann::json;

ProviderHttpClient::ProviderHttpClient(ProviderConfig config)
    : config_(std::move(config)), attempts_(std::make_shared<std::atomic<std::size_t>>(0)) {
    config_.validate();
    if (config_.mode != ProviderMode::External) {
        throw Error(ErrorCode::ConfigError, "HTTP client needs an external provider config");
    }
}

std::size_t ProviderHttpClient::attempts() const noexcept { return attempts_->load(); }

std::string ProviderHttpClient::post(const std::string& path, const std::string& body) const {
    const auto& endpoint = *config_.endpoint;
    std::string last_problem;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) std::this_thread::sleep_for(config_.backoff_base * (1 << (attempt - 2)));
        attempts_->fetch_add(1);

        httplib::Client client(endpoint);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        const httplib::Headers headers = {{std::string(kProtocolHeader), std::string(kProtocolVersion)}};

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_problem = "transport error (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status == 503) {
            last_problem = "503 model unavailable";
            continue;
        }
        if (res->status == 400) throw Error(ErrorCode::ProviderError, endpoint + path + " rejected the request: " + res->body);
        if (res->status < 200 || res->status >= 300) {
            throw Error(ErrorCode::ProviderError, endpoint + path + " returned HTTP " + std::to_string(res->status));
        }
        return res->body;
    }
    throw Error(ErrorCode::ProviderUnavailable, endpoint + path + " failed after " +
                                                    std::to_string(config_.max_attempts) + " attempts: " + last_problem);
}

namespace {

json parse_response(const std::string& body, const std::string& what) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ProviderError, what + " response is not valid JSON: " + e.what());
    }
}

void require_non_empty(std::span<const std::string> texts) {
    for (const auto& t : texts) {
        if (t.empty()) throw Error(ErrorCode::EmptyText, "provider requests need non-empty texts");
    }
}

}  // namespace

std::vector<LanguageVerdict> ExternalLanguageDetector::detect_batch(std::span<const std::string> texts) {
    require_non_empty(texts);
    const json req = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto res = parse_response(client_.post("/detect", req.dump()), "/detect");
    if (!res.contains("verdicts") || !res["verdicts"].is_array() || res["verdicts"].size() != texts.size()) {
        throw Error(ErrorCode::ProviderError, "/detect returned a verdict list of the wrong shape");
    }
    std::vector<LanguageVerdict> out;
    for (const auto& v : res["verdicts"]) {
        LanguageVerdict lv{v.at("lang").get<std::string>(), v.at("confidence").get<double>()};
        if (!(lv.confidence >= 0.0 && lv.confidence <= 1.0)) {
            throw Error(ErrorCode::ProviderError, "/detect confidence outside [0,1]");
        }
        out.push_back(std::move(lv));
    }
    return out;
}

std::vector<std::string> ExternalTranslator::translate_batch(std::span<const std::string> texts,
                                                             std::string_view source, std::string_view target) {
    if (source == target) {
        throw Error(ErrorCode::InvalidArgument, "translation source and target are both '" + std::string(source) + "'");
    }
    const json req = {{"source", std::string(source)},
                      {"target", std::string(target)},
                      {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto res = parse_response(client_.post("/translate", req.dump()), "/translate");
    if (!res.contains("texts") || !res["texts"].is_array() || res["texts"].size() != texts.size()) {
        throw Error(ErrorCode::ProviderError, "/translate returned a text list of the wrong shape");
    }
    return res["texts"].get<std::vector<std::string>>();
}

std::vector<EmbeddingVector> ExternalEmbedder::embed_batch(std::span<const std::string> texts) {
    require_non_empty(texts);
    const auto& cfg = client_.config();
    const std::size_t batches = (texts.size() + cfg.batch_size - 1) / cfg.batch_size;
    std::vector<std::vector<EmbeddingVector>> results(batches);
    std::vector<std::exception_ptr> failures(batches);
    const std::string tag_name = tag();

    auto run_batch = [&](std::size_t b) {
        const auto first = b * cfg.batch_size;
        const auto count = std::min(cfg.batch_size, texts.size() - first);
        const json req = {{"model", cfg.model_name},
                          {"texts", std::vector<std::string>(texts.begin() + first, texts.begin() + first + count)}};
        const auto res = parse_response(client_.post("/embed", req.dump()), "/embed");
        if (!res.contains("dim") || !res.contains("vectors") || !res["vectors"].is_array()) {
            throw Error(ErrorCode::ProviderError, "/embed response lacks dim or vectors");
        }
        const auto dim = res["dim"].get<std::size_t>();
        if (res["vectors"].size() != count) {
            throw Error(ErrorCode::ProviderError, "/embed returned " + std::to_string(res["vectors"].size()) +
                                                      " vectors for " + std::to_string(count) + " texts");
        }
        std::vector<EmbeddingVector> vecs;
        vecs.reserve(count);
        for (const auto& v : res["vectors"]) {
            auto values = v.get<std::vector<double>>();
            if (values.size() != dim || dim == 0) {
                throw Error(ErrorCode::DimensionMismatch, "/embed vector length " + std::to_string(values.size()) +
                                                              " does not match advertised dim " + std::to_string(dim));
            }
            for (double x : values) {
                if (!std::isfinite(x)) throw Error(ErrorCode::ProviderError, "/embed returned a non-finite value");
            }
            vecs.push_back({std::move(values), tag_name});
        }
        results[b] = std::move(vecs);
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next.fetch_add(1); b < batches; b = next.fetch_add(1)) {
            try {
                run_batch(b);
            } catch (...) {
                failures[b] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(cfg.max_in_flight, batches);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto& batch : results) {
        for (auto& v : batch) out.push_back(std::move(v));
    }
    if (!out.empty()) {
        std::lock_guard lock(dim_mutex_);
        for (const auto& v : out) {
            if (dim_ == 0) dim_ = v.dim();
            if (v.dim() != dim_) {
                throw Error(ErrorCode::DimensionMismatch, "provider '" + tag_name + "' changed dimension from " +
                                                              std::to_string(dim_) + " to " + std::to_string(v.dim()));
            }
        }
    }
    return out;
}

}  // namespace lokg
