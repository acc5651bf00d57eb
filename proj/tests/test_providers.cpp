#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "lokg/error.hpp"
#include "lokg/providers.hpp"
#include "lokg/text.hpp"

#ifndef LOKG_TEST_DATA_DIR
#error "LOKG_TEST_DATA_DIR must point at tests/data"
#endif

using namespace lokg;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// In-process stand-in for an external provider. Embeds with the built-in
// embedder so responses are checkable, and can be told to misbehave.
class FakeProvider {
public:
    std::atomic<int> fail_503{0};  // answer this many requests with 503 first
    std::atomic<bool> always_400{false};
    std::atomic<bool> ragged_dim{false};
    std::atomic<int> dim_override{0};
    std::atomic<int> requests{0};
    std::atomic<int> missing_header{0};

    FakeProvider() {
        server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res, "embed"); });
        server_.Post("/detect", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res, "detect"); });
        server_.Post("/translate",
                     [this](const httplib::Request& req, httplib::Response& res) { handle(req, res, "translate"); });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeProvider() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::vector<std::string> bodies() {
        std::lock_guard lock(mutex_);
        return bodies_;
    }

private:
    void handle(const httplib::Request& req, httplib::Response& res, const std::string& what) {
        ++requests;
        {
            std::lock_guard lock(mutex_);
            bodies_.push_back(req.body);
        }
        if (req.get_header_value(std::string(kProtocolHeader)) != kProtocolVersion) ++missing_header;
        if (always_400) {
            res.status = 400;
            res.set_content(R"({"error":"malformed"})", "application/json");
            return;
        }
        if (fail_503.fetch_sub(1) > 0) {
            res.status = 503;
            return;
        }
        json body;
        try {
            body = json::parse(req.body);
        } catch (...) {
            res.status = 400;
            return;
        }
        json out;
        const auto texts = body.at("texts").get<std::vector<std::string>>();
        if (what == "embed") {
            out["dim"] = dim_override ? dim_override.load() : static_cast<int>(kBuiltinDim);
            out["vectors"] = json::array();
            for (std::size_t i = 0; i < texts.size(); ++i) {
                auto v = BuiltinEmbedder::embed_one(texts[i]).values;
                if (dim_override) v.resize(static_cast<std::size_t>(dim_override.load()), 0.5);
                if (ragged_dim && i == 1) v.push_back(0.0);
                out["vectors"].push_back(v);
            }
        } else if (what == "detect") {
            out["verdicts"] = json::array();
            for (const auto& t : texts) {
                const auto v = BuiltinLanguageDetector{}.detect_one(t);
                out["verdicts"].push_back({{"lang", v.lang}, {"confidence", v.confidence}});
            }
        } else {
            std::vector<std::string> tr;
            for (const auto& t : texts) {
                tr.push_back(BuiltinTranslator::translate_one(t, body.at("source").get<std::string>(),
                                                              body.at("target").get<std::string>()));
            }
            out["texts"] = tr;
        }
        res.set_content(out.dump(), "application/json");
    }

    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::mutex mutex_;
    std::vector<std::string> bodies_;
};

ProviderConfig external(const std::string& endpoint) {
    ProviderConfig c;
    c.mode = ProviderMode::External;
    c.endpoint = endpoint;
    c.model_name = "fake";
    c.timeout = std::chrono::milliseconds(2000);
    c.backoff_base = std::chrono::milliseconds(1);
    return c;
}

}  // namespace

TEST_CASE("builtin detector on the obvious stopword strings") {
    BuiltinLanguageDetector d;
    const auto en = d.detect("the and of learning with for");
    CHECK(en.lang == "en");
    CHECK(en.confidence >= 0.9);
    const auto de = d.detect("und der die Pflege mit für");
    CHECK(de.lang == "de");
    CHECK(de.confidence >= 0.9);
    CHECK(code_of([&] { d.detect(""); }) == ErrorCode::EmptyText);
    CHECK(code_of([&] { d.detect("@@@"); }) == ErrorCode::EmptyText);
}

TEST_CASE("builtin detector accuracy on the labeled fixture") {
    std::ifstream in(std::string(LOKG_TEST_DATA_DIR) + "/language_fixture.tsv");
    REQUIRE(in.good());
    BuiltinLanguageDetector d;
    std::string line;
    int total = 0, correct = 0;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        const auto label = line.substr(0, tab);
        const auto v = d.detect(line.substr(tab + 1));
        CHECK(v.confidence >= 0.0);
        CHECK(v.confidence <= 1.0);
        ++total;
        if (v.lang == label) ++correct;
    }
    REQUIRE(total == 200);
    MESSAGE("detector accuracy " << correct << "/" << total);
    CHECK(static_cast<double>(correct) / total >= 0.95);
}

TEST_CASE("builtin translator") {
    BuiltinTranslator t;
    const auto r = t.translate("Kommunikation in Altenpflege", "de", "en");
    CHECK(r.text == "communication in elderly-care");
    CHECK(r.translated_by == "builtin");
    CHECK(t.translate("Unbekanntwort", "de", "en").text == "Unbekanntwort");
    CHECK(code_of([&] { t.translate("x", "en", "en"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { t.translate("x", "de", "fr"); }) == ErrorCode::UnsupportedPair);
}

TEST_CASE("builtin embedder: deterministic, normalized, order preserving") {
    BuiltinEmbedder e;
    const std::vector<std::string> same = {"abc", "abc"};
    const auto v = e.embed_batch(same);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == v[1]);
    CHECK(v[0].dim() == kBuiltinDim);
    CHECK(v[0].provider_tag == kBuiltinEmbedTag);

    std::vector<std::string> texts;
    for (int i = 0; i < 1000; ++i) texts.push_back("text number " + std::to_string(i) + " about care " + std::to_string(i % 7));
    const auto all = e.embed_batch(texts);
    for (const auto& x : all) CHECK(std::abs(norm(x.values) - 1.0) <= 1e-9);

    ProviderConfig cfg;
    cfg.batch_size = 32;
    const auto split = embed_batch(texts, cfg);
    REQUIRE(split.size() == 1000);
    for (std::size_t i = 0; i < texts.size(); ++i) CHECK(split[i] == all[i]);

    // permutation of the batch permutes the output
    std::vector<std::string> rev(texts.rbegin(), texts.rend());
    const auto rv = e.embed_batch(rev);
    for (std::size_t i = 0; i < texts.size(); ++i) CHECK(rv[i] == all[texts.size() - 1 - i]);

    const std::vector<std::string> empty = {""};
    CHECK(code_of([&] { e.embed_batch(empty); }) == ErrorCode::EmptyText);
}

TEST_CASE("builtin features and bucket arithmetic") {
    const auto f = builtin_features("Ab");
    CHECK(std::find(f.begin(), f.end(), "w:ab") != f.end());
    CHECK(std::find(f.begin(), f.end(), "c: ab") != f.end());
    CHECK(std::find(f.begin(), f.end(), "c:ab ") != f.end());
    CHECK(builtin_bucket("w:ab") == fnv1a64("w:ab", 0xcbf29ce484222325ULL ^ kBuiltinHashSeed) % kBuiltinDim);
    const auto counts = builtin_counts("ab ab");
    double total = 0.0;
    for (double c : counts) total += c;
    CHECK(total == 2.0 * static_cast<double>(f.size()));
}

TEST_CASE("cosine refuses to compare different providers") {
    EmbeddingVector a{{1.0, 1.0}, "p1"}, b{{1.0, 0.0}, "p1"}, c{{1.0, 0.0}, "p2"};
    CHECK(cosine(a, b) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(code_of([&] { cosine(a, c); }) == ErrorCode::ProviderTagMismatch);
}

TEST_CASE("provider config validation") {
    ProviderConfig c;
    CHECK_NOTHROW(c.validate());
    c.endpoint = "http://x";
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigError);
    ProviderConfig e;
    e.mode = ProviderMode::External;
    CHECK(code_of([&] { e.validate(); }) == ErrorCode::ConfigError);
    e.endpoint = "http://x";
    e.batch_size = 0;
    CHECK(code_of([&] { e.validate(); }) == ErrorCode::ConfigError);
    CHECK(parse_provider_mode("external") == ProviderMode::External);
    CHECK_FALSE(parse_provider_mode("remote").has_value());
}

TEST_CASE("external embedder matches the wire protocol") {
    FakeProvider fake;
    auto cfg = external(fake.endpoint());
    cfg.batch_size = 7;
    ExternalEmbedder e(cfg);
    std::vector<std::string> texts;
    for (int i = 0; i < 50; ++i) texts.push_back("item " + std::to_string(i));
    const auto out = e.embed_batch(texts);
    REQUIRE(out.size() == texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        CHECK(out[i].values == BuiltinEmbedder::embed_one(texts[i]).values);
        CHECK(out[i].provider_tag == "external:fake");
    }
    CHECK(fake.requests == 8);
    CHECK(fake.missing_header == 0);
    for (const auto& body : fake.bodies()) {
        const auto j = json::parse(body);
        CHECK(j["model"] == "fake");
        CHECK(j["texts"].size() <= 7);
    }
}

TEST_CASE("external detector and translator") {
    FakeProvider fake;
    ExternalLanguageDetector d(external(fake.endpoint()));
    const auto v = d.detect("und der die Pflege mit für");
    CHECK(v.lang == "de");
    ExternalTranslator t(external(fake.endpoint()));
    CHECK(t.translate("Kommunikation in Altenpflege", "de", "en").text == "communication in elderly-care");
    CHECK(code_of([&] { t.translate("x", "en", "en"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("503 is retried and retries resend the same request") {
    FakeProvider fake;
    fake.fail_503 = 2;
    ExternalEmbedder e(external(fake.endpoint()));
    const std::vector<std::string> texts = {"alpha", "beta"};
    const auto out = e.embed_batch(texts);
    CHECK(out.size() == 2);
    CHECK(e.attempts() == 3);
    const auto bodies = fake.bodies();
    REQUIRE(bodies.size() == 3);
    CHECK(bodies[0] == bodies[1]);
    CHECK(bodies[1] == bodies[2]);
}

TEST_CASE("503 beyond the attempt budget is ProviderUnavailable") {
    FakeProvider fake;
    fake.fail_503 = 100;
    ExternalEmbedder e(external(fake.endpoint()));
    const std::vector<std::string> texts = {"alpha"};
    CHECK(code_of([&] { e.embed_batch(texts); }) == ErrorCode::ProviderUnavailable);
    CHECK(e.attempts() == 3);
}

TEST_CASE("400 is not retried") {
    FakeProvider fake;
    fake.always_400 = true;
    ExternalEmbedder e(external(fake.endpoint()));
    const std::vector<std::string> texts = {"alpha"};
    CHECK(code_of([&] { e.embed_batch(texts); }) == ErrorCode::ProviderError);
    CHECK(e.attempts() == 1);
}

TEST_CASE("dead endpoint is ProviderUnavailable after the configured attempts") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }  // closed again: nothing listens there now
    auto cfg = external("http://127.0.0.1:" + std::to_string(port));
    cfg.max_attempts = 2;
    ExternalEmbedder e(cfg);
    const std::vector<std::string> texts = {"alpha"};
    CHECK(code_of([&] { e.embed_batch(texts); }) == ErrorCode::ProviderUnavailable);
    CHECK(e.attempts() == 2);
    ExternalTranslator t(cfg);
    CHECK(code_of([&] { t.translate("Pflege", "de", "en"); }) == ErrorCode::ProviderUnavailable);
}

TEST_CASE("inconsistent dimensions are DimensionMismatch") {
    FakeProvider fake;
    fake.ragged_dim = true;
    ExternalEmbedder e(external(fake.endpoint()));
    const std::vector<std::string> texts = {"alpha", "beta"};
    CHECK(code_of([&] { e.embed_batch(texts); }) == ErrorCode::DimensionMismatch);

    FakeProvider other;
    ExternalEmbedder f(external(other.endpoint()));
    const std::vector<std::string> one = {"alpha"};
    CHECK_NOTHROW(f.embed_batch(one));
    // A later response advertising a different dim for the same provider.
    other.dim_override = 3;
    CHECK(code_of([&] { f.embed_batch(one); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("factories pick the implementation from the mode") {
    const auto p = builtin_providers();
    CHECK(p.embedder->tag() == kBuiltinEmbedTag);
    CHECK(p.detector->tag() == "builtin:trigram-stopword:v1");
    CHECK(make_embedder(external("http://127.0.0.1:1"))->tag() == "external:fake");
}
