#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lokg {

// Language detection, translation and embedding behind one interface each.
// Every service has a deterministic built-in implementation and a client for
// the external HTTP provider protocol (header `X-LOKG-Proto: 1`):
//
//   POST /detect    {texts:[string]}                  -> {verdicts:[{lang, confidence}]}
//   POST /translate {source, target, texts:[string]}  -> {texts:[string]}
//   POST /embed     {model, texts:[string]}           -> {dim, vectors:[[number]]}
//
// 400 means a malformed body, 503 a model that is not available; 503 and
// transport failures are retried with exponential backoff.

inline constexpr std::string_view kProtocolHeader = "X-LOKG-Proto";
inline constexpr std::string_view kProtocolVersion = "1";

struct LanguageVerdict {
    std::string lang;  // ISO 639-1
    double confidence = 0.0;

    bool operator==(const LanguageVerdict&) const = default;
};

struct EmbeddingVector {
    std::vector<double> values;
    std::string provider_tag;

    std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

/// Cosine of two embeddings; vectors from different providers are never
/// compared (ProviderTagMismatch). Zero vectors give 0.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

enum class ProviderMode { Builtin, External };

struct ProviderConfig {
    ProviderMode mode = ProviderMode::Builtin;
    std::optional<std::string> endpoint;  // e.g. "http://127.0.0.1:8700"
    std::chrono::milliseconds timeout{10000};
    std::size_t batch_size = 32;
    std::string model_name = "builtin";
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{250};
    std::size_t max_in_flight = 4;

    /// Throws ConfigError when the endpoint presence does not match the mode
    /// or a size/count is zero.
    void validate() const;
};

std::string_view to_string(ProviderMode mode) noexcept;
std::optional<ProviderMode> parse_provider_mode(std::string_view s);

class LanguageDetector {
public:
    virtual ~LanguageDetector() = default;
    virtual std::vector<LanguageVerdict> detect_batch(std::span<const std::string> texts) = 0;
    virtual std::string tag() const = 0;

    /// Throws EmptyText on an empty input.
    LanguageVerdict detect(std::string_view text);
};

struct Translation {
    std::string text;
    std::string translated_by;
};

class Translator {
public:
    virtual ~Translator() = default;
    virtual std::vector<std::string> translate_batch(std::span<const std::string> texts, std::string_view source,
                                                     std::string_view target) = 0;
    virtual std::string tag() const = 0;

    /// Throws InvalidArgument when source == target.
    Translation translate(std::string_view text, std::string_view source, std::string_view target);
};

class Embedder {
public:
    virtual ~Embedder() = default;
    /// One vector per input, same order. Throws EmptyText on an empty input.
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;
    virtual std::string tag() const = 0;
};

// ---------------------------------------------------------------------------
// Built-in providers

/// Character-trigram profiles plus stopword counts for English and German.
class BuiltinLanguageDetector final : public LanguageDetector {
public:
    std::vector<LanguageVerdict> detect_batch(std::span<const std::string> texts) override;
    std::string tag() const override { return "builtin:trigram-stopword:v1"; }

    LanguageVerdict detect_one(std::string_view text) const;
};

/// Word substitution from the bundled de<->en lexicon; unknown words pass through.
class BuiltinTranslator final : public Translator {
public:
    std::vector<std::string> translate_batch(std::span<const std::string> texts, std::string_view source,
                                             std::string_view target) override;
    std::string tag() const override { return "builtin"; }

    static std::string translate_one(std::string_view text, std::string_view source, std::string_view target);
};

/// Hashed term-frequency embedding: every lowercased word contributes the
/// feature "w:<word>" and the character trigrams of " <word> " as "c:<tri>".
/// Features are hashed with FNV-1a 64 (basis 0xcbf29ce484222325 xor
/// kBuiltinHashSeed) into kBuiltinDim buckets; the count vector is
/// L2-normalized.
inline constexpr std::size_t kBuiltinDim = 256;
inline constexpr std::uint64_t kBuiltinHashSeed = 0x4c4f4b47;  // "LOKG"
inline constexpr std::string_view kBuiltinEmbedTag = "builtin:hash-tf-256:v1";

std::vector<std::string> builtin_features(std::string_view text);
std::size_t builtin_bucket(std::string_view feature) noexcept;
/// Raw (unnormalized) bucket counts.
std::vector<double> builtin_counts(std::string_view text);

class BuiltinEmbedder final : public Embedder {
public:
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;
    std::string tag() const override { return std::string(kBuiltinEmbedTag); }

    static EmbeddingVector embed_one(std::string_view text);
};

// ---------------------------------------------------------------------------
// External HTTP clients

/// JSON-over-HTTP transport with the retry policy of the provider protocol.
class ProviderHttpClient {
public:
    explicit ProviderHttpClient(ProviderConfig config);

    /// POSTs `body` to `path`. Retries 503 and transport errors up to
    /// max_attempts with backoff base * 2^(attempt-1); throws
    /// ProviderUnavailable when exhausted and ProviderError on other
    /// non-2xx statuses.
    std::string post(const std::string& path, const std::string& body) const;

    /// Total HTTP attempts issued so far (for tests and run summaries).
    std::size_t attempts() const noexcept;
    const ProviderConfig& config() const noexcept { return config_; }

private:
    ProviderConfig config_;
    std::shared_ptr<std::atomic<std::size_t>> attempts_;
};

class ExternalLanguageDetector final : public LanguageDetector {
public:
    explicit ExternalLanguageDetector(ProviderConfig config) : client_(std::move(config)) {}
    std::vector<LanguageVerdict> detect_batch(std::span<const std::string> texts) override;
    std::string tag() const override { return "external:" + client_.config().model_name; }

private:
    ProviderHttpClient client_;
};

class ExternalTranslator final : public Translator {
public:
    explicit ExternalTranslator(ProviderConfig config) : client_(std::move(config)) {}
    std::vector<std::string> translate_batch(std::span<const std::string> texts, std::string_view source,
                                             std::string_view target) override;
    std::string tag() const override { return "external:" + client_.config().model_name; }

private:
    ProviderHttpClient client_;
};

/// Splits input into batch_size requests, keeps up to max_in_flight of them
/// running, and places each response by its request index.
class ExternalEmbedder final : public Embedder {
public:
    explicit ExternalEmbedder(ProviderConfig config) : client_(std::move(config)) {}
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;
    std::string tag() const override { return "external:" + client_.config().model_name; }
    std::size_t attempts() const noexcept { return client_.attempts(); }

private:
    ProviderHttpClient client_;
    std::mutex dim_mutex_;
    std::size_t dim_ = 0;
};

struct ProviderConfigs {
    ProviderConfig detect;
    ProviderConfig translate;
    ProviderConfig embed;
};

struct Providers {
    std::shared_ptr<LanguageDetector> detector;
    std::shared_ptr<Translator> translator;
    std::shared_ptr<Embedder> embedder;
};

std::shared_ptr<LanguageDetector> make_detector(const ProviderConfig& config);
std::shared_ptr<Translator> make_translator(const ProviderConfig& config);
std::shared_ptr<Embedder> make_embedder(const ProviderConfig& config);
Providers make_providers(const ProviderConfigs& configs);
Providers builtin_providers();

/// Convenience wrapper: builds the embedder for `config` and runs it.
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const ProviderConfig& config);

bool is_supported_language(std::string_view lang) noexcept;

}  // namespace lokg
