#include "lokg/providers.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "lokg/error.hpp"
#include "lokg/lexicon.hpp"
#include "lokg/text.hpp"

namespace lokg {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.provider_tag != b.provider_tag) {
        throw Error(ErrorCode::ProviderTagMismatch, "cannot compare '" + a.provider_tag + "' with '" + b.provider_tag + "'");
    }
    if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "embedding dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

void ProviderConfig::validate() const {
    if (mode == ProviderMode::External && (!endpoint || endpoint->empty())) {
        throw Error(ErrorCode::ConfigError, "external provider requires an endpoint");
    }
    if (mode == ProviderMode::Builtin && endpoint) {
        throw Error(ErrorCode::ConfigError, "built-in provider must not declare an endpoint");
    }
    if (batch_size == 0) throw Error(ErrorCode::ConfigError, "batch_size must be positive");
    if (max_attempts < 1) throw Error(ErrorCode::ConfigError, "max_attempts must be at least 1");
    if (max_in_flight == 0) throw Error(ErrorCode::ConfigError, "max_in_flight must be positive");
}

std::string_view to_string(ProviderMode mode) noexcept {
    return mode == ProviderMode::Builtin ? "builtin" : "external";
}

std::optional<ProviderMode> parse_provider_mode(std::string_view s) {
    if (s == "builtin") return ProviderMode::Builtin;
    if (s == "external") return ProviderMode::External;
    return std::nullopt;
}

bool is_supported_language(std::string_view lang) noexcept { return lang == "en" || lang == "de"; }

LanguageVerdict LanguageDetector::detect(std::string_view text) {
    if (clean_text(text).empty()) throw Error(ErrorCode::EmptyText, "language detection needs non-empty text");
    const std::string one(text);
    return detect_batch(std::span<const std::string>(&one, 1)).front();
}

Translation Translator::translate(std::string_view text, std::string_view source, std::string_view target) {
    if (source == target) {
        throw Error(ErrorCode::InvalidArgument, "translation source and target are both '" + std::string(source) + "'");
    }
    const std::string one(text);
    auto out = translate_batch(std::span<const std::string>(&one, 1), source, target);
    return {std::move(out.front()), tag()};
}

// ---------------------------------------------------------------------------
// language detection

namespace {

constexpr std::string_view kEnglishProfileText =
    "The course explains how learners can plan their own path through the material. Each topic starts with a "
    "short overview and then moves on to practical examples that show what the theory means at work. You will "
    "learn which questions to ask, how to collect information from different sources and how to share results "
    "with the rest of the team. The final part of the unit gives you time to reflect on what you have learned "
    "and to think about the next steps. Nurses and caregivers often work under pressure, so this training "
    "focuses on the skills that help them stay calm, communicate clearly and make good decisions. There are "
    "several exercises for small groups, and most of them can also be done online. In addition, the teacher "
    "provides feedback after every session. This is the right place to start if you want to understand the "
    "basic ideas behind modern software, networks and data protection, or if you would like to improve your "
    "writing, reading and speaking skills in everyday situations.";

constexpr std::string_view kGermanProfileText =
    "Der Kurs erklärt, wie Lernende ihren eigenen Weg durch das Material planen können. Jedes Thema beginnt mit "
    "einem kurzen Überblick und geht dann zu praktischen Beispielen über, die zeigen, was die Theorie bei der "
    "Arbeit bedeutet. Sie lernen, welche Fragen Sie stellen sollten, wie Sie Informationen aus verschiedenen "
    "Quellen sammeln und wie Sie Ergebnisse mit dem restlichen Team teilen. Der letzte Teil der Einheit gibt "
    "Ihnen Zeit, über das Gelernte nachzudenken und die nächsten Schritte zu überlegen. Pflegekräfte arbeiten "
    "häufig unter Druck, deshalb konzentriert sich diese Schulung auf Fähigkeiten, die ihnen helfen, ruhig zu "
    "bleiben, klar zu kommunizieren und gute Entscheidungen zu treffen. Es gibt mehrere Übungen für kleine "
    "Gruppen, und die meisten davon können auch online durchgeführt werden. Außerdem gibt die Lehrkraft nach "
    "jeder Sitzung eine Rückmeldung. Hier sind Sie richtig, wenn Sie die grundlegenden Ideen hinter moderner "
    "Software, Netzwerken und Datenschutz verstehen möchten oder Ihre Fähigkeiten im Schreiben, Lesen und "
    "Sprechen in alltäglichen Situationen verbessern wollen.";

using TrigramCounts = std::unordered_map<std::u32string, double>;

TrigramCounts trigram_counts(std::string_view cleaned) {
    TrigramCounts counts;
    for (const auto& word : tokenize(cleaned)) {
        const auto padded = U" " + utf8_decode(word) + U" ";
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) counts[padded.substr(i, 3)] += 1.0;
    }
    return counts;
}

double profile_cosine(const TrigramCounts& text, const TrigramCounts& profile) {
    double dot = 0.0, nt = 0.0, np = 0.0;
    for (const auto& [tri, c] : text) {
        nt += c * c;
        auto it = profile.find(tri);
        if (it != profile.end()) dot += c * it->second;
    }
    for (const auto& [_, c] : profile) np += c * c;
    if (nt == 0.0 || np == 0.0) return 0.0;
    return dot / std::sqrt(nt * np);
}

const TrigramCounts& english_profile() {
    static const TrigramCounts p = trigram_counts(clean_text(kEnglishProfileText));
    return p;
}

const TrigramCounts& german_profile() {
    static const TrigramCounts p = trigram_counts(clean_text(kGermanProfileText));
    return p;
}

}  // namespace

LanguageVerdict BuiltinLanguageDetector::detect_one(std::string_view text) const {
    const auto cleaned = clean_text(text);
    if (cleaned.empty()) throw Error(ErrorCode::EmptyText, "language detection needs non-empty text");

    double stop_en = 0.0, stop_de = 0.0;
    for (const auto& w : tokenize(cleaned)) {
        const bool en = is_english_stopword(w);
        const bool de = is_german_stopword(w);
        if (en && !de) stop_en += 1.0;
        if (de && !en) stop_de += 1.0;
    }
    double german_letters = 0.0;
    for (char32_t cp : utf8_decode(cleaned)) {
        const char32_t lc = to_lower(cp);
        if (lc == U'ä' || lc == U'ö' || lc == U'ü' || lc == U'ß') german_letters += 1.0;
    }
    const auto tri = trigram_counts(cleaned);
    const double tri_diff = profile_cosine(tri, english_profile()) - profile_cosine(tri, german_profile());

    // Positive evidence favours English.
    const double evidence = 2.0 * (stop_en - stop_de) + 8.0 * tri_diff - 1.5 * german_letters;
    const double p_en = 1.0 / (1.0 + std::exp(-evidence));
    if (evidence >= 0.0) return {"en", p_en};
    return {"de", 1.0 - p_en};
}

std::vector<LanguageVerdict> BuiltinLanguageDetector::detect_batch(std::span<const std::string> texts) {
    std::vector<LanguageVerdict> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(detect_one(t));
    return out;
}

// ---------------------------------------------------------------------------
// translation

std::string BuiltinTranslator::translate_one(std::string_view text, std::string_view source, std::string_view target) {
    if (source == target) {
        throw Error(ErrorCode::InvalidArgument, "translation source and target are both '" + std::string(source) + "'");
    }
    const bool de_en = source == "de" && target == "en";
    const bool en_de = source == "en" && target == "de";
    if (!de_en && !en_de) {
        throw Error(ErrorCode::UnsupportedPair,
                    "built-in translator supports de<->en only, got " + std::string(source) + "->" + std::string(target));
    }

    const auto cps = utf8_decode(text);
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < cps.size()) {
        if (!is_letter(cps[i]) && !is_digit(cps[i])) {
            utf8_append(out, cps[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < cps.size() &&
               (is_letter(cps[j]) || is_digit(cps[j]) ||
                (cps[j] == U'-' && j + 1 < cps.size() && (is_letter(cps[j + 1]) || is_digit(cps[j + 1]))))) {
            ++j;
        }
        const std::u32string word(cps.begin() + static_cast<std::ptrdiff_t>(i), cps.begin() + static_cast<std::ptrdiff_t>(j));
        std::u32string lowered = word;
        for (auto& cp : lowered) cp = to_lower(cp);
        const auto key = utf8_encode(lowered);
        const auto hit = de_en ? lexicon_de_to_en(key) : lexicon_en_to_de(key);
        out += hit ? std::string(*hit) : utf8_encode(word);
        i = j;
    }
    return out;
}

std::vector<std::string> BuiltinTranslator::translate_batch(std::span<const std::string> texts, std::string_view source,
                                                            std::string_view target) {
    std::vector<std::string> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(translate_one(t, source, target));
    return out;
}

// ---------------------------------------------------------------------------
// embedding

std::vector<std::string> builtin_features(std::string_view text) {
    std::vector<std::string> features;
    for (const auto& word : tokenize(clean_text(text))) {
        features.push_back("w:" + word);
        const auto padded = U" " + utf8_decode(word) + U" ";
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) features.push_back("c:" + utf8_encode(padded.substr(i, 3)));
    }
    return features;
}

std::size_t builtin_bucket(std::string_view feature) noexcept {
    return static_cast<std::size_t>(fnv1a64(feature, 0xcbf29ce484222325ULL ^ kBuiltinHashSeed) % kBuiltinDim);
}

std::vector<double> builtin_counts(std::string_view text) {
    std::vector<double> counts(kBuiltinDim, 0.0);
    for (const auto& f : builtin_features(text)) counts[builtin_bucket(f)] += 1.0;
    return counts;
}

EmbeddingVector BuiltinEmbedder::embed_one(std::string_view text) {
    auto counts = builtin_counts(text);
    const double norm = std::sqrt(std::inner_product(counts.begin(), counts.end(), counts.begin(), 0.0));
    if (norm == 0.0) throw Error(ErrorCode::EmptyText, "nothing to embed in '" + std::string(text) + "'");
    for (auto& c : counts) c /= norm;
    return {std::move(counts), std::string(kBuiltinEmbedTag)};
}

std::vector<EmbeddingVector> BuiltinEmbedder::embed_batch(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

// ---------------------------------------------------------------------------
// factories

std::shared_ptr<LanguageDetector> make_detector(const ProviderConfig& config) {
    config.validate();
    if (config.mode == ProviderMode::Builtin) return std::make_shared<BuiltinLanguageDetector>();
    return std::make_shared<ExternalLanguageDetector>(config);
}

std::shared_ptr<Translator> make_translator(const ProviderConfig& config) {
    config.validate();
    if (config.mode == ProviderMode::Builtin) return std::make_shared<BuiltinTranslator>();
    return std::make_shared<ExternalTranslator>(config);
}

std::shared_ptr<Embedder> make_embedder(const ProviderConfig& config) {
    config.validate();
    if (config.mode == ProviderMode::Builtin) return std::make_shared<BuiltinEmbedder>();
    return std::make_shared<ExternalEmbedder>(config);
}

Providers make_providers(const ProviderConfigs& configs) {
    return {make_detector(configs.detect), make_translator(configs.translate), make_embedder(configs.embed)};
}

Providers builtin_providers() {
    return {std::make_shared<BuiltinLanguageDetector>(), std::make_shared<BuiltinTranslator>(),
            std::make_shared<BuiltinEmbedder>()};
}

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const ProviderConfig& config) {
    return make_embedder(config)->embed_batch(texts);
}

}  // namespace lokg
