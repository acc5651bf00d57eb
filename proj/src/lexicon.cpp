#include "lokg/lexicon.hpp"

#include <algorithm>

#include <array>
#include <unordered_map>

#include "lokg/error.hpp"

namespace lokg {

namespace {

// clang-format off
constexpr std::array kEntries = {
    // function and template words
    LexiconEntry{"and", "und", -1},
    LexiconEntry{"of", "von", -1},
    LexiconEntry{"in", "in", -1},
    LexiconEntry{"for", "für", -1},
    LexiconEntry{"with", "mit", -1},
    LexiconEntry{"the", "die", -1},
    LexiconEntry{"introduction", "einführung", -1},
    LexiconEntry{"basics", "grundlagen", -1},
    LexiconEntry{"advanced", "fortgeschrittene", -1},
    LexiconEntry{"course", "kurs", -1},
    LexiconEntry{"topic", "thema", -1},
    LexiconEntry{"journey", "lernpfad", -1},
    LexiconEntry{"package", "paket", -1},
    LexiconEntry{"materials", "materialien", -1},
    LexiconEntry{"unit", "einheit", -1},
    LexiconEntry{"resource", "ressource", -1},
    LexiconEntry{"overview", "überblick", -1},
    LexiconEntry{"practice", "praxis", -1},

    // 0: elderly care
    LexiconEntry{"elderly-care", "altenpflege", 0},
    LexiconEntry{"dementia", "demenz", 0},
    LexiconEntry{"nursing", "pflege", 0},
    LexiconEntry{"caregiver", "pflegekraft", 0},
    LexiconEntry{"wound", "wunde", 0},
    LexiconEntry{"infection", "infektion", 0},
    LexiconEntry{"mobility", "mobilität", 0},
    LexiconEntry{"nutrition", "ernährung", 0},
    LexiconEntry{"medication", "medikation", 0},
    LexiconEntry{"documentation", "dokumentation", 0},
    LexiconEntry{"resident", "bewohner", 0},
    LexiconEntry{"relatives", "angehörige", 0},
    LexiconEntry{"palliative", "palliativ", 0},
    LexiconEntry{"geriatrics", "geriatrie", 0},
    LexiconEntry{"prevention", "prävention", 0},
    LexiconEntry{"fall", "sturz", 0},
    LexiconEntry{"assessment", "einschätzung", 0},
    LexiconEntry{"comfort", "wohlbefinden", 0},
    LexiconEntry{"home", "heim", 0},
    LexiconEntry{"night", "nacht", 0},

    // 1: communication
    LexiconEntry{"communication", "kommunikation", 1},
    LexiconEntry{"conversation", "gespräch", 1},
    LexiconEntry{"conflict", "konflikt", 1},
    LexiconEntry{"empathy", "empathie", 1},
    LexiconEntry{"listening", "zuhören", 1},
    LexiconEntry{"feedback", "rückmeldung", 1},
    LexiconEntry{"language", "sprache", 1},
    LexiconEntry{"gesture", "geste", 1},
    LexiconEntry{"teamwork", "teamarbeit", 1},
    LexiconEntry{"counseling", "beratung", 1},
    LexiconEntry{"negotiation", "verhandlung", 1},
    LexiconEntry{"presentation", "präsentation", 1},
    LexiconEntry{"trust", "vertrauen", 1},
    LexiconEntry{"dialogue", "dialog", 1},
    LexiconEntry{"feeling", "gefühl", 1},
    LexiconEntry{"respect", "respekt", 1},
    LexiconEntry{"interview", "befragung", 1},
    LexiconEntry{"message", "nachricht", 1},
    LexiconEntry{"clarity", "klarheit", 1},
    LexiconEntry{"etiquette", "umgangsform", 1},

    // 2: technology
    LexiconEntry{"programming", "programmierung", 2},
    LexiconEntry{"database", "datenbank", 2},
    LexiconEntry{"network", "netzwerk", 2},
    LexiconEntry{"security", "sicherheit", 2},
    LexiconEntry{"computer", "rechner", 2},
    LexiconEntry{"algorithm", "algorithmus", 2},
    LexiconEntry{"storage", "speicher", 2},
    LexiconEntry{"interface", "schnittstelle", 2},
    LexiconEntry{"testing", "prüfung", 2},
    LexiconEntry{"automation", "automatisierung", 2},
    LexiconEntry{"cloud", "wolke", 2},
    LexiconEntry{"encryption", "verschlüsselung", 2},
    LexiconEntry{"device", "gerät", 2},
    LexiconEntry{"keyboard", "tastatur", 2},
    LexiconEntry{"printer", "drucker", 2},
    LexiconEntry{"update", "aktualisierung", 2},
    LexiconEntry{"backup", "sicherung", 2},
    LexiconEntry{"code", "quellcode", 2},
    LexiconEntry{"website", "webseite", 2},
    LexiconEntry{"program", "programm", 2},

    // 3: business
    LexiconEntry{"management", "führung", 3},
    LexiconEntry{"accounting", "buchhaltung", 3},
    LexiconEntry{"marketing", "vermarktung", 3},
    LexiconEntry{"sales", "vertrieb", 3},
    LexiconEntry{"budget", "haushalt", 3},
    LexiconEntry{"invoice", "rechnung", 3},
    LexiconEntry{"contract", "vertrag", 3},
    LexiconEntry{"customer", "kunde", 3},
    LexiconEntry{"supplier", "lieferant", 3},
    LexiconEntry{"strategy", "strategie", 3},
    LexiconEntry{"finance", "finanzen", 3},
    LexiconEntry{"tax", "steuer", 3},
    LexiconEntry{"profit", "gewinn", 3},
    LexiconEntry{"market", "markt", 3},
    LexiconEntry{"employee", "mitarbeiter", 3},
    LexiconEntry{"planning", "planung", 3},
    LexiconEntry{"purchasing", "einkauf", 3},
    LexiconEntry{"logistics", "logistik", 3},
    LexiconEntry{"warehouse", "lager", 3},
    LexiconEntry{"pricing", "preisgestaltung", 3},

    // 4: workplace safety and law
    LexiconEntry{"law", "recht", 4},
    LexiconEntry{"regulation", "vorschrift", 4},
    LexiconEntry{"liability", "haftung", 4},
    LexiconEntry{"privacy", "datenschutz", 4},
    LexiconEntry{"labour", "arbeit", 4},
    LexiconEntry{"fire", "brand", 4},
    LexiconEntry{"emergency", "notfall", 4},
    LexiconEntry{"rescue", "rettung", 4},
    LexiconEntry{"protection", "schutz", 4},
    LexiconEntry{"hazard", "gefahr", 4},
    LexiconEntry{"accident", "unfall", 4},
    LexiconEntry{"insurance", "versicherung", 4},
    LexiconEntry{"court", "gericht", 4},
    LexiconEntry{"rights", "rechte", 4},
    LexiconEntry{"inspection", "kontrolle", 4},
    LexiconEntry{"evacuation", "evakuierung", 4},
    LexiconEntry{"warning", "warnung", 4},
    LexiconEntry{"equipment", "ausrüstung", 4},
    LexiconEntry{"signage", "beschilderung", 4},
    LexiconEntry{"helmet", "helm", 4},

    // 5: school education
    LexiconEntry{"teaching", "unterricht", 5},
    LexiconEntry{"learning", "lernen", 5},
    LexiconEntry{"classroom", "klassenzimmer", 5},
    LexiconEntry{"curriculum", "lehrplan", 5},
    LexiconEntry{"exam", "klausur", 5},
    LexiconEntry{"student", "schüler", 5},
    LexiconEntry{"teacher", "lehrer", 5},
    LexiconEntry{"lesson", "lektion", 5},
    LexiconEntry{"homework", "hausaufgabe", 5},
    LexiconEntry{"reading", "lesen", 5},
    LexiconEntry{"writing", "schreiben", 5},
    LexiconEntry{"grammar", "grammatik", 5},
    LexiconEntry{"vocabulary", "wortschatz", 5},
    LexiconEntry{"mathematics", "mathematik", 5},
    LexiconEntry{"geometry", "geometrie", 5},
    LexiconEntry{"history", "geschichte", 5},
    LexiconEntry{"science", "wissenschaft", 5},
    LexiconEntry{"school", "schule", 5},
    LexiconEntry{"tutor", "nachhilfe", 5},
    LexiconEntry{"library", "bibliothek", 5},
};
// clang-format on

// German-only spellings that translate but have no unique English partner.
constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kExtraDeToEn = {{
    {"der", "the"},
    {"das", "the"},
    {"den", "the"},
    {"im", "in"},
}};

struct Index {
    std::unordered_map<std::string_view, std::string_view> de_to_en;
    std::unordered_map<std::string_view, std::string_view> en_to_de;
    int domains = 0;

    Index() {
        for (const auto& e : kEntries) {
            de_to_en.emplace(e.de, e.en);
            en_to_de.emplace(e.en, e.de);
            domains = std::max(domains, e.domain + 1);
        }
        for (const auto& [de, en] : kExtraDeToEn) de_to_en.emplace(de, en);
    }
};

const Index& index() {
    static const Index idx;
    return idx;
}

}  // namespace

int lexicon_domain_count() noexcept { return index().domains; }

std::span<const LexiconEntry> lexicon_entries() noexcept { return kEntries; }

std::vector<LexiconEntry> lexicon_domain(int domain) {
    if (domain < 0 || domain >= lexicon_domain_count()) {
        throw Error(ErrorCode::InvalidArgument, "lexicon has no domain " + std::to_string(domain));
    }
    std::vector<LexiconEntry> out;
    for (const auto& e : kEntries) {
        if (e.domain == domain) out.push_back(e);
    }
    return out;
}

std::optional<std::string_view> lexicon_de_to_en(std::string_view de_word) {
    const auto& m = index().de_to_en;
    auto it = m.find(de_word);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string_view> lexicon_en_to_de(std::string_view en_word) {
    const auto& m = index().en_to_de;
    auto it = m.find(en_word);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

}  // namespace lokg
