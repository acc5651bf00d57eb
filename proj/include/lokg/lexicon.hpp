#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lokg {

/// One English/German word pair of the bundled test lexicon. `domain` groups
/// content words into vocabulary clusters (used by the synthetic generator);
/// function and template words have domain -1.
struct LexiconEntry {
    std::string_view en;
    std::string_view de;
    int domain;
};

/// Number of vocabulary clusters in the bundled lexicon.
int lexicon_domain_count() noexcept;

std::span<const LexiconEntry> lexicon_entries() noexcept;

/// Content words of one cluster, in lexicon order.
std::vector<LexiconEntry> lexicon_domain(int domain);

/// Word-level lookups on lowercased words.
std::optional<std::string_view> lexicon_de_to_en(std::string_view de_word);
std::optional<std::string_view> lexicon_en_to_de(std::string_view en_word);

}  // namespace lokg
