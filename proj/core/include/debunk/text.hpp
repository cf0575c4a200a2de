#pragma once

#include <string>
#include <string_view>
#include <vector>

// Unicode-aware text normalization shared by retrieval, filtering and the
// language model tokenizer. All inputs are UTF-8; invalid sequences are
// replaced with U+FFFD.
namespace debunk::text {

/// Collapses every run of Unicode whitespace to one ASCII space and trims both
/// ends. No other change.
std::string collapse_whitespace(std::string_view s);

/// NFC, lowercase, collapsed whitespace. Punctuation is kept.
std::string fold(std::string_view s);

/// fold() plus removal of leading and trailing punctuation. This is the
/// canonical form used for all matching.
std::string normalize(std::string_view s);

/// True when the folded text ends with a question mark, ignoring trailing
/// closing quotes and brackets.
bool ends_with_question(std::string_view s);

struct TermOptions {
  bool stem = false;
  bool remove_stop_words = false;

  bool operator==(const TermOptions&) const = default;
};

/// Normalized text split on runs of non-alphanumeric characters.
std::vector<std::string> terms(std::string_view s, const TermOptions& options = {});

/// Word and punctuation tokens over fold(s). Words are alphanumeric runs that
/// may be joined by internal hyphens or apostrophes ("covid-19", "don't") and
/// by '.' or ',' between digits ("0.5"); every other non-space character is a
/// token on its own.
std::vector<std::string> lm_tokens(std::string_view s);

bool is_stop_word(std::string_view term);

/// Porter (1980) suffix stripping for lowercase ASCII words. Words containing
/// non-ASCII bytes or shorter than three characters are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace debunk::text
