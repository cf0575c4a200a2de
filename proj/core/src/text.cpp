#include "debunk/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/locid.h>

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace debunk::text {
namespace {

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

std::string encode(const std::u32string& cps, std::size_t begin, std::size_t end) {
  std::string out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) append_utf8(out, cps[i]);
  return out;
}

std::u32string decode(const icu::UnicodeString& u) {
  std::u32string out;
  out.reserve(static_cast<std::size_t>(u.length()));
  for (int32_t i = 0; i < u.length(); i = u.moveIndex32(i, 1)) out.push_back(static_cast<char32_t>(u.char32At(i)));
  return out;
}

const icu::Normalizer2& nfc() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || n == nullptr) throw std::runtime_error("ICU NFC normalizer unavailable");
    return n;
  }();
  return *instance;
}

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
bool is_alnum(char32_t c) { return u_isalnum(static_cast<UChar32>(c)); }
bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)); }
bool is_punct(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

// Collapses whitespace runs and trims, in place.
void collapse(std::u32string& cps) {
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  cps = std::move(out);
}

std::u32string folded(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString n = nfc().normalize(u, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
  n.toLower(icu::Locale::getRoot());
  // Case mapping can leave the string denormalized for a handful of code points.
  if (!nfc().isNormalized(n, status)) n = nfc().normalize(n, status);
  std::u32string cps = decode(n);
  collapse(cps);
  return cps;
}

std::u32string normalized(std::string_view s) {
  std::u32string cps = folded(s);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && (is_punct(cps[begin]) || is_space(cps[begin]))) ++begin;
  while (end > begin && (is_punct(cps[end - 1]) || is_space(cps[end - 1]))) --end;
  return cps.substr(begin, end - begin);
}

bool is_joiner(char32_t c) { return c == U'-' || c == U'\'' || c == U'’' || c == U'‐' || c == U'‑'; }

bool is_closing(char32_t c) {
  const auto type = u_charType(static_cast<UChar32>(c));
  return c == U'"' || c == U'\'' || type == U_END_PUNCTUATION || type == U_FINAL_PUNCTUATION;
}

constexpr std::string_view kStopWords[] = {
    "a",       "about",  "above",   "after",  "again",   "against", "all",     "am",     "an",    "and",
    "any",     "are",    "as",      "at",     "be",      "because", "been",    "before", "being", "below",
    "between", "both",   "but",     "by",     "can",     "could",   "did",     "do",     "does",  "doing",
    "down",    "during", "each",    "few",    "for",     "from",    "further", "had",    "has",   "have",
    "having",  "he",     "her",     "here",   "hers",    "herself", "him",     "himself", "his",  "how",
    "i",       "if",     "in",      "into",   "is",      "it",      "its",     "itself", "just",  "me",
    "more",    "most",   "my",      "myself", "no",      "nor",     "not",     "now",    "of",    "off",
    "on",      "once",   "only",    "or",     "other",   "our",     "ours",    "ourselves", "out", "over",
    "own",     "s",      "same",    "she",    "should",  "so",      "some",    "such",   "t",     "than",
    "that",    "the",    "their",   "theirs", "them",    "themselves", "then", "there",  "these", "they",
    "this",    "those",  "through", "to",     "too",     "under",   "until",   "up",     "very",  "was",
    "we",      "were",   "what",    "when",   "where",   "which",   "while",   "who",    "whom",  "why",
    "will",    "with",   "would",   "you",    "your",    "yours",   "yourself",
};

}  // namespace

std::string collapse_whitespace(std::string_view s) {
  std::u32string cps = decode(icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size()))));
  collapse(cps);
  return encode(cps, 0, cps.size());
}

std::string fold(std::string_view s) {
  const std::u32string cps = folded(s);
  return encode(cps, 0, cps.size());
}

std::string normalize(std::string_view s) {
  const std::u32string cps = normalized(s);
  return encode(cps, 0, cps.size());
}

bool ends_with_question(std::string_view s) {
  const std::u32string cps = folded(s);
  std::size_t end = cps.size();
  while (end > 0 && (is_closing(cps[end - 1]) || is_space(cps[end - 1]))) --end;
  if (end == 0) return false;
  const char32_t last = cps[end - 1];
  return last == U'?' || last == U'？' || last == U'؟';
}

std::vector<std::string> terms(std::string_view s, const TermOptions& options) {
  const std::u32string cps = normalized(s);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_alnum(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < cps.size() && is_alnum(cps[j])) ++j;
    std::string term = encode(cps, i, j);
    i = j;
    if (options.remove_stop_words && is_stop_word(term)) continue;
    if (options.stem) term = porter_stem(term);
    out.push_back(std::move(term));
  }
  return out;
}

std::vector<std::string> lm_tokens(std::string_view s) {
  const std::u32string cps = folded(s);
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    const char32_t c = cps[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (!is_alnum(c)) {
      out.push_back(encode(cps, i, i + 1));
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    for (;;) {
      while (j < n && is_alnum(cps[j])) ++j;
      if (j + 1 < n && is_alnum(cps[j + 1])) {
        const bool joined_word = is_joiner(cps[j]);
        const bool joined_number = (cps[j] == U'.' || cps[j] == U',') && is_digit(cps[j - 1]) && is_digit(cps[j + 1]);
        if (joined_word || joined_number) {
          j += 2;
          continue;
        }
      }
      break;
    }
    out.push_back(encode(cps, i, j));
    i = j;
  }
  return out;
}

bool is_stop_word(std::string_view term) {
  return std::find(std::begin(kStopWords), std::end(kStopWords), term) != std::end(kStopWords);
}

}  // namespace debunk::text
