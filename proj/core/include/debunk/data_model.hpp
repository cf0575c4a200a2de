#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace debunk {

enum class Label { False, True };

std::string_view to_string(Label label);
/// Accepts "true"/"false" in any case.
Label parse_label(std::string_view s);

/// Collapses a raw verdict (the binary labels or the six-way rating scale
/// pants-fire < false < barely-true < half-true < mostly-true < true) to the
/// binary label. Case, surrounding whitespace, '_' and ' ' separators are
/// ignored; "pants-on-fire" is accepted as an alias. Returns nullopt for
/// anything else.
std::optional<Label> collapse_raw_label(std::string_view raw);

struct Claim {
  std::string id;
  std::string text;
  std::optional<Label> label;
  std::optional<std::string> speaker;
  std::optional<std::string> domain;

  bool operator==(const Claim&) const = default;
};

enum class SourceKind { Scholarly, News, Web, Unknown };

std::string_view to_string(SourceKind kind);
std::optional<SourceKind> parse_source_kind(std::string_view s);

struct SourceDocument {
  std::string doc_id;
  std::string text;
  SourceKind source_kind = SourceKind::Unknown;
  std::optional<std::string> speaker;

  bool operator==(const SourceDocument&) const = default;
};

struct SentenceUnit {
  std::string doc_id;
  std::size_t sent_index = 0;
  std::string text;
  std::optional<std::string> speaker;

  bool operator==(const SentenceUnit&) const = default;
};

enum class ClaimFormat { Jsonl, Tsv };

std::optional<ClaimFormat> parse_claim_format(std::string_view s);
/// jsonl unless the extension is .tsv.
ClaimFormat claim_format_for(const std::filesystem::path& path);

struct LabelCounts {
  std::size_t false_count = 0;
  std::size_t true_count = 0;
  std::size_t unlabeled = 0;

  std::size_t total() const { return false_count + true_count + unlabeled; }
};

LabelCounts count_labels(const std::vector<Claim>& claims);

// Loaders throw DataError naming the file and line of the first bad record.
std::vector<Claim> load_claims(const std::filesystem::path& path, ClaimFormat format);
std::vector<SourceDocument> load_corpus(const std::filesystem::path& path);

// Parsing from in-memory text; `origin` is used in error messages.
std::vector<Claim> parse_claims_jsonl(std::string_view content, const std::string& origin = "<memory>");
std::vector<Claim> parse_claims_tsv(std::string_view content, const std::string& origin = "<memory>");
std::vector<SourceDocument> parse_corpus_jsonl(std::string_view content, const std::string& origin = "<memory>");

nlohmann::json to_json(const Claim& claim);
nlohmann::json to_json(const SourceDocument& doc);
nlohmann::json to_json(const SentenceUnit& sentence);
SentenceUnit sentence_from_json(const nlohmann::json& j);

std::string claims_to_jsonl(const std::vector<Claim>& claims);
std::string corpus_to_jsonl(const std::vector<SourceDocument>& docs);

/// Rule-based splitter: a sentence ends at '.', '!' or '?' (optionally
/// followed by closing quotes or brackets) when the next non-space character
/// is an uppercase letter, possibly behind an opening quote or bracket.
/// Periods that end a known abbreviation never split. Sentences are returned
/// with surrounding whitespace trimmed; whitespace-only input yields nothing.
std::vector<SentenceUnit> segment_sentences(const SourceDocument& doc);

/// segment_sentences over every document, in corpus order.
std::vector<SentenceUnit> segment_corpus(const std::vector<SourceDocument>& docs);

/// The abbreviation list consulted by segment_sentences.
const std::vector<std::string>& sentence_abbreviations();

}  // namespace debunk
