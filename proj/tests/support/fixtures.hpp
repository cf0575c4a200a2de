#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "debunk/data_model.hpp"
#include "debunk/evidence_filter.hpp"
#include "debunk/ngram.hpp"
#include "debunk/retrieval.hpp"

namespace fixtures {

// Random sentences over a fixed synthetic vocabulary, five per document.
std::vector<debunk::SentenceUnit> synthetic_sentences(std::size_t count, std::uint64_t seed);
// Random short queries drawn from the same vocabulary plus a few unseen words.
std::vector<std::string> synthetic_queries(std::size_t count, std::uint64_t seed);

// Twenty claims about a small corpus: ten restate corpus facts (True), ten
// swap a key entity for one that never occurs in the corpus (False).
struct SeparationDataset {
  std::vector<debunk::Claim> claims;
  std::vector<debunk::SourceDocument> corpus;
};
SeparationDataset separation_dataset();

// Filter rule fixtures: each candidate with the rule expected to reject it
// (empty for kept candidates).
struct FilterCase {
  debunk::Claim claim;
  debunk::ScoredCandidate candidate;
  std::string expected_rule;  // "", "R1" .. "R4"
};
std::vector<FilterCase> filter_cases();

// Writes claims.jsonl and corpus.jsonl for the separation dataset.
void write_separation_files(const std::filesystem::path& dir);

// A scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "debunk-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Protocol logic of the reference fake bridge: an n-gram scorer behind the
// newline-delimited JSON protocol. Text "__fail__" yields an error response.
class FakeBridge {
 public:
  nlohmann::json handle(const nlohmann::json& request);

 private:
  debunk::NgramScorer scorer_;
};

}  // namespace fixtures
