#include "debunk/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "debunk/error.hpp"

namespace debunk {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "debunk-tfidf-index";

long long rank_key(double score) { return std::llround(score * 1e12); }

}  // namespace

json to_json(const ScoredCandidate& candidate) {
  json j = to_json(candidate.sentence);
  j["score"] = candidate.score;
  return j;
}

ScoredCandidate candidate_from_json(const json& j) {
  return ScoredCandidate{sentence_from_json(j), j.at("score").get<double>()};
}

bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b) {
  const long long ka = rank_key(a.score);
  const long long kb = rank_key(b.score);
  if (ka != kb) return ka > kb;
  if (a.sentence.doc_id != b.sentence.doc_id) return a.sentence.doc_id < b.sentence.doc_id;
  return a.sentence.sent_index < b.sentence.sent_index;
}

TfIdfIndex TfIdfIndex::build(std::vector<SentenceUnit> sentences, text::TermOptions options) {
  if (sentences.empty()) throw DataError("cannot build an index from an empty sentence list");

  TfIdfIndex index;
  index.options_ = options;
  index.sentences_ = std::move(sentences);

  const std::size_t n = index.sentences_.size();
  std::vector<std::vector<std::pair<TermId, std::uint32_t>>> per_sentence(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::map<TermId, std::uint32_t> counts;
    for (std::string& term : text::terms(index.sentences_[s].text, options)) {
      auto [it, inserted] = index.vocabulary_.try_emplace(term, static_cast<TermId>(index.terms_.size()));
      if (inserted) {
        index.terms_.push_back(std::move(term));
        index.postings_.emplace_back();
      }
      ++counts[it->second];
    }
    for (const auto& [id, tf] : counts) {
      index.postings_[id].push_back(Posting{static_cast<std::uint32_t>(s), tf});
      per_sentence[s].emplace_back(id, tf);
    }
  }
  if (index.terms_.empty()) throw DataError("no sentence contains an indexable term");

  index.idf_.resize(index.terms_.size());
  for (std::size_t t = 0; t < index.terms_.size(); ++t) {
    const double df = static_cast<double>(index.postings_[t].size());
    index.idf_[t] = std::log((1.0 + static_cast<double>(n)) / (1.0 + df)) + 1.0;
  }

  index.norms_.assign(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    double sum = 0.0;
    for (const auto& [id, tf] : per_sentence[s]) {
      const double w = static_cast<double>(tf) * index.idf_[id];
      sum += w * w;
    }
    index.norms_[s] = std::sqrt(sum);
  }
  return index;
}

long long TfIdfIndex::term_id(std::string_view term) const {
  const auto it = vocabulary_.find(std::string(term));
  return it == vocabulary_.end() ? -1 : static_cast<long long>(it->second);
}

std::vector<std::pair<std::uint32_t, double>> TfIdfIndex::score_all(std::string_view claim_text) const {
  std::map<TermId, std::uint32_t> query;
  for (const std::string& term : text::terms(claim_text, options_)) {
    const auto it = vocabulary_.find(term);
    if (it != vocabulary_.end()) ++query[it->second];
  }
  if (query.empty()) return {};

  double query_norm_sq = 0.0;
  for (const auto& [id, tf] : query) {
    const double w = static_cast<double>(tf) * idf_[id];
    query_norm_sq += w * w;
  }
  const double query_norm = std::sqrt(query_norm_sq);

  std::vector<double> dot(sentences_.size(), 0.0);
  std::vector<std::uint32_t> touched;
  for (const auto& [id, tf] : query) {
    const double wq = static_cast<double>(tf) * idf_[id];
    for (const Posting& p : postings_[id]) {
      if (dot[p.sentence] == 0.0) touched.push_back(p.sentence);
      dot[p.sentence] += wq * static_cast<double>(p.tf) * idf_[id];
    }
  }

  std::vector<std::pair<std::uint32_t, double>> scores;
  scores.reserve(touched.size());
  for (std::uint32_t s : touched) {
    const double cosine = dot[s] / (query_norm * norms_[s]);
    if (cosine > 0.0) scores.emplace_back(s, std::min(1.0, cosine));
  }
  return scores;
}

std::vector<ScoredCandidate> TfIdfIndex::top_candidates(std::string_view claim_text, std::size_t k) const {
  if (k == 0) throw std::invalid_argument("k must be positive");
  std::vector<ScoredCandidate> candidates;
  for (const auto& [s, score] : score_all(claim_text)) candidates.push_back(ScoredCandidate{sentences_[s], score});
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                    ranks_before);
  candidates.resize(keep);
  return candidates;
}

nlohmann::ordered_json TfIdfIndex::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["options"] = {{"stem", options_.stem}, {"remove_stop_words", options_.remove_stop_words}};
  json sentences = json::array();
  for (const SentenceUnit& s : sentences_) sentences.push_back(debunk::to_json(s));
  j["sentences"] = std::move(sentences);
  j["terms"] = terms_;
  j["idf"] = idf_;
  json postings = json::array();
  for (const auto& list : postings_) {
    json entries = json::array();
    for (const Posting& p : list) entries.push_back({p.sentence, p.tf});
    postings.push_back(std::move(entries));
  }
  j["postings"] = std::move(postings);
  j["sentence_norms"] = norms_;
  return j;
}

TfIdfIndex TfIdfIndex::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormatName) throw DataError("not a TF-IDF index file");
    const int version = j.at("version").get<int>();
    if (version != kFormatVersion) throw DataError("unsupported index version " + std::to_string(version));

    TfIdfIndex index;
    index.options_.stem = j.at("options").at("stem").get<bool>();
    index.options_.remove_stop_words = j.at("options").at("remove_stop_words").get<bool>();
    for (const json& s : j.at("sentences")) index.sentences_.push_back(sentence_from_json(s));
    index.terms_ = j.at("terms").get<std::vector<std::string>>();
    index.idf_ = j.at("idf").get<std::vector<double>>();
    index.norms_ = j.at("sentence_norms").get<std::vector<double>>();
    for (const json& list : j.at("postings")) {
      std::vector<Posting> entries;
      for (const json& p : list) {
        const auto sentence = p.at(0).get<std::uint32_t>();
        if (sentence >= index.sentences_.size()) throw DataError("posting references unknown sentence");
        entries.push_back(Posting{sentence, p.at(1).get<std::uint32_t>()});
      }
      index.postings_.push_back(std::move(entries));
    }
    if (index.idf_.size() != index.terms_.size() || index.postings_.size() != index.terms_.size() ||
        index.norms_.size() != index.sentences_.size())
      throw DataError("inconsistent index file: array lengths disagree");
    for (std::size_t t = 0; t < index.terms_.size(); ++t) index.vocabulary_.emplace(index.terms_[t], static_cast<TermId>(t));
    return index;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed index file: ") + e.what());
  }
}

void TfIdfIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

TfIdfIndex TfIdfIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed index file: " + e.what());
  }
  return from_json(j);
}

}  // namespace debunk
