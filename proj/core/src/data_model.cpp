#include "debunk/data_model.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "debunk/error.hpp"
#include "debunk/text.hpp"

namespace debunk {
namespace {

using nlohmann::json;

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim_ascii(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Decodes the code point starting at s[i]; sets `length` to its byte length.
// Malformed sequences decode as U+FFFD with length 1.
char32_t decode_at(std::string_view s, std::size_t i, std::size_t& length) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) { return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80; };
  auto bits = [&](std::size_t k) { return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F); };
  if (b0 < 0x80) {
    length = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    length = 2;
    return (static_cast<char32_t>(b0 & 0x1F) << 6) | bits(1);
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    length = 3;
    return (static_cast<char32_t>(b0 & 0x0F) << 12) | (bits(1) << 6) | bits(2);
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    length = 4;
    return (static_cast<char32_t>(b0 & 0x07) << 18) | (bits(1) << 12) | (bits(2) << 6) | bits(3);
  }
  length = 1;
  return 0xFFFD;
}

bool is_space_at(std::string_view s, std::size_t i, std::size_t& length) {
  return u_isUWhiteSpace(static_cast<UChar32>(decode_at(s, i, length)));
}

std::size_t skip_space(std::string_view s, std::size_t i) {
  std::size_t length = 0;
  while (i < s.size() && is_space_at(s, i, length)) i += length;
  return i;
}

std::string_view trim_unicode(std::string_view s) {
  const std::size_t begin = skip_space(s, 0);
  std::size_t end = s.size();
  // Walk back over whole code points.
  while (end > begin) {
    std::size_t start = end - 1;
    while (start > begin && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) --start;
    std::size_t length = 0;
    if (!is_space_at(s, start, length)) break;
    end = start;
  }
  return s.substr(begin, end - begin);
}

bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == U'’' || c == U'”' || c == U'»';
}

bool is_opener(char32_t c) {
  return c == U'"' || c == U'\'' || c == U'(' || c == U'[' || c == U'‘' || c == U'“' || c == U'«';
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool iequals_ascii(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
  return true;
}

// True when `prefix` (text up to and including a period) ends with one of
// the abbreviations, starting at a word boundary.
bool ends_with_abbreviation(std::string_view prefix) {
  for (const std::string& abbreviation : sentence_abbreviations()) {
    if (prefix.size() < abbreviation.size()) continue;
    const std::size_t at = prefix.size() - abbreviation.size();
    if (!iequals_ascii(prefix.substr(at), abbreviation)) continue;
    if (at == 0) return true;
    const char before = prefix[at - 1];
    if (std::isspace(static_cast<unsigned char>(before)) || before == '(' || before == '[' || before == '"') return true;
  }
  return false;
}

std::optional<std::string> optional_string(const json& record, const char* key, const std::string& origin,
                                           std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(origin, line, std::string("field \"") + key + "\" must be a string or null");
  return it->get<std::string>();
}

std::string required_id(const json& record, const char* key, const std::string& origin, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) throw DataError(origin, line, std::string("missing \"") + key + "\"");
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  if (!it->is_string()) throw DataError(origin, line, std::string("field \"") + key + "\" must be a string");
  std::string id = it->get<std::string>();
  if (trim_ascii(id).empty()) throw DataError(origin, line, std::string("empty \"") + key + "\"");
  return id;
}

std::string required_text(const json& record, const char* key, const std::string& origin, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) throw DataError(origin, line, std::string("missing \"") + key + "\"");
  if (!it->is_string()) throw DataError(origin, line, std::string("field \"") + key + "\" must be a string");
  std::string value = it->get<std::string>();
  if (trim_unicode(value).empty()) throw DataError(origin, line, std::string("empty \"") + key + "\"");
  return value;
}

template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    fn(line, line_no);
    pos = end + 1;
  }
}

json parse_record(std::string_view line, const std::string& origin, std::size_t line_no) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(origin, line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!record.is_object()) throw DataError(origin, line_no, "record is not a JSON object");
  return record;
}

std::optional<Label> label_field(const std::optional<std::string>& raw, const std::string& origin, std::size_t line_no) {
  if (!raw || trim_ascii(*raw).empty()) return std::nullopt;
  auto label = collapse_raw_label(*raw);
  if (!label) throw DataError(origin, line_no, "unknown label \"" + *raw + "\"");
  return label;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json optional_to_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string_view to_string(Label label) { return label == Label::True ? "true" : "false"; }

Label parse_label(std::string_view s) {
  const std::string lowered = lower_ascii(trim_ascii(s));
  if (lowered == "true") return Label::True;
  if (lowered == "false") return Label::False;
  throw DataError("invalid label \"" + std::string(s) + "\"");
}

std::optional<Label> collapse_raw_label(std::string_view raw) {
  std::string key = lower_ascii(trim_ascii(raw));
  std::replace(key.begin(), key.end(), '_', '-');
  std::replace(key.begin(), key.end(), ' ', '-');
  if (key == "pants-fire" || key == "pants-on-fire" || key == "false" || key == "barely-true") return Label::False;
  if (key == "half-true" || key == "mostly-true" || key == "true") return Label::True;
  return std::nullopt;
}

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::Scholarly: return "scholarly";
    case SourceKind::News: return "news";
    case SourceKind::Web: return "web";
    case SourceKind::Unknown: break;
  }
  return "unknown";
}

std::optional<SourceKind> parse_source_kind(std::string_view s) {
  const std::string key = lower_ascii(trim_ascii(s));
  if (key == "scholarly") return SourceKind::Scholarly;
  if (key == "news") return SourceKind::News;
  if (key == "web") return SourceKind::Web;
  if (key == "unknown" || key.empty()) return SourceKind::Unknown;
  return std::nullopt;
}

std::optional<ClaimFormat> parse_claim_format(std::string_view s) {
  const std::string key = lower_ascii(trim_ascii(s));
  if (key == "jsonl") return ClaimFormat::Jsonl;
  if (key == "tsv") return ClaimFormat::Tsv;
  return std::nullopt;
}

ClaimFormat claim_format_for(const std::filesystem::path& path) {
  return lower_ascii(path.extension().string()) == ".tsv" ? ClaimFormat::Tsv : ClaimFormat::Jsonl;
}

LabelCounts count_labels(const std::vector<Claim>& claims) {
  LabelCounts counts;
  for (const Claim& c : claims) {
    if (!c.label) ++counts.unlabeled;
    else if (*c.label == Label::True) ++counts.true_count;
    else ++counts.false_count;
  }
  return counts;
}

std::vector<Claim> parse_claims_jsonl(std::string_view content, const std::string& origin) {
  std::vector<Claim> claims;
  std::unordered_set<std::string> seen;
  for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    if (trim_ascii(line).empty()) return;
    const json record = parse_record(line, origin, line_no);
    Claim claim;
    claim.id = required_id(record, "id", origin, line_no);
    claim.text = required_text(record, "claim", origin, line_no);
    claim.label = label_field(optional_string(record, "label", origin, line_no), origin, line_no);
    claim.speaker = optional_string(record, "speaker", origin, line_no);
    claim.domain = optional_string(record, "domain", origin, line_no);
    if (!seen.insert(claim.id).second) throw DataError(origin, line_no, "duplicate claim id \"" + claim.id + "\"");
    claims.push_back(std::move(claim));
  });
  return claims;
}

std::vector<Claim> parse_claims_tsv(std::string_view content, const std::string& origin) {
  static const std::vector<std::string> kHeader = {"id", "label", "claim", "speaker"};
  std::vector<Claim> claims;
  std::unordered_set<std::string> seen;
  bool header_seen = false;
  for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    if (trim_ascii(line).empty()) return;
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    if (!header_seen) {
      bool ok = fields.size() == kHeader.size() || fields.size() == kHeader.size() - 1;
      for (std::size_t i = 0; ok && i < fields.size(); ++i) ok = lower_ascii(trim_ascii(fields[i])) == kHeader[i];
      if (!ok) throw DataError(origin, line_no, "expected header row: id<TAB>label<TAB>claim<TAB>speaker");
      header_seen = true;
      return;
    }
    if (fields.size() < 3 || fields.size() > 4)
      throw DataError(origin, line_no, "expected 4 tab-separated columns, found " + std::to_string(fields.size()));
    Claim claim;
    claim.id = std::string(trim_ascii(fields[0]));
    if (claim.id.empty()) throw DataError(origin, line_no, "empty \"id\"");
    claim.label = label_field(std::string(fields[1]), origin, line_no);
    claim.text = std::string(fields[2]);
    if (trim_unicode(claim.text).empty()) throw DataError(origin, line_no, "empty \"claim\"");
    if (fields.size() == 4 && !trim_ascii(fields[3]).empty()) claim.speaker = std::string(fields[3]);
    if (!seen.insert(claim.id).second) throw DataError(origin, line_no, "duplicate claim id \"" + claim.id + "\"");
    claims.push_back(std::move(claim));
  });
  return claims;
}

std::vector<SourceDocument> parse_corpus_jsonl(std::string_view content, const std::string& origin) {
  std::vector<SourceDocument> docs;
  std::unordered_set<std::string> seen;
  for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    if (trim_ascii(line).empty()) return;
    const json record = parse_record(line, origin, line_no);
    SourceDocument doc;
    doc.doc_id = required_id(record, "doc_id", origin, line_no);
    doc.text = required_text(record, "text", origin, line_no);
    if (auto kind = optional_string(record, "source_kind", origin, line_no)) {
      auto parsed = parse_source_kind(*kind);
      if (!parsed) throw DataError(origin, line_no, "unknown source_kind \"" + *kind + "\"");
      doc.source_kind = *parsed;
    }
    doc.speaker = optional_string(record, "speaker", origin, line_no);
    if (!seen.insert(doc.doc_id).second) throw DataError(origin, line_no, "duplicate doc_id \"" + doc.doc_id + "\"");
    docs.push_back(std::move(doc));
  });
  return docs;
}

std::vector<Claim> load_claims(const std::filesystem::path& path, ClaimFormat format) {
  const std::string content = read_file(path);
  return format == ClaimFormat::Tsv ? parse_claims_tsv(content, path.string()) : parse_claims_jsonl(content, path.string());
}

std::vector<SourceDocument> load_corpus(const std::filesystem::path& path) {
  return parse_corpus_jsonl(read_file(path), path.string());
}

json to_json(const Claim& claim) {
  return json{{"id", claim.id},
              {"claim", claim.text},
              {"label", claim.label ? json(std::string(to_string(*claim.label))) : json(nullptr)},
              {"speaker", optional_to_json(claim.speaker)},
              {"domain", optional_to_json(claim.domain)}};
}

json to_json(const SourceDocument& doc) {
  return json{{"doc_id", doc.doc_id},
              {"text", doc.text},
              {"source_kind", std::string(to_string(doc.source_kind))},
              {"speaker", optional_to_json(doc.speaker)}};
}

json to_json(const SentenceUnit& sentence) {
  return json{{"doc_id", sentence.doc_id},
              {"sent_index", sentence.sent_index},
              {"text", sentence.text},
              {"speaker", optional_to_json(sentence.speaker)}};
}

SentenceUnit sentence_from_json(const json& j) {
  SentenceUnit s;
  s.doc_id = j.at("doc_id").get<std::string>();
  s.sent_index = j.at("sent_index").get<std::size_t>();
  s.text = j.at("text").get<std::string>();
  if (j.contains("speaker") && !j.at("speaker").is_null()) s.speaker = j.at("speaker").get<std::string>();
  return s;
}

std::string claims_to_jsonl(const std::vector<Claim>& claims) {
  std::string out;
  for (const Claim& c : claims) out += to_json(c).dump() + '\n';
  return out;
}

std::string corpus_to_jsonl(const std::vector<SourceDocument>& docs) {
  std::string out;
  for (const SourceDocument& d : docs) out += to_json(d).dump() + '\n';
  return out;
}

const std::vector<std::string>& sentence_abbreviations() {
  static const std::vector<std::string> kAbbreviations = {
      "Dr.",   "Mr.",   "Mrs.",  "Ms.",   "Prof.", "Sr.",   "Jr.",   "St.",   "Mt.",   "Gen.",   "Gov.",
      "Sen.",  "Rep.",  "Rev.",  "Capt.", "Lt.",   "Col.",  "Sgt.",  "U.S.",  "U.K.",  "U.N.",   "E.U.",
      "D.C.",  "e.g.",  "i.e.",  "et al.", "etc.", "vs.",   "cf.",   "approx.", "Inc.", "Ltd.",  "Co.",
      "Corp.", "No.",   "Fig.",  "Figs.", "Eq.",   "Vol.",  "pp.",   "Jan.",  "Feb.",  "Mar.",   "Apr.",
      "Jun.",  "Jul.",  "Aug.",  "Sep.",  "Sept.", "Oct.",  "Nov.",  "Dec.",  "a.m.",  "p.m.",
  };
  return kAbbreviations;
}

std::vector<SentenceUnit> segment_sentences(const SourceDocument& doc) {
  const std::string_view text = doc.text;
  std::vector<SentenceUnit> out;
  auto emit = [&](std::size_t begin, std::size_t end) {
    const std::string_view piece = trim_unicode(text.substr(begin, end - begin));
    if (piece.empty()) return;
    out.push_back(SentenceUnit{doc.doc_id, out.size(), std::string(piece), doc.speaker});
  };

  std::size_t start = skip_space(text, 0);
  std::size_t i = start;
  while (i < text.size()) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    const std::size_t mark = i;
    std::size_t j = i + 1;
    while (j < text.size() && is_terminal(text[j])) ++j;
    std::size_t length = 0;
    while (j < text.size() && is_closer(decode_at(text, j, length))) j += length;

    if (j < text.size() && is_space_at(text, j, length)) {
      std::size_t next = skip_space(text, j);
      std::size_t probe = next;
      while (probe < text.size() && is_opener(decode_at(text, probe, length))) probe += length;
      const bool capital = probe < text.size() && u_isupper(static_cast<UChar32>(decode_at(text, probe, length)));
      const bool abbreviation =
          text[mark] == '.' && j == mark + 1 && ends_with_abbreviation(text.substr(start, mark + 1 - start));
      if (capital && !abbreviation) {
        emit(start, j);
        start = next;
        i = next;
        continue;
      }
    }
    i = j;
  }
  emit(start, text.size());
  return out;
}

std::vector<SentenceUnit> segment_corpus(const std::vector<SourceDocument>& docs) {
  std::vector<SentenceUnit> all;
  for (const SourceDocument& doc : docs) {
    auto sentences = segment_sentences(doc);
    all.insert(all.end(), std::make_move_iterator(sentences.begin()), std::make_move_iterator(sentences.end()));
  }
  return all;
}

}  // namespace debunk
