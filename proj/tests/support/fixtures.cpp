#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "debunk/error.hpp"

namespace fixtures {

using debunk::Claim;
using debunk::Label;
using debunk::ScoredCandidate;
using debunk::SentenceUnit;
using debunk::SourceDocument;
using debunk::SourceKind;
using nlohmann::json;

namespace {

const std::vector<std::string>& synthetic_vocabulary() {
  static const std::vector<std::string> words = [] {
    const std::vector<std::string> stems = {"virus", "mask", "trial", "dose",  "lung",   "cell",  "study", "risk",
                                            "fever", "test", "case",  "ward",  "nurse",  "drug",  "spike", "serum",
                                            "wave",  "city", "school", "court", "senate", "vote", "tax",   "budget",
                                            "coal",  "wind", "river", "farm",  "price",  "wage"};
    std::vector<std::string> out;
    for (const std::string& s : stems) {
      out.push_back(s);
      out.push_back(s + "s");
      out.push_back(s + "ing");
    }
    out.insert(out.end(), {"the", "a", "of", "in", "and", "to", "was", "is", "for", "on"});
    return out;
  }();
  return words;
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

}  // namespace

std::vector<SentenceUnit> synthetic_sentences(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& vocab = synthetic_vocabulary();
  std::vector<SentenceUnit> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t length = 4 + pick(rng, 12);
    std::string text;
    for (std::size_t w = 0; w < length; ++w) {
      if (w) text += ' ';
      text += vocab[pick(rng, vocab.size())];
    }
    text += '.';
    out.push_back(SentenceUnit{"doc" + std::to_string(i / 5), i % 5, text, std::nullopt});
  }
  return out;
}

std::vector<std::string> synthetic_queries(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  const auto& vocab = synthetic_vocabulary();
  const std::vector<std::string> unseen = {"zebra", "quasar", "tundra"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t length = 2 + pick(rng, 6);
    std::string text;
    for (std::size_t w = 0; w < length; ++w) {
      if (w) text += ' ';
      text += pick(rng, 8) == 0 ? unseen[pick(rng, unseen.size())] : vocab[pick(rng, vocab.size())];
    }
    out.push_back(text);
  }
  return out;
}

SeparationDataset separation_dataset() {
  struct Fact {
    std::string evidence;    // corpus sentence stating the fact
    std::string support;     // second corpus sentence on the same topic
    std::string true_claim;  // restates the fact
    std::string false_claim; // swaps a key entity
  };
  const std::vector<Fact> facts = {
      {"Researchers reported that the virus spreads mainly through respiratory droplets.",
       "Respiratory droplets carry the virus between people in close contact.",
       "The virus spreads mainly through respiratory droplets.",
       "The virus spreads mainly through contaminated banknotes."},
      {"The clinical trial showed that the vaccine prevents severe illness in older adults.",
       "Older adults who received the vaccine had fewer hospital admissions.",
       "The vaccine prevents severe illness in older adults.",
       "The vaccine prevents severe baldness in older adults."},
      {"Health officials confirmed that surgical masks reduce transmission in crowded indoor spaces.",
       "Crowded indoor spaces increase transmission when ventilation is poor.",
       "Surgical masks reduce transmission in crowded indoor spaces.",
       "Surgical masks reduce intelligence in crowded indoor spaces."},
      {"The study found that hand washing with soap removes the virus from skin.",
       "Soap dissolves the lipid envelope of the virus.",
       "Hand washing with soap removes the virus from skin.",
       "Hand washing with bleach removes the virus from skin."},
      {"Doctors noted that fever and dry cough are common early symptoms of infection.",
       "Early symptoms of infection also include fatigue and loss of smell.",
       "Fever and dry cough are common early symptoms of infection.",
       "Fever and purple toenails are common early symptoms of infection."},
      {"Laboratory data indicate that the incubation period usually lasts about five days.",
       "Symptoms usually appear about five days after exposure.",
       "The incubation period usually lasts about five days.",
       "The incubation period usually lasts about nine months."},
      {"Hospital records show that dexamethasone lowers mortality in patients on ventilators.",
       "Patients on ventilators benefit most from dexamethasone treatment.",
       "Dexamethasone lowers mortality in patients on ventilators.",
       "Garlic lowers mortality in patients on ventilators."},
      {"Epidemiologists estimate that the virus survives on plastic surfaces for up to three days.",
       "Plastic surfaces should be cleaned regularly in shared offices.",
       "The virus survives on plastic surfaces for up to three days.",
       "The virus survives on plastic surfaces for up to eleven decades."},
      {"Engineers reported that portable air filters lower the concentration of airborne particles indoors.",
       "Airborne particles accumulate indoors without ventilation.",
       "Portable air filters lower the concentration of airborne particles indoors.",
       "Portable microwave ovens lower the concentration of airborne particles indoors."},
      {"The survey showed that children rarely develop severe disease after infection.",
       "Severe disease after infection is more common in elderly patients.",
       "Children rarely develop severe disease after infection.",
       "Hamsters rarely develop severe disease after infection."},
  };

  SeparationDataset ds;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const Fact& f = facts[i];
    SourceDocument doc;
    doc.doc_id = "article-" + std::to_string(i);
    doc.text = f.evidence + " " + f.support;
    doc.source_kind = SourceKind::Scholarly;
    ds.corpus.push_back(doc);

    ds.claims.push_back(Claim{"t" + std::to_string(i), f.true_claim, Label::True, std::nullopt, "science"});
    ds.claims.push_back(Claim{"f" + std::to_string(i), f.false_claim, Label::False, std::nullopt, "science"});
  }
  SourceDocument noise;
  noise.doc_id = "news-0";
  noise.text = "Heavy rain is expected across the region this weekend. Farmers welcomed the forecast.";
  noise.source_kind = SourceKind::News;
  ds.corpus.push_back(noise);
  return ds;
}

std::vector<FilterCase> filter_cases() {
  auto candidate = [](std::string doc, std::size_t idx, std::string text, double score,
                      std::optional<std::string> speaker = std::nullopt) {
    return ScoredCandidate{SentenceUnit{std::move(doc), idx, std::move(text), std::move(speaker)}, score};
  };
  const Claim politician{"p1", "Wind turbines cause cancer in nearby residents.", Label::False, "Jane Doe", "politics"};
  const Claim science{"s1", "Vitamin D prevents infection.", Label::False, std::nullopt, "science"};
  const Claim question_claim{"q1", "Is the new budget balanced?", Label::True, "Senate Office", "politics"};

  return {
      // R1: low-credibility source.
      {politician, candidate("d1", 0, "According to a social media post, wind turbines cause cancer.", 0.9), "R1"},
      {politician, candidate("d1", 1, "A Facebook post claimed turbines are dangerous.", 0.8), "R1"},
      {science, candidate("d2", 0, "An internet meme says vitamin D cures everything.", 0.7), "R1"},
      {science, candidate("d2", 1, "The viral post about vitamin D was shared widely.", 0.6), "R1"},
      {science, candidate("d2", 2, "A forwarded message urged people to take vitamin D.", 0.5), "R1"},
      {politician, candidate("d1", 2, "One WhatsApp message warned about turbine noise.", 0.4), "R1"},
      // R2: the claim's own speaker.
      {politician, candidate("d3", 0, "Jane Doe said wind turbines cause cancer.", 0.9), "R2"},
      {politician, candidate("d3", 1, "Turbines are a health risk.", 0.5, "Jane Doe"), "R2"},
      {politician, candidate("d3", 2, "Doe claimed the turbines were harmful.", 0.3), ""},
      {politician, candidate("d3", 3, "JANE DOE tweeted that turbines cause cancer.", 0.6), "R2"},
      {question_claim, candidate("d4", 0, "The Senate Office stated the budget is balanced.", 0.7), "R2"},
      // R3: restatement of the claim.
      {politician, candidate("d5", 0, "Wind turbines cause cancer in nearby residents.", 1.0), "R3"},
      {politician, candidate("d5", 1, "  wind turbines CAUSE cancer in nearby residents!  ", 0.99), "R3"},
      {science, candidate("d5", 2, "\"Vitamin D prevents infection.\"", 0.95), "R3"},
      {science, candidate("d5", 3, "Vitamin D prevents infection in mice.", 0.8), ""},
      // R4: reciprocal questions.
      {science, candidate("d6", 0, "Does vitamin D prevent infection?", 0.8), "R4"},
      {politician, candidate("d6", 1, "Can wind turbines really cause cancer?\"", 0.7), "R4"},
      {question_claim, candidate("d6", 2, "Is the new budget balanced?", 0.9), "R3"},
      {question_claim, candidate("d6", 3, "Who wrote the new budget?)", 0.5), "R4"},
      // Kept.
      {politician, candidate("d7", 0, "A large cohort study found no link between wind turbines and cancer.", 0.6), ""},
      {science, candidate("d7", 1, "Trials showed vitamin D did not prevent respiratory infection.", 0.55), ""},
      {question_claim, candidate("d7", 2, "The budget office reported a small deficit.", 0.4), ""},
      {politician, candidate("d7", 3, "Social media users debated turbine safety.", 0.35), ""},
      {science, candidate("d7", 4, "Researchers asked whether vitamin D helps.", 0.3), ""},
  };
}

void write_separation_files(const std::filesystem::path& dir) {
  const SeparationDataset ds = separation_dataset();
  std::filesystem::create_directories(dir);
  write_file(dir / "claims.jsonl", debunk::claims_to_jsonl(ds.claims));
  write_file(dir / "corpus.jsonl", debunk::corpus_to_jsonl(ds.corpus));
}

TempDir::TempDir(const std::string& prefix) {
  std::random_device rd;
  const std::filesystem::path base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::filesystem::path candidate = base / (prefix + "-" + std::to_string(rd()));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json FakeBridge::handle(const json& request) {
  try {
    const std::string op = request.at("op").get<std::string>();
    if (op == "ground") {
      debunk::GroundingConfig cfg;
      cfg.epochs = request.value("epochs", 1);
      cfg.learning_rate = request.value("learning_rate", 5e-5);
      const auto evidence = request.at("evidence").get<std::vector<std::string>>();
      scorer_.ground(evidence, cfg);
      return json{{"ok", true}, {"unit", "word"}, {"model", "fake-ngram"}, {"sequences", evidence.size()}};
    }
    if (op == "score") {
      const std::string text = request.at("text").get<std::string>();
      if (text == "__fail__") return json{{"ok", false}, {"error", "requested failure"}};
      return json{{"ok", true}, {"ppl", scorer_.perplexity(text)}};
    }
    if (op == "reset") {
      scorer_.reset();
      return json{{"ok", true}};
    }
    return json{{"ok", false}, {"error", "unknown op " + op}};
  } catch (const std::exception& e) {
    return json{{"ok", false}, {"error", e.what()}};
  }
}

}  // namespace fixtures
