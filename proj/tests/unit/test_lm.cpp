#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "debunk/error.hpp"
#include "debunk/lm.hpp"
#include "debunk/ngram.hpp"
#include "fixtures.hpp"
#include "kn_oracle.hpp"

using namespace debunk;

namespace {

// p(x_i | x_<i) read from a table by position.
class TableModel final : public ConditionalModel {
 public:
  explicit TableModel(std::vector<double> p) : p_(std::move(p)) {}
  double log_prob(std::span<const std::string> history, const std::string&) const override {
    return std::log(p_.at(history.size()));
  }

 private:
  std::vector<double> p_;
};

TokenSequence words(std::size_t n) {
  TokenSequence seq;
  for (std::size_t i = 0; i < n; ++i) seq.tokens.push_back("w" + std::to_string(i));
  return seq;
}

GroundingConfig order(int n, Smoothing s = Smoothing::KneserNey) {
  GroundingConfig cfg;
  cfg.ngram_order = n;
  cfg.smoothing = s;
  return cfg;
}

const std::vector<std::string> kEvidence = {
    "The virus spreads through droplets.",
    "The virus spreads in crowded rooms.",
    "Masks reduce the spread of the virus.",
    "Vaccines reduce severe illness.",
    "The vaccine reduces severe illness in older adults.",
    "Crowded rooms increase the spread.",
};

}  // namespace

TEST_CASE("perplexity arithmetic") {
  // Two tokens with probabilities 0.1 and 0.2: (0.02)^(-1/2) = sqrt(50).
  CHECK(perplexity(TableModel({0.1, 0.2}), words(2)) == doctest::Approx(std::sqrt(50.0)).epsilon(1e-12));
  CHECK(perplexity(TableModel({0.5, 0.5, 0.5, 0.5}), words(4)) == doctest::Approx(2.0).epsilon(1e-12));
  for (std::size_t v : {1, 2, 7, 50, 1000}) CHECK(perplexity(UniformModel(v), words(9)) == doctest::Approx(v).epsilon(1e-12));
  CHECK_THROWS_AS(perplexity_from_log_prob(-1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(UniformModel(0), std::invalid_argument);
}

TEST_CASE("log form equals the product form on random fixtures") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> prob(1e-4, 1.0);
  std::uniform_int_distribution<std::size_t> len(1, 60);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(len(rng));
    for (double& x : p) x = prob(rng);
    long double product = 1.0L;
    for (double x : p) product *= x;
    const double expected = static_cast<double>(std::pow(product, -1.0L / static_cast<long double>(p.size())));
    CHECK(perplexity(TableModel(p), words(p.size())) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("tokenize") {
  CHECK(tokenize("Masks work.").tokens == std::vector<std::string>{"masks", "work", "."});
  CHECK_THROWS_AS(tokenize("  "), DataError);
}

TEST_CASE("hand-worked bigram model on 'the cat sat'") {
  NgramScorer lm;
  lm.ground(std::vector<std::string>{"the cat sat"}, order(2));
  CHECK(lm.vocabulary_size() == 4);
  // Every count is 1 at both orders, so both fall back to add-k (k = 0.1).
  CHECK(lm.discount(1) < 0);
  CHECK(lm.discount(2) < 0);

  const double p1 = 1.1 / 3.4;
  const double p2 = (1.0 + 0.4 * p1) / 1.4;
  const std::vector<std::string> h_the = {"the"};
  CHECK(lm.probability({}, "the") == doctest::Approx(p2).epsilon(1e-12));
  CHECK(lm.probability(h_the, "cat") == doctest::Approx(p2).epsilon(1e-12));
  CHECK(lm.probability(h_the, "sat") == doctest::Approx(0.4 * p1 / 1.4).epsilon(1e-12));
  CHECK(lm.probability(h_the, "dog") == doctest::Approx(0.4 * (0.1 / 3.4) / 1.4).epsilon(1e-12));
  CHECK(lm.perplexity("the cat sat") == doctest::Approx(1.0 / p2).epsilon(1e-12));
  CHECK(lm.perplexity("the cat sat") == doctest::Approx(1.2396).epsilon(1e-4));
  CHECK(perplexity(UniformModel(lm.vocabulary_size()), tokenize("the cat sat")) == doctest::Approx(4.0));
}

TEST_CASE("conditional probabilities sum to one") {
  for (Smoothing s : {Smoothing::KneserNey, Smoothing::AddK}) {
    for (int n : {1, 2, 3, 4}) {
      NgramScorer lm;
      lm.ground(kEvidence, order(n, s));
      const auto vocab = lm.vocabulary();
      for (const std::vector<std::string>& h : std::vector<std::vector<std::string>>{
               {}, {"the"}, {"the", "virus"}, {"reduce", "the"}, {"unseen", "words"}, {"spread", "."}}) {
        double sum = 0.0;
        for (const std::string& w : vocab) sum += lm.probability(h, w);
        CAPTURE(n);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("matches the reference Kneser-Ney recursion") {
  std::vector<std::string> evidence = kEvidence;
  for (const auto& s : fixtures::synthetic_sentences(80, 5)) evidence.push_back(s.text);
  for (int n : {1, 2, 3}) {
    NgramScorer lm;
    lm.ground(evidence, order(n));
    const oracles::KneserNeyOracle oracle(evidence, n, 0.1);
    for (int m = 1; m <= n; ++m) CHECK(lm.discount(m) == doctest::Approx(oracle.discount(m)));
    for (const auto& s : fixtures::synthetic_sentences(20, 77)) {
      const auto tokens = text::lm_tokens(s.text);
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::vector<std::string> h(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(i));
        CHECK(lm.probability(h, tokens[i]) == doctest::Approx(oracle.probability(h, tokens[i])).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("kneser-ney discounts come from count-of-counts") {
  NgramScorer lm;
  lm.ground(kEvidence, order(3));
  for (int m = 1; m <= 3; ++m) {
    const double d = lm.discount(m);
    CHECK((d < 0 || (d > 0 && d < 1)));
  }
  CHECK_THROWS_AS(lm.discount(4), std::out_of_range);
}

TEST_CASE("unknown words and start markers") {
  NgramScorer lm;
  lm.ground(kEvidence, order(3));
  const auto vocab = lm.vocabulary();
  CHECK(std::find(vocab.begin(), vocab.end(), "<unk>") != vocab.end());
  CHECK(std::find(vocab.begin(), vocab.end(), "<s>") == vocab.end());
  // An unseen word and the literal start marker both score as <unk>.
  CHECK(lm.probability({}, "zebra") == doctest::Approx(lm.probability({}, "<unk>")));
  CHECK(lm.probability({}, "<s>") == doctest::Approx(lm.probability({}, "<unk>")));
  CHECK(lm.perplexity("The virus spreads through droplets.") < lm.perplexity("The zebra spreads through droplets."));
}

TEST_CASE("grounding lowers perplexity of in-domain text versus shuffled text") {
  const auto sentences = fixtures::synthetic_sentences(200, 11);
  std::vector<std::string> evidence;
  for (const auto& s : sentences) evidence.push_back(s.text);
  NgramScorer lm;
  lm.ground(evidence, GroundingConfig{});
  std::mt19937_64 rng(3);
  double in = 0.0, shuffled = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    auto tokens = text::lm_tokens(evidence[i]);
    in += lm.perplexity(evidence[i]);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    shuffled += perplexity(lm, TokenSequence{tokens});
  }
  CHECK(in < shuffled);
}

TEST_CASE("scorer lifecycle") {
  NgramScorer lm;
  CHECK_FALSE(lm.grounded());
  CHECK(lm.kind() == ScorerKind::Ngram);
  CHECK(lm.perplexity_unit() == "word");
  CHECK_THROWS_AS(lm.perplexity("text"), NotGroundedError);
  CHECK_THROWS_WITH(lm.perplexity("text"), "scorer not grounded");
  CHECK_THROWS_AS(lm.ground(std::vector<std::string>{}, GroundingConfig{}), DataError);
  CHECK_THROWS_AS(lm.ground(std::vector<std::string>{"", "  \t"}, order(2)), DataError);
  lm.ground(kEvidence, order(2));
  CHECK(lm.grounded());
  const double before = lm.perplexity("Masks reduce the spread.");
  lm.ground(std::vector<std::string>{"completely different words here"}, order(2));
  CHECK(lm.perplexity("Masks reduce the spread.") != doctest::Approx(before));
  lm.reset();
  CHECK_FALSE(lm.grounded());
  CHECK_THROWS_AS(lm.vocabulary(), NotGroundedError);
}

TEST_CASE("grounding config") {
  GroundingConfig cfg;
  CHECK(cfg.epochs == 5);
  CHECK(cfg.learning_rate == doctest::Approx(5e-5));
  CHECK(std::find(kExploredEpochs.begin(), kExploredEpochs.end(), cfg.epochs) != kExploredEpochs.end());
  cfg.epochs = 7;
  CHECK_NOTHROW(cfg.validate());
  cfg.ngram_order = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = GroundingConfig{};
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  GroundingConfig custom;
  custom.epochs = 10;
  custom.smoothing = Smoothing::AddK;
  custom.add_k = 0.5;
  CHECK(grounding_config_from_json(to_json(custom)) == custom);
  CHECK_THROWS_AS(grounding_config_from_json({{"smoothing", "witten_bell"}}), ConfigError);
  CHECK(parse_smoothing("add_k") == Smoothing::AddK);
  CHECK(parse_scorer_kind("external") == ScorerKind::External);
  CHECK_THROWS_AS(parse_scorer_kind("gpt"), ConfigError);
}
