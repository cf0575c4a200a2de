#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <deque>
#include <thread>

#include "debunk/error.hpp"
#include "debunk/external_scorer.hpp"
#include "debunk/ngram.hpp"
#include "fixtures.hpp"

using namespace debunk;
using nlohmann::json;

namespace {

// Replies from a fixed script and remembers the requests.
class ScriptedTransport final : public Transport {
 public:
  explicit ScriptedTransport(std::deque<std::string> replies) : replies_(std::move(replies)) {}
  std::string exchange(const std::string& request) override {
    requests.push_back(request);
    if (replies_.empty()) throw BridgeError("bridge closed the connection");
    std::string r = replies_.front();
    replies_.pop_front();
    return r;
  }
  std::vector<std::string> requests;

 private:
  std::deque<std::string> replies_;
};

// Serves the fake bridge on a loopback port for one connection.
class LoopbackServer {
 public:
  LoopbackServer() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    REQUIRE(::listen(listen_fd_, 1) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { serve(); });
  }
  ~LoopbackServer() {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    thread_.join();
  }
  std::uint16_t port() const { return port_; }

 private:
  void serve() {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) return;
    fixtures::FakeBridge bridge;
    std::string buffer;
    char chunk[4096];
    for (;;) {
      const ssize_t n = ::read(fd, chunk, sizeof chunk);
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      for (auto nl = buffer.find('\n'); nl != std::string::npos; nl = buffer.find('\n')) {
        const std::string reply = bridge.handle(json::parse(buffer.substr(0, nl))).dump() + '\n';
        buffer.erase(0, nl + 1);
        ::send(fd, reply.data(), reply.size(), MSG_NOSIGNAL);
      }
    }
    ::close(fd);
  }

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::thread thread_;
};

const std::vector<std::string> kEvidence = {"The virus spreads through droplets.", "Masks reduce the spread.",
                                            "Vaccines prevent severe illness."};

void check_round_trip(ExternalScorer& scorer) {
  CHECK_FALSE(scorer.grounded());
  CHECK_THROWS_AS(scorer.perplexity("Masks work."), NotGroundedError);
  scorer.ground(kEvidence, GroundingConfig{});
  CHECK(scorer.grounded());
  CHECK(scorer.perplexity_unit() == "word");

  NgramScorer local;
  local.ground(kEvidence, GroundingConfig{});
  for (const char* text : {"Masks reduce the spread.", "Garlic cures the virus."})
    CHECK(scorer.perplexity(text) == doctest::Approx(local.perplexity(text)).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(scorer.perplexity("__fail__"), "bridge error: requested failure", BridgeError);
  scorer.reset();
  CHECK_FALSE(scorer.grounded());
}

}  // namespace

TEST_CASE("subprocess bridge round trip") {
  ExternalScorer scorer(connect_bridge(std::string("exec:") + DEBUNK_FAKE_BRIDGE));
  check_round_trip(scorer);
}

TEST_CASE("tcp bridge round trip") {
  LoopbackServer server;
  ExternalScorer scorer(connect_bridge("tcp://127.0.0.1:" + std::to_string(server.port())));
  check_round_trip(scorer);
}

TEST_CASE("requests follow the wire schema; transcript is kept") {
  auto recording = std::make_unique<RecordingTransport>(std::make_unique<SubprocessTransport>(
      std::vector<std::string>{DEBUNK_FAKE_BRIDGE}));
  RecordingTransport* transcript = recording.get();
  {
    ExternalScorer scorer(std::move(recording));
    GroundingConfig cfg;
    cfg.epochs = 2;
    scorer.ground(kEvidence, cfg);
    scorer.perplexity("Masks reduce the spread.");
    scorer.reset();
    CHECK(scorer.ground_acknowledgment() == std::nullopt);

    const auto& lines = transcript->transcript();
    REQUIRE(lines.size() == 3);
    const json ground = json::parse(lines[0].request);
    CHECK(ground == json{{"op", "ground"}, {"evidence", kEvidence}, {"epochs", 2}, {"learning_rate", 5e-5}});
    CHECK(json::parse(lines[1].request) == json{{"op", "score"}, {"text", "Masks reduce the spread."}});
    CHECK(json::parse(lines[2].request) == json{{"op", "reset"}});
    for (const auto& e : lines) {
      const json response = json::parse(e.response);
      CHECK(response.at("ok") == true);
    }
    CHECK(json::parse(lines[1].response).at("ppl").is_number());

    const std::string jsonl = transcript->requests_jsonl();
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 3);
    fixtures::write_file(DEBUNK_TRANSCRIPT_PATH, jsonl);
  }
}

TEST_CASE("bridge failures surface as BridgeError") {
  SUBCASE("error response") {
    ExternalScorer s(std::make_unique<ScriptedTransport>(std::deque<std::string>{R"({"ok":false,"error":"oom"})"}));
    CHECK_THROWS_WITH_AS(s.ground(kEvidence, GroundingConfig{}), "bridge error: oom", BridgeError);
    CHECK_FALSE(s.grounded());
  }
  SUBCASE("malformed responses") {
    ExternalScorer s(std::make_unique<ScriptedTransport>(std::deque<std::string>{
        R"({"ok":true,"unit":"subword"})", "not json", R"({"ppl":3})", R"({"ok":true})", R"({"ok":true,"ppl":-1})",
        R"({"ok":true,"ppl":"7"})"}));
    s.ground(kEvidence, GroundingConfig{});
    CHECK(s.perplexity_unit() == "subword");
    CHECK(s.ground_acknowledgment()->at("unit") == "subword");
    CHECK_THROWS_AS(s.perplexity("a"), BridgeError);
    CHECK_THROWS_AS(s.perplexity("a"), BridgeError);
    CHECK_THROWS_WITH_AS(s.perplexity("a"), "bridge score response lacks \"ppl\"", BridgeError);
    CHECK_THROWS_AS(s.perplexity("a"), BridgeError);
    CHECK_THROWS_AS(s.perplexity("a"), BridgeError);
    CHECK_THROWS_WITH_AS(s.perplexity("a"), "bridge closed the connection", BridgeError);
  }
  SUBCASE("ack without unit") {
    ExternalScorer s(std::make_unique<ScriptedTransport>(std::deque<std::string>{R"({"ok":true})"}));
    s.ground(kEvidence, GroundingConfig{});
    CHECK(s.perplexity_unit() == "unknown");
    CHECK_THROWS_AS(s.sequence_log_prob(tokenize("a b")), Error);
  }
  SUBCASE("missing program") {
    ExternalScorer s(connect_bridge("exec:/nonexistent/bridge --flag"));
    CHECK_THROWS_AS(s.ground(kEvidence, GroundingConfig{}), BridgeError);
  }
  SUBCASE("refused connection") {
    int port = 0;
    {
      LoopbackServer server;  // grab a free port, then release it
      port = server.port();
      ExternalScorer s(connect_bridge("tcp://127.0.0.1:" + std::to_string(port)));
    }
    CHECK_THROWS_AS(connect_bridge("tcp://127.0.0.1:" + std::to_string(port)), BridgeError);
  }
  SUBCASE("empty evidence is a data error") {
    ExternalScorer s(std::make_unique<ScriptedTransport>(std::deque<std::string>{}));
    CHECK_THROWS_AS(s.ground(std::vector<std::string>{}, GroundingConfig{}), DataError);
  }
}

TEST_CASE("fake bridge rejects scoring before grounding") {
  fixtures::FakeBridge bridge;
  CHECK(bridge.handle({{"op", "score"}, {"text", "x"}}) == json{{"ok", false}, {"error", "scorer not grounded"}});
  CHECK(bridge.handle({{"op", "dance"}}).at("ok") == false);
}

TEST_CASE("bridge addresses") {
  CHECK_THROWS_AS(connect_bridge("http://x"), ConfigError);
  CHECK_THROWS_AS(connect_bridge("tcp://hostonly"), ConfigError);
  CHECK_THROWS_AS(connect_bridge("tcp://h:99999"), ConfigError);
  CHECK_THROWS_AS(connect_bridge("tcp://h:abc"), ConfigError);
  CHECK_THROWS_AS(connect_bridge("exec:"), ConfigError);
}

TEST_CASE("concurrent callers share one connection") {
  ExternalScorer scorer(connect_bridge(std::string("exec:") + DEBUNK_FAKE_BRIDGE));
  scorer.ground(kEvidence, GroundingConfig{});
  const double expected = scorer.perplexity("Masks reduce the spread.");
  std::atomic<int> mismatches = 0;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < 25; ++i)
        if (scorer.perplexity("Masks reduce the spread.") != expected) ++mismatches;
    });
  for (auto& t : threads) t.join();
  CHECK(mismatches == 0);
}
