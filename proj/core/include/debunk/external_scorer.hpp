#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "debunk/lm.hpp"

namespace debunk {

/// A line-oriented, request/response channel to a scorer bridge. One request
/// line in, one response line out.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Sends `request` (without trailing newline) and returns the next response
  /// line. Throws BridgeError on I/O failure or a closed peer.
  virtual std::string exchange(const std::string& request) = 0;
};

/// Launches the bridge as a child process and talks over its stdin/stdout.
class SubprocessTransport final : public Transport {
 public:
  explicit SubprocessTransport(std::vector<std::string> argv);
  ~SubprocessTransport() override;
  SubprocessTransport(const SubprocessTransport&) = delete;
  SubprocessTransport& operator=(const SubprocessTransport&) = delete;

  std::string exchange(const std::string& request) override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

class TcpTransport final : public Transport {
 public:
  TcpTransport(const std::string& host, std::uint16_t port);
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  std::string exchange(const std::string& request) override;

 private:
  int fd_ = -1;
  std::string buffer_;
};

/// Wraps another transport and keeps every exchanged line.
class RecordingTransport final : public Transport {
 public:
  struct Exchange {
    std::string request;
    std::string response;
  };

  explicit RecordingTransport(std::unique_ptr<Transport> inner) : inner_(std::move(inner)) {}
  std::string exchange(const std::string& request) override;
  const std::vector<Exchange>& transcript() const { return transcript_; }

  /// Requests only, one per line: the replayable form of the transcript.
  std::string requests_jsonl() const;

 private:
  std::unique_ptr<Transport> inner_;
  std::vector<Exchange> transcript_;
};

/// Parses "tcp://host:port" or "exec:program arg ..." (arguments split on
/// whitespace). Throws ConfigError on anything else.
std::unique_ptr<Transport> connect_bridge(std::string_view address);

/// Client for the newline-delimited JSON scorer protocol:
///   {"op":"ground","evidence":[...],"epochs":N,"learning_rate":X} -> {"ok":true}
///   {"op":"score","text":S}                                     -> {"ok":true,"ppl":X}
///   {"op":"reset"}                                              -> {"ok":true}
/// Failures arrive as {"ok":false,"error":S} and surface as BridgeError.
/// Requests are serialized, so one client may be shared across threads.
class ExternalScorer final : public Scorer {
 public:
  explicit ExternalScorer(std::unique_ptr<Transport> transport);

  ScorerKind kind() const override { return ScorerKind::External; }
  bool grounded() const override;
  void ground(std::span<const std::string> evidence, const GroundingConfig& cfg) override;
  double perplexity(std::string_view text) const override;
  double sequence_log_prob(const TokenSequence& seq) const override;
  void reset() override;
  /// As declared in the ground acknowledgment ("unit"); "unknown" otherwise.
  std::string perplexity_unit() const override;

  /// The full ground acknowledgment payload, once grounded.
  std::optional<nlohmann::json> ground_acknowledgment() const;

 private:
  nlohmann::json call(const nlohmann::json& request) const;

  mutable std::mutex mutex_;
  std::unique_ptr<Transport> transport_;
  bool grounded_ = false;
  std::optional<nlohmann::json> ack_;
};

}  // namespace debunk
