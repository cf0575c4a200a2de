#include "debunk/external_scorer.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <sstream>

#include "debunk/error.hpp"

namespace debunk {

using nlohmann::json;

namespace {

void write_all(int fd, const std::string& data, bool socket) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = socket ? ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL)
                             : ::write(fd, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(std::string("bridge write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string read_line(int fd, std::string& buffer) {
  for (;;) {
    if (const auto nl = buffer.find('\n'); nl != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(std::string("bridge read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw BridgeError("bridge closed the connection");
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

SubprocessTransport::SubprocessTransport(std::vector<std::string> argv) {
  if (argv.empty()) throw ConfigError("bridge command is empty");
  // Writes to a dead child must surface as EPIPE, not kill the process.
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) throw BridgeError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw BridgeError(std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<char*> args;
  for (std::string& a : argv) args.push_back(a.data());
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) throw BridgeError(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

SubprocessTransport::~SubprocessTransport() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    // Closing stdin asks the bridge to exit; give it a moment, then insist.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      ::usleep(10000);
    }
    ::kill(pid_, SIGTERM);
    ::waitpid(pid_, &status, 0);
  }
}

std::string SubprocessTransport::exchange(const std::string& request) {
  write_all(to_child_, request + '\n', false);
  return read_line(from_child_, buffer_);
}

TcpTransport::TcpTransport(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result); rc != 0)
    throw BridgeError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  std::string last_error = "no address";
  for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(result);
  if (fd_ < 0) throw BridgeError("cannot connect to " + host + ":" + service + ": " + last_error);
}

TcpTransport::~TcpTransport() {
  if (fd_ >= 0) ::close(fd_);
}

std::string TcpTransport::exchange(const std::string& request) {
  write_all(fd_, request + '\n', true);
  return read_line(fd_, buffer_);
}

std::string RecordingTransport::exchange(const std::string& request) {
  std::string response = inner_->exchange(request);
  transcript_.push_back(Exchange{request, response});
  return response;
}

std::string RecordingTransport::requests_jsonl() const {
  std::string out;
  for (const Exchange& e : transcript_) out += e.request + '\n';
  return out;
}

std::unique_ptr<Transport> connect_bridge(std::string_view address) {
  constexpr std::string_view kTcp = "tcp://";
  constexpr std::string_view kExec = "exec:";
  if (address.substr(0, kTcp.size()) == kTcp) {
    const std::string_view rest = address.substr(kTcp.size());
    const auto colon = rest.rfind(':');
    if (colon == std::string_view::npos || colon == 0) throw ConfigError("bridge address needs host:port");
    const std::string port_text(rest.substr(colon + 1));
    int port = 0;
    try {
      port = std::stoi(port_text);
    } catch (const std::exception&) {
      throw ConfigError("invalid bridge port \"" + port_text + "\"");
    }
    if (port <= 0 || port > 65535) throw ConfigError("invalid bridge port \"" + port_text + "\"");
    std::string host(rest.substr(0, colon));
    if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    return std::make_unique<TcpTransport>(host, static_cast<std::uint16_t>(port));
  }
  if (address.substr(0, kExec.size()) == kExec) {
    std::istringstream words{std::string(address.substr(kExec.size()))};
    std::vector<std::string> argv;
    for (std::string w; words >> w;) argv.push_back(w);
    return std::make_unique<SubprocessTransport>(std::move(argv));
  }
  throw ConfigError("unsupported bridge address \"" + std::string(address) + "\" (use tcp://host:port or exec:command)");
}

ExternalScorer::ExternalScorer(std::unique_ptr<Transport> transport) : transport_(std::move(transport)) {
  if (!transport_) throw std::invalid_argument("ExternalScorer needs a transport");
}

json ExternalScorer::call(const json& request) const {
  const std::string line = transport_->exchange(dump_line(request));
  json response;
  try {
    response = json::parse(line);
  } catch (const json::parse_error&) {
    throw BridgeError("malformed bridge response: " + line);
  }
  if (!response.is_object() || !response.contains("ok") || !response.at("ok").is_boolean())
    throw BridgeError("malformed bridge response: " + line);
  if (!response.at("ok").get<bool>()) {
    const auto it = response.find("error");
    throw BridgeError("bridge error: " + (it != response.end() && it->is_string() ? it->get<std::string>() : line));
  }
  return response;
}

bool ExternalScorer::grounded() const {
  std::lock_guard lock(mutex_);
  return grounded_;
}

void ExternalScorer::ground(std::span<const std::string> evidence, const GroundingConfig& cfg) {
  cfg.validate();
  if (evidence.empty()) throw DataError("cannot ground on an empty evidence list");
  std::lock_guard lock(mutex_);
  grounded_ = false;
  ack_.reset();
  const json request{{"op", "ground"},
                     {"evidence", std::vector<std::string>(evidence.begin(), evidence.end())},
                     {"epochs", cfg.epochs},
                     {"learning_rate", cfg.learning_rate}};
  ack_ = call(request);
  grounded_ = true;
}

double ExternalScorer::perplexity(std::string_view text) const {
  std::lock_guard lock(mutex_);
  if (!grounded_) throw NotGroundedError();
  const json response = call(json{{"op", "score"}, {"text", std::string(text)}});
  const auto it = response.find("ppl");
  if (it == response.end() || !it->is_number()) throw BridgeError("bridge score response lacks \"ppl\"");
  const double ppl = it->get<double>();
  if (!std::isfinite(ppl) || ppl <= 0.0) throw BridgeError("bridge returned invalid perplexity " + it->dump());
  return ppl;
}

double ExternalScorer::sequence_log_prob(const TokenSequence&) const {
  if (!grounded()) throw NotGroundedError();
  throw Error("the external scorer reports perplexity only");
}

void ExternalScorer::reset() {
  std::lock_guard lock(mutex_);
  call(json{{"op", "reset"}});
  grounded_ = false;
  ack_.reset();
}

std::string ExternalScorer::perplexity_unit() const {
  std::lock_guard lock(mutex_);
  if (ack_ && ack_->contains("unit") && ack_->at("unit").is_string()) return ack_->at("unit").get<std::string>();
  return "unknown";
}

std::optional<json> ExternalScorer::ground_acknowledgment() const {
  std::lock_guard lock(mutex_);
  return ack_;
}

}  // namespace debunk
