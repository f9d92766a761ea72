#include "synth/subprocess_oracle.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <mutex>

#include <nlohmann/json.hpp>

namespace synth {

namespace {

using nlohmann::json;

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

json encode_args(const Signature& sig, const std::vector<Value>& args,
                 const std::vector<std::optional<BufferData>>& bufs) {
  json arr = json::array();
  for (size_t k = 0; k < args.size(); ++k) {
    const Value& v = args[k];
    switch (v.kind) {
      case Value::Kind::Char:
        arr.push_back({{"kind", "char"}, {"v", v.scalar.i}});
        break;
      case Value::Kind::Int:
        arr.push_back({{"kind", "int"}, {"v", v.scalar.i}});
        break;
      case Value::Kind::Float:
        arr.push_back({{"kind", "float"}, {"v", v.scalar.f}});
        break;
      case Value::Kind::Buf: {
        const BufferData& d = *bufs[k];
        json data = json::array();
        for (const Word& w : d.cells)
          data.push_back(d.elem == Scalar::Float ? json(w.f) : json(w.i));
        arr.push_back({{"kind", "buf"}, {"elem", to_string(d.elem)}, {"data", std::move(data)}});
        break;
      }
    }
  }
  (void)sig;
  return json{{"args", std::move(arr)}};
}

class SubprocessOracle : public Oracle {
 public:
  SubprocessOracle(std::string cmd, Signature sig, int timeout_ms)
      : cmd_(std::move(cmd)), sig_(std::move(sig)), timeout_ms_(timeout_ms) {
    ignore_sigpipe_once();
    spawn();
  }

  ~SubprocessOracle() override { shutdown(); }

  const Signature& signature() const override { return sig_; }

  OracleResult evaluate(const std::vector<Value>& args,
                        std::vector<std::optional<BufferData>> bufs) override {
    if (pid_ < 0) throw OracleError("oracle process is not running");
    std::string line = encode_args(sig_, args, bufs).dump();
    line += '\n';
    write_all(line);
    std::string reply = read_line();

    json j;
    try {
      j = json::parse(reply);
    } catch (const json::exception& e) {
      throw OracleError(std::string("malformed oracle response: ") + e.what());
    }
    return decode(j, std::move(bufs));
  }

 private:
  OracleResult decode(const json& j, std::vector<std::optional<BufferData>> bufs) {
    OracleResult r;
    if (!j.contains("ret")) throw OracleError("oracle response lacks 'ret'");
    if (!j["ret"].is_null()) {
      const json& rv = j["ret"];
      std::string kind = rv.at("kind").get<std::string>();
      if (kind == "int")
        r.ret = Value::of_int(rv.at("v").get<int64_t>());
      else if (kind == "char")
        r.ret = Value::of_char(rv.at("v").get<int64_t>());
      else if (kind == "float")
        r.ret = Value::of_float(rv.at("v").get<double>());
      else
        throw OracleError("oracle returned unknown value kind '" + kind + "'");
    }
    size_t next = 0;
    const json& jb = j.contains("bufs") ? j["bufs"] : json::array();
    for (size_t k = 0; k < sig_.params.size(); ++k) {
      if (!is_pointer(sig_.params[k].type)) continue;
      if (next >= jb.size()) throw OracleError("oracle response is missing buffers");
      const json& cells = jb[next++];
      BufferData& d = *bufs[k];
      if (cells.size() != d.len())
        throw OracleError("oracle changed a buffer's length");
      for (size_t i = 0; i < d.len(); ++i) {
        if (d.elem == Scalar::Float)
          d.cells[i].f = cells[i].get<double>();
        else
          d.cells[i].i = cells[i].get<int64_t>();
      }
    }
    r.bufs = std::move(bufs);
    return r;
  }

  void spawn() {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
      throw OracleError("failed to create oracle pipes");
    pid_ = fork();
    if (pid_ < 0) throw OracleError("failed to fork oracle process");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", cmd_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    stdin_fd_ = to_child[1];
    stdout_fd_ = from_child[0];
  }

  void shutdown() {
    if (stdin_fd_ >= 0) close(stdin_fd_);
    if (stdout_fd_ >= 0) close(stdout_fd_);
    stdin_fd_ = stdout_fd_ = -1;
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      int status = 0;
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  void write_all(const std::string& s) {
    size_t off = 0;
    while (off < s.size()) {
      ssize_t n = write(stdin_fd_, s.data() + off, s.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail_exited("oracle process closed its input");
      }
      off += static_cast<size_t>(n);
    }
  }

  std::string read_line() {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
    for (;;) {
      size_t nl = rbuf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = rbuf_.substr(0, nl);
        rbuf_.erase(0, nl + 1);
        return line;
      }
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                      deadline - std::chrono::steady_clock::now())
                      .count();
      if (left <= 0) {
        shutdown();
        throw OracleError("oracle response timed out");
      }
      struct pollfd pfd{stdout_fd_, POLLIN, 0};
      int pr = poll(&pfd, 1, static_cast<int>(left));
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw OracleError("poll on oracle pipe failed");
      }
      if (pr == 0) continue;
      char chunk[4096];
      ssize_t n = read(stdout_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw OracleError("read from oracle pipe failed");
      }
      if (n == 0) fail_exited("oracle process exited mid-response");
      rbuf_.append(chunk, static_cast<size_t>(n));
    }
  }

  [[noreturn]] void fail_exited(const char* what) {
    int status = 0;
    pid_t p = pid_;
    pid_ = -1;
    if (p > 0) waitpid(p, &status, WNOHANG);
    if (stdin_fd_ >= 0) close(stdin_fd_);
    if (stdout_fd_ >= 0) close(stdout_fd_);
    stdin_fd_ = stdout_fd_ = -1;
    std::string msg = what;
    if (WIFEXITED(status)) msg += " (exit code " + std::to_string(WEXITSTATUS(status)) + ")";
    throw OracleError(msg);
  }

  std::string cmd_;
  Signature sig_;
  int timeout_ms_;
  pid_t pid_ = -1;
  int stdin_fd_ = -1, stdout_fd_ = -1;
  std::string rbuf_;
};

}  // namespace

std::unique_ptr<Oracle> make_subprocess_oracle(const std::string& command, Signature sig,
                                               int timeout_ms) {
  return std::make_unique<SubprocessOracle>(command, std::move(sig), timeout_ms);
}

}  // namespace synth
