#include "synth/oracle.hpp"

#include <cmath>
#include <map>

#include "synth/subprocess_oracle.hpp"

namespace synth {

namespace {

// Convenience view over one call's arguments.
struct Call {
  const std::vector<Value>& a;
  std::vector<std::optional<BufferData>>& b;

  int64_t i(size_t k) const { return a[k].scalar.i; }
  double f(size_t k) const { return a[k].scalar.f; }
  BufferData& buf(size_t k) const {
    if (k >= b.size() || !b[k]) throw OracleError("missing buffer argument");
    return *b[k];
  }
  // Loop bound guard: every builtin that iterates to an argument checks it
  // against the buffer it walks, so a bad sampling config fails loudly
  // instead of reading out of range.
  static void bound(int64_t n, const BufferData& d) {
    if (n < 0 || static_cast<size_t>(n) > d.len())
      throw OracleError("loop bound exceeds buffer length");
  }
};

using Body = std::function<std::optional<Value>(Call&)>;

struct Builtin {
  const char* decl;
  Body body;
};

int64_t first_zero(const BufferData& s) {
  for (size_t i = 0; i < s.len(); ++i)
    if (s.cells[i].i == 0) return static_cast<int64_t>(i);
  throw OracleError("char buffer has no terminator");
}

const std::map<std::string, Builtin>& registry() {
  static const std::map<std::string, Builtin> table = {
      {"dot",
       {"float f(float* a, float* b, int c)",
        [](Call& c) {
          auto &a = c.buf(0), &b = c.buf(1);
          Call::bound(c.i(2), a);
          Call::bound(c.i(2), b);
          double acc = 0.0;
          for (int64_t i = 0; i < c.i(2); ++i) acc += a.cells[i].f * b.cells[i].f;
          return Value::of_float(acc);
        }}},
      {"scale",
       {"void scale(int* in, int* out, int n)",
        [](Call& c) -> std::optional<Value> {
          auto &in = c.buf(0), &out = c.buf(1);
          Call::bound(c.i(2), in);
          Call::bound(c.i(2), out);
          for (int64_t i = 0; i < c.i(2); ++i) out.cells[i].i = 2 * in.cells[i].i;
          return std::nullopt;
        }}},
      {"identity",
       {"int id(int x)", [](Call& c) { return Value::of_int(c.i(0)); }}},
      {"fact",
       {"int fact(int n)",
        [](Call& c) {
          int64_t r = 1;
          for (int64_t k = 1; k <= c.i(0); ++k) r *= k;
          return Value::of_int(r);
        }}},
      {"tri",
       {"int tri(int n)",
        [](Call& c) {
          int64_t r = 0;
          for (int64_t k = 1; k <= c.i(0); ++k) r += k;
          return Value::of_int(r);
        }}},
      {"sum",
       {"int sum(int* a, int n)",
        [](Call& c) {
          auto& a = c.buf(0);
          Call::bound(c.i(1), a);
          int64_t r = 0;
          for (int64_t i = 0; i < c.i(1); ++i) r += a.cells[i].i;
          return Value::of_int(r);
        }}},
      {"amax",
       {"int amax(int* a, int n)",
        [](Call& c) {
          auto& a = c.buf(0);
          int64_t n = c.i(1);
          Call::bound(n, a);
          if (n < 1) throw OracleError("amax needs n >= 1");
          int64_t r = a.cells[0].i;
          for (int64_t i = 1; i < n; ++i)
            if (a.cells[i].i > r) r = a.cells[i].i;
          return Value::of_int(r);
        }}},
      {"ceq",
       {"int ceq(int* a, int* b, int n)",
        [](Call& c) {
          auto &a = c.buf(0), &b = c.buf(1);
          Call::bound(c.i(2), a);
          Call::bound(c.i(2), b);
          int64_t r = 0;
          for (int64_t i = 0; i < c.i(2); ++i) r += a.cells[i].i == b.cells[i].i;
          return Value::of_int(r);
        }}},
      {"last",
       {"int last(int* a, int n)",
        [](Call& c) {
          auto& a = c.buf(0);
          int64_t n = c.i(1);
          Call::bound(n, a);
          if (n < 1) throw OracleError("last needs n >= 1");
          return Value::of_int(a.cells[n - 1].i);
        }}},
      {"mfirst",
       {"void mfirst(int* a, int n)",
        [](Call& c) -> std::optional<Value> {
          auto& a = c.buf(0);
          int64_t n = c.i(1);
          Call::bound(n, a);
          if (n < 1) throw OracleError("mfirst needs n >= 1");
          int64_t head = a.cells[0].i;
          for (int64_t i = 0; i < n; ++i) a.cells[i].i = head;
          return std::nullopt;
        }}},
      {"incr",
       {"void incr(int* x, int n)",
        [](Call& c) -> std::optional<Value> {
          auto& x = c.buf(0);
          Call::bound(c.i(1), x);
          for (int64_t i = 0; i < c.i(1); ++i) x.cells[i].i += 1;
          return std::nullopt;
        }}},
      {"copy",
       {"void copy(int* dst, int* src, int n)",
        [](Call& c) -> std::optional<Value> {
          auto &dst = c.buf(0), &src = c.buf(1);
          Call::bound(c.i(2), dst);
          Call::bound(c.i(2), src);
          for (int64_t i = 0; i < c.i(2); ++i) dst.cells[i].i = src.cells[i].i;
          return std::nullopt;
        }}},
      {"slen",
       {"int slen(char* s)",
        [](Call& c) { return Value::of_int(first_zero(c.buf(0))); }}},
      {"scopy",
       {"void scopy(char* dst, char* src)",
        [](Call& c) -> std::optional<Value> {
          auto &dst = c.buf(0), &src = c.buf(1);
          int64_t n = first_zero(src);
          if (static_cast<size_t>(n) > dst.len())
            throw OracleError("destination too short");
          for (int64_t i = 0; i < n; ++i) dst.cells[i].i = src.cells[i].i;
          return std::nullopt;
        }}},
      {"cntc",
       {"int cntc(char* s, char c)",
        [](Call& c) {
          auto& s = c.buf(0);
          int64_t n = first_zero(s), want = c.i(1), r = 0;
          for (int64_t i = 0; i < n; ++i) r += s.cells[i].i == want;
          return Value::of_int(r);
        }}},
      {"vscale",
       {"void vscale(float* out, float* a, float k, int n)",
        [](Call& c) -> std::optional<Value> {
          auto &out = c.buf(0), &a = c.buf(1);
          Call::bound(c.i(3), out);
          Call::bound(c.i(3), a);
          for (int64_t i = 0; i < c.i(3); ++i) out.cells[i].f = a.cells[i].f * c.f(2);
          return std::nullopt;
        }}},
      {"vadd",
       {"void vadd(float* out, float* a, float* b, int n)",
        [](Call& c) -> std::optional<Value> {
          auto &out = c.buf(0), &a = c.buf(1), &b = c.buf(2);
          Call::bound(c.i(3), out);
          Call::bound(c.i(3), a);
          Call::bound(c.i(3), b);
          for (int64_t i = 0; i < c.i(3); ++i) out.cells[i].f = a.cells[i].f + b.cells[i].f;
          return std::nullopt;
        }}},
      {"vmul",
       {"void vmul(float* out, float* a, float* b, int n)",
        [](Call& c) -> std::optional<Value> {
          auto &out = c.buf(0), &a = c.buf(1), &b = c.buf(2);
          Call::bound(c.i(3), out);
          Call::bound(c.i(3), a);
          Call::bound(c.i(3), b);
          for (int64_t i = 0; i < c.i(3); ++i) out.cells[i].f = a.cells[i].f * b.cells[i].f;
          return std::nullopt;
        }}},
      {"saxpy",
       {"void saxpy(float* y, float* x, float a, int n)",
        [](Call& c) -> std::optional<Value> {
          auto &y = c.buf(0), &x = c.buf(1);
          Call::bound(c.i(3), y);
          Call::bound(c.i(3), x);
          for (int64_t i = 0; i < c.i(3); ++i)
            y.cells[i].f = c.f(2) * x.cells[i].f + y.cells[i].f;
          return std::nullopt;
        }}},
      {"matvec",
       {"void mv(float* y, float* A, float* x, int m)",
        [](Call& c) -> std::optional<Value> {
          auto &y = c.buf(0), &A = c.buf(1), &x = c.buf(2);
          int64_t m = c.i(3);
          Call::bound(m, y);
          Call::bound(m, x);
          Call::bound(m * m, A);
          for (int64_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int64_t j = 0; j < m; ++j) acc += A.cells[i * m + j].f * x.cells[j].f;
            y.cells[i].f = acc;
          }
          return std::nullopt;
        }}},
      {"energy",
       {"float energy(float* a, int n)",
        [](Call& c) {
          auto& a = c.buf(0);
          Call::bound(c.i(1), a);
          double acc = 0.0;
          for (int64_t i = 0; i < c.i(1); ++i) acc += a.cells[i].f * a.cells[i].f;
          return Value::of_float(acc);
        }}},
      {"fir",
       {"void fir(float* y, float* x, float* h, int n, int k)",
        [](Call& c) -> std::optional<Value> {
          auto &y = c.buf(0), &x = c.buf(1), &h = c.buf(2);
          int64_t n = c.i(3), k = c.i(4);
          Call::bound(n, y);
          Call::bound(k, h);
          Call::bound(n - 1 + k, x);
          for (int64_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int64_t j = 0; j < k; ++j) acc += x.cells[i + j].f * h.cells[j].f;
            y.cells[i].f = acc;
          }
          return std::nullopt;
        }}},
  };
  return table;
}

class BuiltinOracle : public Oracle {
 public:
  BuiltinOracle(Signature sig, Body body) : sig_(std::move(sig)), body_(std::move(body)) {}
  const Signature& signature() const override { return sig_; }
  OracleResult evaluate(const std::vector<Value>& args,
                        std::vector<std::optional<BufferData>> bufs) override {
    if (args.size() != sig_.params.size()) throw OracleError("argument count mismatch");
    Call call{args, bufs};
    OracleResult r;
    r.ret = body_(call);
    r.bufs = std::move(bufs);
    return r;
  }

 private:
  Signature sig_;
  Body body_;
};

// Returns a different int on every call; exists so tests can exercise the
// nondeterminism guard in spec construction.
class NondetOracle : public Oracle {
 public:
  NondetOracle() : sig_(parse_signature("int nd(int x)")) {}
  const Signature& signature() const override { return sig_; }
  OracleResult evaluate(const std::vector<Value>&,
                        std::vector<std::optional<BufferData>> bufs) override {
    OracleResult r;
    r.ret = Value::of_int(counter_++);
    r.bufs = std::move(bufs);
    return r;
  }

 private:
  Signature sig_;
  int64_t counter_ = 0;
};

}  // namespace

std::unique_ptr<Oracle> make_builtin_oracle(const std::string& name) {
  if (name == "nondet") return std::make_unique<NondetOracle>();
  auto it = registry().find(name);
  if (it == registry().end()) throw OracleError("unknown builtin oracle: '" + name + "'");
  return std::make_unique<BuiltinOracle>(parse_signature(it->second.decl), it->second.body);
}

std::vector<std::string> builtin_oracle_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

std::unique_ptr<Oracle> make_oracle(const std::string& id, const std::optional<Signature>& sig) {
  if (id.rfind("builtin:", 0) == 0) return make_builtin_oracle(id.substr(8));
  if (id.rfind("proc:", 0) == 0) {
    if (!sig) throw OracleError("proc: oracles need an explicit signature");
    return make_subprocess_oracle(id.substr(5), *sig);
  }
  throw OracleError("unrecognized oracle id: '" + id + "' (want builtin:... or proc:...)");
}

}  // namespace synth
