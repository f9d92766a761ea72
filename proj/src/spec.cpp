#include "synth/spec.hpp"

#include <cmath>

namespace synth {

namespace {

int64_t draw_int(std::mt19937_64& rng, const IntInterval& iv) {
  if (iv.lo > iv.hi) throw SpecError("empty sampling interval");
  return std::uniform_int_distribution<int64_t>(iv.lo, iv.hi)(rng);
}

double draw_float(std::mt19937_64& rng, const FloatInterval& iv) {
  if (iv.lo > iv.hi) throw SpecError("empty sampling interval");
  return std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
}

BufferData draw_buffer(std::mt19937_64& rng, Scalar elem, int64_t len,
                       const SamplingConfig& cfg) {
  BufferData d;
  d.elem = elem;
  d.cells.resize(static_cast<size_t>(len));
  for (auto& w : d.cells) {
    switch (elem) {
      case Scalar::Char:
        w = word_i(draw_int(rng, cfg.char_range) & 0xff);
        break;
      case Scalar::Int:
        w = word_i(draw_int(rng, cfg.int_range));
        break;
      case Scalar::Float:
        w = word_f(draw_float(rng, cfg.float_range));
        break;
    }
  }
  if (elem == Scalar::Char && cfg.string_mode && len > 0) {
    int64_t pos = std::uniform_int_distribution<int64_t>(0, len - 1)(rng);
    d.cells[static_cast<size_t>(pos)] = word_i(0);
  }
  return d;
}

}  // namespace

SampledInputs sample_inputs(const Signature& sig, std::mt19937_64& rng,
                            const SamplingConfig& cfg) {
  SampledInputs out;
  out.bufs.resize(sig.params.size());
  int64_t len = draw_int(rng, cfg.buf_len);
  if (len < 1) throw SpecError("buffer length interval must stay positive");

  for (size_t k = 0; k < sig.params.size(); ++k) {
    const Param& p = sig.params[k];
    switch (p.type) {
      case ParamType::Char:
        out.args.push_back(Value::of_char(draw_int(rng, cfg.char_range)));
        break;
      case ParamType::Int:
        out.args.push_back(Value::of_int(draw_int(rng, cfg.int_range)));
        break;
      case ParamType::Float:
        out.args.push_back(Value::of_float(draw_float(rng, cfg.float_range)));
        break;
      default: {
        Scalar elem = pointee(p.type);
        out.bufs[k] = draw_buffer(rng, elem, len, cfg);
        out.args.push_back(
            Value::of_buf(static_cast<uint32_t>(k), elem, static_cast<uint32_t>(len)));
        break;
      }
    }
  }
  return out;
}

Example observe(Oracle& oracle, const SampledInputs& in) {
  Example ex;
  ex.inputs = in.args;
  ex.in_bufs = in.bufs;  // copy; the oracle gets its own
  OracleResult r = oracle.evaluate(in.args, in.bufs);
  ex.returned = r.ret;
  ex.out_bufs = std::move(r.bufs);

  const Signature& sig = oracle.signature();
  bool want_ret = sig.ret != RetType::Void;
  if (want_ret != ex.returned.has_value())
    throw OracleError("oracle return value does not match the signature");
  return ex;
}

ProblemSpec build_spec(Oracle& oracle, const SamplingConfig& cfg) {
  if (cfg.examples < 1) throw SpecError("example count must be at least 1");
  const Signature& sig = oracle.signature();
  if (!sig.observable()) throw SpecError("signature has no observable output");

  ProblemSpec spec;
  spec.sig = sig;
  spec.cfg = cfg;
  std::mt19937_64 rng(cfg.seed);

  for (int k = 0; k < cfg.examples; ++k) {
    SampledInputs in = sample_inputs(sig, rng, cfg);
    Example ex = observe(oracle, in);
    if (k == 0) {
      // Determinism spot check: the same inputs must reproduce the same
      // observation exactly.
      Example again = observe(oracle, in);
      bool same = ex.returned.has_value() == again.returned.has_value();
      if (same && ex.returned)
        same = ex.returned->kind == Value::Kind::Float
                   ? ex.returned->scalar.f == again.returned->scalar.f
                   : ex.returned->scalar.i == again.returned->scalar.i;
      for (size_t p = 0; same && p < ex.out_bufs.size(); ++p) {
        if (ex.out_bufs[p].has_value() != again.out_bufs[p].has_value())
          same = false;
        else if (ex.out_bufs[p] && !ex.out_bufs[p]->same_contents(*again.out_bufs[p]))
          same = false;
      }
      if (!same) throw SpecError("oracle is nondeterministic on repeated evaluation");
    }
    spec.examples.push_back(std::move(ex));
  }
  return spec;
}

bool float_close(double a, double b, double tol) {
  if (a == b) return true;
  // The relative test degenerates on non-finite values: |x - inf| <= tol*inf
  // holds for any finite x. A non-finite value only matches itself exactly.
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  double d = std::fabs(a - b);
  double m = std::max(std::fabs(a), std::fabs(b));
  if (d <= tol * m) return true;
  return m < 1e-6;
}

bool equivalent(const Signature& sig, const Example& expected,
                const std::optional<Value>& got_ret,
                const std::vector<std::optional<BufferData>>& got_bufs, double tol) {
  if (expected.returned.has_value() != got_ret.has_value()) return false;
  if (expected.returned) {
    const Value& e = *expected.returned;
    const Value& g = *got_ret;
    if (sig.ret == RetType::Float) {
      if (!float_close(e.scalar.f, g.scalar.f, tol)) return false;
    } else {
      if (e.scalar.i != g.scalar.i) return false;
    }
  }
  for (size_t k = 0; k < sig.params.size(); ++k) {
    if (!is_pointer(sig.params[k].type)) continue;
    if (k >= expected.out_bufs.size() || !expected.out_bufs[k]) return false;
    if (k >= got_bufs.size() || !got_bufs[k]) return false;
    const BufferData& e = *expected.out_bufs[k];
    const BufferData& g = *got_bufs[k];
    if (g.len() < e.len()) return false;
    for (size_t i = 0; i < e.len(); ++i) {
      if (e.elem == Scalar::Float) {
        if (!float_close(e.cells[i].f, g.cells[i].f, tol)) return false;
      } else {
        if (e.cells[i].i != g.cells[i].i) return false;
      }
    }
  }
  return true;
}

std::vector<uint32_t> detect_output_params(const ProblemSpec& spec) {
  std::vector<uint32_t> out;
  for (size_t k = 0; k < spec.sig.params.size(); ++k) {
    if (!is_pointer(spec.sig.params[k].type)) continue;
    for (const Example& ex : spec.examples) {
      if (ex.in_bufs[k] && ex.out_bufs[k] &&
          !ex.in_bufs[k]->same_contents(*ex.out_bufs[k])) {
        out.push_back(static_cast<uint32_t>(k));
        break;
      }
    }
  }
  return out;
}

}  // namespace synth
