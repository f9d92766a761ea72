#include "synth/interp.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "synth/spec.hpp"

namespace synth::interp {

using namespace synth::ir;

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Done: return "done";
    case Outcome::OutOfBounds: return "out-of-bounds";
    case Outcome::DivByZero: return "div-by-zero";
    case Outcome::StepLimit: return "step-limit";
  }
  return "?";
}

void CandidateView::reset(const ir::Function& f) {
  fn = &f;
  fills.resize(f.holes.size());
  for (auto& v : fills) v.clear();
  redirect.resize(f.num_values());
  for (uint32_t i = 0; i < redirect.size(); ++i) redirect[i] = i;
  pending_vals.assign(f.pending.size(), kNoOperand);
  ph_scratch.resize(f.placeholders.size());
  for (auto& v : ph_scratch) v.clear();
}

void ExecEnv::load(const Signature& sig, const Example& ex, uint32_t min_alloc) {
  const size_t np = sig.params.size();
  if (bufs.size() != np) {
    bufs.assign(np, {});
    logical.assign(np, 0);
    alloc.assign(np, 0);
    elem.assign(np, Scalar::Char);
    args.assign(np, word_i(0));
  }
  for (size_t p = 0; p < np; ++p) {
    if (!is_pointer(sig.params[p].type)) {
      logical[p] = alloc[p] = 0;
      args[p] = ex.inputs[p].scalar;
      continue;
    }
    const BufferData& src = *ex.in_bufs[p];
    uint32_t n = static_cast<uint32_t>(src.len());
    uint32_t a = std::max(min_alloc, n);
    logical[p] = n;
    alloc[p] = a;
    elem[p] = src.elem;
    args[p] = word_i(static_cast<int64_t>(p));
    bufs[p].assign(a, word_i(0));
    std::memcpy(bufs[p].data(), src.cells.data(), n * sizeof(Word));
  }
}

namespace {

inline int64_t wrap_add(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}
inline int64_t wrap_sub(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}
inline int64_t wrap_mul(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

inline int64_t clamp_f2i(double v) {
  if (std::isnan(v)) return 0;
  if (v >= 9.2233720368547758e18) return std::numeric_limits<int64_t>::max();
  if (v <= -9.2233720368547758e18) return std::numeric_limits<int64_t>::min();
  return static_cast<int64_t>(v);
}

struct Machine {
  const CandidateView& view;
  const Function& fn;
  ExecEnv& env;
  uint64_t steps = 0;
  Outcome fault = Outcome::Done;

  Machine(const CandidateView& v, ExecEnv& e) : view(v), fn(*v.fn), env(e) {}

  Word read(uint32_t o) const {
    if (is_pending_ref(o)) o = view.pending_vals[ref_index(o)];
    if (is_const_ref(o)) return fn.consts[ref_index(o)].w;
    uint32_t r = view.redirect[ref_index(o)];
    if (is_const_ref(r)) return fn.consts[ref_index(r)].w;
    return env.regs[ref_index(r)];
  }

  bool exec(const Instr& ins) {
    ++steps;
    Word out = word_i(0);
    switch (ins.op) {
      case Op::Add: out = word_i(wrap_add(read(ins.a).i, read(ins.b).i)); break;
      case Op::Sub: out = word_i(wrap_sub(read(ins.a).i, read(ins.b).i)); break;
      case Op::Mul: out = word_i(wrap_mul(read(ins.a).i, read(ins.b).i)); break;
      case Op::SDiv: {
        int64_t a = read(ins.a).i, b = read(ins.b).i;
        if (b == 0) {
          fault = Outcome::DivByZero;
          return false;
        }
        if (a == std::numeric_limits<int64_t>::min() && b == -1)
          out = word_i(a);
        else
          out = word_i(a / b);
        break;
      }
      case Op::FAdd: out = word_f(read(ins.a).f + read(ins.b).f); break;
      case Op::FSub: out = word_f(read(ins.a).f - read(ins.b).f); break;
      case Op::FMul: out = word_f(read(ins.a).f * read(ins.b).f); break;
      case Op::FDiv: out = word_f(read(ins.a).f / read(ins.b).f); break;
      case Op::ICmpEq: out = word_i(read(ins.a).i == read(ins.b).i); break;
      case Op::ICmpNe: out = word_i(read(ins.a).i != read(ins.b).i); break;
      case Op::ICmpSlt: out = word_i(read(ins.a).i < read(ins.b).i); break;
      case Op::ICmpSle: out = word_i(read(ins.a).i <= read(ins.b).i); break;
      case Op::ICmpSgt: out = word_i(read(ins.a).i > read(ins.b).i); break;
      case Op::ICmpSge: out = word_i(read(ins.a).i >= read(ins.b).i); break;
      case Op::FCmpEq: out = word_i(read(ins.a).f == read(ins.b).f); break;
      case Op::FCmpNe: out = word_i(read(ins.a).f != read(ins.b).f); break;
      case Op::FCmpLt: out = word_i(read(ins.a).f < read(ins.b).f); break;
      case Op::FCmpLe: out = word_i(read(ins.a).f <= read(ins.b).f); break;
      case Op::FCmpGt: out = word_i(read(ins.a).f > read(ins.b).f); break;
      case Op::FCmpGe: out = word_i(read(ins.a).f >= read(ins.b).f); break;
      case Op::Select: out = read(ins.a).i != 0 ? read(ins.b) : read(ins.c); break;
      case Op::SIToFP: out = word_f(static_cast<double>(read(ins.a).i)); break;
      case Op::FPToSI: out = word_i(clamp_f2i(read(ins.a).f)); break;
      case Op::Load: {
        uint32_t p = static_cast<uint32_t>(read(ins.a).i);
        int64_t idx = read(ins.b).i;
        if (idx < 0 || idx >= static_cast<int64_t>(env.alloc[p])) {
          fault = Outcome::OutOfBounds;
          return false;
        }
        out = env.bufs[p][idx];
        break;
      }
      case Op::Store: {
        uint32_t p = static_cast<uint32_t>(read(ins.b).i);
        int64_t idx = read(ins.c).i;
        if (idx < 0 || idx >= static_cast<int64_t>(env.alloc[p])) {
          fault = Outcome::OutOfBounds;
          return false;
        }
        Word v = read(ins.a);
        if (env.elem[p] == Scalar::Char) v = word_i(v.i & 0xff);
        env.bufs[p][idx] = v;
        return true;
      }
      default:
        return true;
    }
    if (ins.result != kNoOperand) env.regs[ins.result] = out;
    return true;
  }
};

}  // namespace

RunResult run(const CandidateView& view, ExecEnv& env) {
  const Function& fn = *view.fn;
  RunResult res;

  env.regs.assign(fn.num_values(), word_i(0));
  for (uint32_t p = 0; p < fn.sig.params.size(); ++p) env.regs[p] = env.args[p];
  Machine m(view, env);

  uint32_t cur = 0;
  uint32_t prev = kNoOperand;
  while (true) {
    const Block& blk = fn.blocks[cur];

    if (!blk.phis.empty()) {
      env.phi_buf.resize(blk.phis.size());
      for (size_t k = 0; k < blk.phis.size(); ++k) {
        const Instr& phi = blk.phis[k];
        uint32_t o = phi.x == prev ? phi.a : phi.b;
        env.phi_buf[k] = m.read(o);
        ++m.steps;
      }
      for (size_t k = 0; k < blk.phis.size(); ++k)
        env.regs[blk.phis[k].result] = env.phi_buf[k];
    }

    for (const auto& seg : blk.body) {
      const std::vector<Instr>& code = seg.is_hole ? view.fills[seg.hole_id] : seg.code;
      for (const auto& ins : code)
        if (!m.exec(ins)) return {m.fault, false, word_i(0)};
    }
    for (uint32_t ph : blk.anchored)
      for (const auto& ins : view.ph_scratch[ph])
        if (!m.exec(ins)) return {m.fault, false, word_i(0)};
    for (const auto& ins : blk.stores)
      if (!m.exec(ins)) return {m.fault, false, word_i(0)};

    if (m.steps > env.step_limit) return {Outcome::StepLimit, false, word_i(0)};

    const Instr& t = blk.term;
    ++m.steps;
    if (t.op == Op::Ret) {
      if (t.a != kNoOperand) {
        res.has_ret = true;
        res.ret = m.read(t.a);
        if (fn.sig.ret == RetType::Char) res.ret = word_i(res.ret.i & 0xff);
      }
      res.outcome = Outcome::Done;
      return res;
    }
    prev = cur;
    cur = t.op == Op::Br ? t.x : (m.read(t.a).i != 0 ? t.x : t.y);
  }
}

RunResult run_function(const ir::Function& fn, ExecEnv& env) {
  CandidateView v;
  v.reset(fn);
  return run(v, env);
}

bool matches(const Signature& sig, const Example& ex, const RunResult& res, const ExecEnv& env,
             double float_tol) {
  if (res.outcome != Outcome::Done) return false;
  if (sig.ret != RetType::Void) {
    if (!res.has_ret || !ex.returned.has_value()) return false;
    const Value& want = *ex.returned;
    if (sig.ret == RetType::Float) {
      if (!float_close(want.scalar.f, res.ret.f, float_tol)) return false;
    } else {
      if (want.scalar.i != res.ret.i) return false;
    }
  }
  for (size_t p = 0; p < sig.params.size(); ++p) {
    if (!is_pointer(sig.params[p].type)) continue;
    const BufferData& want = *ex.out_bufs[p];
    if (env.logical[p] < want.len()) return false;
    bool isf = want.elem == Scalar::Float;
    for (size_t i = 0; i < want.len(); ++i) {
      if (isf) {
        if (!float_close(want.cells[i].f, env.bufs[p][i].f, float_tol)) return false;
      } else {
        if (want.cells[i].i != env.bufs[p][i].i) return false;
      }
    }
  }
  return true;
}

}  // namespace synth::interp
