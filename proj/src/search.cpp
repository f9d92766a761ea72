#include "synth/search.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <set>

#include "synth/render.hpp"

namespace synth {

using ir::Function;
using ir::Instr;
using ir::Op;
using ir::Ty;

const char* to_string(Status s) {
  switch (s) {
    case Status::Solved: return "solved";
    case Status::Exhausted: return "exhausted";
    case Status::Timeout: return "timeout";
  }
  return "?";
}

void add_pool_constants(ir::Function& fn, const SearchConfig& cfg) {
  for (int64_t v : cfg.constant_pool) {
    fn.add_const_i(v);
    fn.add_const_f(static_cast<double>(v));
  }
  for (int64_t v : cfg.placeholder_value_pool) {
    fn.add_const_i(v);
    fn.add_const_f(static_cast<double>(v));
  }
}

namespace {

uint32_t find_const_i(const Function& fn, int64_t v) {
  for (uint32_t i = 0; i < fn.consts.size(); ++i)
    if (fn.consts[i].ty == Ty::I64 && fn.consts[i].w.i == v) return ir::const_ref(i);
  return ir::kNoOperand;
}

uint32_t find_const_f(const Function& fn, double v) {
  for (uint32_t i = 0; i < fn.consts.size(); ++i)
    if (fn.consts[i].ty == Ty::F64 && fn.consts[i].w.f == v) return ir::const_ref(i);
  return ir::kNoOperand;
}

bool is_const_val_i(const Function& fn, uint32_t ref, int64_t v) {
  if (!ir::is_const_ref(ref)) return false;
  const ir::ConstVal& c = fn.consts[ir::ref_index(ref)];
  return c.ty == Ty::I64 && c.w.i == v;
}

bool is_const_val_f(const Function& fn, uint32_t ref, double v) {
  if (!ir::is_const_ref(ref)) return false;
  const ir::ConstVal& c = fn.consts[ir::ref_index(ref)];
  return c.ty == Ty::F64 && c.w.f == v;
}

// Per-hole enumeration inputs, fixed for the sketch's lifetime.
struct HoleCtx {
  uint32_t block = 0, segment = 0, id_base = 0;
  bool affine = false;
  // Unit budget. Every binding combination must consume the hole's final
  // value, so a hole that reaches no accumulator slot, store, or return
  // gets no units at all: enumerating it would visit the whole fill
  // product and bind none of it.
  int cap = 0;
  std::vector<uint32_t> ints, floats;  // usable operands, newest def first, consts last
  std::vector<uint32_t> inds;          // live induction counters, outermost first
  // loads already present in segments before the hole: (pointer vid, index ref)
  std::vector<std::pair<uint32_t, uint32_t>> prior_loads;
};

struct Ctx {
  const Function* fn = nullptr;
  const SearchConfig* cfg = nullptr;
  ir::DomTree dt;
  std::vector<HoleCtx> holes;
  std::vector<uint32_t> def_block;  // per value id
  std::vector<uint32_t> ptr_params, int_params;
  std::vector<uint32_t> pool_ints, pool_floats;  // binding constants, pool order
  uint32_t c_zero = ir::kNoOperand, c_one = ir::kNoOperand;
  std::set<uint32_t> load_ids;     // results of loads already in the sketch
  std::vector<uint32_t> inds;      // loop counter phis, outermost first
  int per_hole_cap = 0;
  bool has_stores = false;
};

Ctx build_ctx(const Function& fn, const SearchConfig& cfg) {
  Ctx cx;
  cx.fn = &fn;
  cx.cfg = &cfg;
  cx.dt = ir::dominance_tree(fn);
  cx.per_hole_cap = std::clamp<int>(cfg.max_instrs_per_hole, 0, ir::kMaxFillUnits);

  cx.def_block.assign(fn.num_values(), 0);
  for (uint32_t b = 0; b < fn.blocks.size(); ++b) {
    const ir::Block& blk = fn.blocks[b];
    for (const Instr& p : blk.phis) cx.def_block[p.result] = b;
    for (const ir::Segment& s : blk.body)
      for (const Instr& ins : s.code)
        if (ins.result != ir::kNoOperand) {
          cx.def_block[ins.result] = b;
          if (ins.op == Op::Load) cx.load_ids.insert(ins.result);
        }
    if (!blk.stores.empty()) cx.has_stores = true;
  }
  for (const ir::Placeholder& ph : fn.placeholders) {
    cx.def_block[ph.vid] = ph.anchor;
    cx.def_block[ph.scratch_base] = ph.anchor;
    cx.def_block[ph.scratch_base + 1] = ph.anchor;
  }
  for (const ir::HoleInfo& h : fn.holes)
    for (uint32_t k = 0; k < ir::kMaxFillUnits * ir::kIdsPerFillUnit; ++k)
      cx.def_block[h.id_base + k] = h.block;

  for (uint32_t p = 0; p < fn.sig.params.size(); ++p) {
    if (ir::is_ptr_ty(fn.value_ty[p]))
      cx.ptr_params.push_back(p);
    else if (fn.value_ty[p] == Ty::I64)
      cx.int_params.push_back(p);
  }

  for (int64_t v : cfg.placeholder_value_pool) {
    uint32_t ri = find_const_i(fn, v);
    uint32_t rf = find_const_f(fn, static_cast<double>(v));
    if (ri != ir::kNoOperand) cx.pool_ints.push_back(ri);
    if (rf != ir::kNoOperand) cx.pool_floats.push_back(rf);
  }
  cx.c_zero = find_const_i(fn, 0);
  cx.c_one = find_const_i(fn, 1);

  cx.inds = induction_values(fn);
  for (const ir::HoleInfo& h : fn.holes) {
    HoleCtx hc;
    hc.block = h.block;
    hc.segment = h.segment;
    hc.id_base = h.id_base;
    hc.affine = h.affine;

    std::vector<uint32_t> lives = ir::live_values_at(fn, cx.dt, h.block, h.segment);
    std::sort(lives.begin(), lives.end(), std::greater<uint32_t>());
    for (uint32_t v : lives) {
      if (fn.value_ty[v] == Ty::I64) hc.ints.push_back(v);
      if (fn.value_ty[v] == Ty::F64) hc.floats.push_back(v);
    }
    for (uint32_t i = 0; i < fn.consts.size(); ++i) {
      if (fn.consts[i].ty == Ty::I64) hc.ints.push_back(ir::const_ref(i));
      if (fn.consts[i].ty == Ty::F64) hc.floats.push_back(ir::const_ref(i));
    }
    for (uint32_t iv : cx.inds)
      if (std::find(lives.begin(), lives.end(), iv) != lives.end()) hc.inds.push_back(iv);

    const ir::Block& blk = fn.blocks[h.block];
    for (uint32_t s = 0; s < h.segment && s < blk.body.size(); ++s)
      for (const Instr& ins : blk.body[s].code)
        if (ins.op == Op::Load) hc.prior_loads.emplace_back(ins.a, ins.b);

    bool feeds = false;
    for (const ir::Placeholder& ph : fn.placeholders)
      if (ph.role != ir::PhRole::Cond && ir::dominates(cx.dt, h.block, ph.anchor)) feeds = true;
    for (const ir::PendingPhi& pp : fn.pending) {
      const Instr& phi = fn.blocks[pp.block].phis[pp.phi_idx];
      uint32_t latch = ir::is_pending_ref(phi.b) ? phi.y : phi.x;
      if (ir::dominates(cx.dt, h.block, latch)) feeds = true;
    }
    hc.cap = feeds ? cx.per_hole_cap : 0;

    cx.holes.push_back(std::move(hc));
  }
  return cx;
}

// One enumeration step: at most kIdsPerFillUnit instructions, the last of
// which carries the value the unit exposes.
struct Unit {
  Instr ins[ir::kIdsPerFillUnit];
  int n = 0;
  uint32_t val = ir::kNoOperand;
};

Instr mk(Op op, Ty ty, uint32_t result, uint32_t a, uint32_t b = ir::kNoOperand,
         uint32_t c = ir::kNoOperand) {
  Instr i;
  i.op = op;
  i.ty = ty;
  i.result = result;
  i.a = a;
  i.b = b;
  i.c = c;
  return i;
}

constexpr Op kIntCmps[6] = {Op::ICmpNe, Op::ICmpEq, Op::ICmpSlt,
                            Op::ICmpSle, Op::ICmpSgt, Op::ICmpSge};

// Emits every unit available at one fill position in a fixed order:
// affine index loads, plain loads, compare-selects, binops, casts.
// prev == kNoOperand marks the first position; later positions only emit
// units consuming prev. fill_loads carries the load results produced by
// fills chosen at earlier positions. Returns false when the callback
// stopped the walk.
template <class F>
bool for_each_unit(const Ctx& cx, const HoleCtx& h, const std::vector<uint32_t>& ints,
                   const std::vector<uint32_t>& floats,
                   const std::vector<std::pair<uint32_t, uint32_t>>& cur_loads,
                   const std::vector<uint32_t>& fill_loads, uint32_t prev,
                   uint32_t rbase, const F& cb) {
  const Function& fn = *cx.fn;
  Unit u;

  auto load_ty = [&](uint32_t p) { return ir::scalar_ty(ir::ptr_elem(fn.value_ty[p])); };
  auto emit = [&]() { return cb(u); };

  if (h.affine && prev == ir::kNoOperand) {
    uint32_t c_two = find_const_i(fn, 2);
    for (uint32_t p : cx.ptr_params) {
      Ty lt = load_ty(p);
      for (size_t i = 0; i < h.inds.size(); ++i)
        for (size_t j = i + 1; j < h.inds.size(); ++j) {
          u.n = 2;
          u.ins[0] = mk(Op::Add, Ty::I64, rbase, h.inds[i], h.inds[j]);
          u.ins[1] = mk(Op::Load, lt, rbase + 1, p, rbase);
          u.val = rbase + 1;
          if (!emit()) return false;
        }
      for (uint32_t m : cx.int_params)
        for (size_t i = 0; i < h.inds.size(); ++i)
          for (size_t j = 0; j < h.inds.size(); ++j) {
            if (i == j) continue;
            u.n = 3;
            u.ins[0] = mk(Op::Mul, Ty::I64, rbase, h.inds[i], m);
            u.ins[1] = mk(Op::Add, Ty::I64, rbase + 1, rbase, h.inds[j]);
            u.ins[2] = mk(Op::Load, lt, rbase + 2, p, rbase + 1);
            u.val = rbase + 2;
            if (!emit()) return false;
          }
      for (uint32_t iv : h.inds) {
        if (c_two != ir::kNoOperand) {
          u.n = 2;
          u.ins[0] = mk(Op::Mul, Ty::I64, rbase, iv, c_two);
          u.ins[1] = mk(Op::Load, lt, rbase + 1, p, rbase);
          u.val = rbase + 1;
          if (!emit()) return false;
          if (cx.c_one != ir::kNoOperand) {
            u.n = 3;
            u.ins[0] = mk(Op::Mul, Ty::I64, rbase, iv, c_two);
            u.ins[1] = mk(Op::Add, Ty::I64, rbase + 1, rbase, cx.c_one);
            u.ins[2] = mk(Op::Load, lt, rbase + 2, p, rbase + 1);
            u.val = rbase + 2;
            if (!emit()) return false;
          }
        }
        if (cx.c_one != ir::kNoOperand) {
          u.n = 2;
          u.ins[0] = mk(Op::Add, Ty::I64, rbase, iv, cx.c_one);
          u.ins[1] = mk(Op::Load, lt, rbase + 1, p, rbase);
          u.val = rbase + 1;
          if (!emit()) return false;
        }
      }
    }
    // An affine hole opens with one of the index loads above; everything
    // else reaches it through the generic menu of later positions.
    return true;
  }

  for (uint32_t p : cx.ptr_params) {
    for (uint32_t idx : ints) {
      if (ir::is_const_ref(idx)) continue;  // fixed-element reads come from gathers
      if (prev != ir::kNoOperand && idx != prev) continue;
      bool dup = false;
      for (const auto& [lp, li] : cur_loads)
        if (lp == p && li == idx) dup = true;
      if (dup) continue;
      u.n = 1;
      u.ins[0] = mk(Op::Load, load_ty(p), rbase, p, idx);
      u.val = rbase;
      if (!emit()) return false;
    }
  }

  // Fused compare-selects, entry position only. A pair must touch memory
  // on at least one side: pure scalar compares belong to loop conditions,
  // and constant thresholds never beat the accumulator forms at this
  // scale. Indicator picks 1/0; the extremum forms select an operand, and
  // only the strict orders matter (ties leave the value unchanged).
  if (prev == ir::kNoOperand) {
    auto from_mem = [&](uint32_t v) {
      if (ir::is_const_ref(v)) return false;
      if (cx.load_ids.count(v)) return true;
      return std::find(fill_loads.begin(), fill_loads.end(), v) != fill_loads.end();
    };
    auto cmp_pairs = [&](const std::function<bool(uint32_t, uint32_t)>& f) -> bool {
      for (size_t i = 0; i < ints.size(); ++i) {
        if (ir::is_const_ref(ints[i])) continue;
        for (size_t j = i + 1; j < ints.size(); ++j) {
          if (ir::is_const_ref(ints[j])) continue;
          if (!from_mem(ints[i]) && !from_mem(ints[j])) continue;
          if (!f(ints[i], ints[j])) return false;
        }
      }
      return true;
    };
    for (Op cmp : kIntCmps) {
      if (cx.c_one == ir::kNoOperand || cx.c_zero == ir::kNoOperand) break;
      if (!cmp_pairs([&](uint32_t a, uint32_t b) {
            u.n = 2;
            u.ins[0] = mk(cmp, Ty::I1, rbase, a, b);
            u.ins[1] = mk(Op::Select, Ty::I64, rbase + 1, rbase, cx.c_one, cx.c_zero);
            u.val = rbase + 1;
            return emit();
          }))
        return false;
    }
    for (Op cmp : {Op::ICmpSlt, Op::ICmpSgt}) {
      if (!cmp_pairs([&](uint32_t a, uint32_t b) {
            u.n = 2;
            u.ins[0] = mk(cmp, Ty::I1, rbase, a, b);
            u.ins[1] = mk(Op::Select, Ty::I64, rbase + 1, rbase, a, b);
            u.val = rbase + 1;
            return emit();
          }))
        return false;
    }
  }

  auto binops = [&](const std::vector<uint32_t>& ops, bool fl) -> bool {
    const Op kinds[4] = {fl ? Op::FAdd : Op::Add, fl ? Op::FSub : Op::Sub,
                         fl ? Op::FMul : Op::Mul, fl ? Op::FDiv : Op::SDiv};
    Ty ty = fl ? Ty::F64 : Ty::I64;
    auto is0 = [&](uint32_t r) { return fl ? is_const_val_f(fn, r, 0.0) : is_const_val_i(fn, r, 0); };
    auto is1 = [&](uint32_t r) { return fl ? is_const_val_f(fn, r, 1.0) : is_const_val_i(fn, r, 1); };
    for (int k = 0; k < 4; ++k) {
      Op op = kinds[k];
      bool commut = k == 0 || k == 2;
      for (size_t i = 0; i < ops.size(); ++i) {
        size_t j0 = commut ? i : 0;
        for (size_t j = j0; j < ops.size(); ++j) {
          uint32_t a = ops[i], b = ops[j];
          if (!commut && i == j) continue;
          if (ir::is_const_ref(a) && ir::is_const_ref(b)) continue;
          if (commut && i == j && ir::is_const_ref(a)) continue;
          // Constant offsets earn their keep only as a chain opener; deeper
          // in, every operand is a computed value or the chain stalls.
          if (prev != ir::kNoOperand && (ir::is_const_ref(a) || ir::is_const_ref(b))) continue;
          if (prev != ir::kNoOperand && a != prev && b != prev) continue;
          if (k == 0 && (is0(a) || is0(b))) continue;            // x + 0
          if (k == 1 && is0(b)) continue;                        // x - 0
          if (k == 2 && (is0(a) || is0(b) || is1(a) || is1(b))) continue;  // x*0, x*1
          if (k == 3 && (is0(b) || is1(b))) continue;            // x/0, x/1
          u.n = 1;
          u.ins[0] = mk(op, ty, rbase, a, b);
          u.val = rbase;
          if (!emit()) return false;
        }
      }
    }
    return true;
  };
  if (!binops(ints, false)) return false;
  if (!binops(floats, true)) return false;

  for (uint32_t x : ints) {
    if (ir::is_const_ref(x)) continue;
    if (prev != ir::kNoOperand && x != prev) continue;
    u.n = 1;
    u.ins[0] = mk(Op::SIToFP, Ty::F64, rbase, x);
    u.val = rbase;
    if (!emit()) return false;
  }
  for (uint32_t x : floats) {
    if (ir::is_const_ref(x)) continue;
    if (prev != ir::kNoOperand && x != prev) continue;
    u.n = 1;
    u.ins[0] = mk(Op::FPToSI, Ty::I64, rbase, x);
    u.val = rbase;
    if (!emit()) return false;
  }
  return true;
}

bool walk_fills(const Ctx& cx, int total_units, const std::function<bool(const FillInfo&)>& yield) {
  const size_t H = cx.holes.size();
  FillInfo fi;
  fi.fills.resize(H);
  fi.unit_vals.resize(H);
  fi.unit_tys.resize(H);
  if (H == 0) {
    if (total_units == 0) return yield(fi);
    return true;
  }

  std::vector<int> alloc(H, 0);

  std::function<bool(size_t)> do_hole = [&](size_t h) -> bool {
    if (h == H) return yield(fi);
    const HoleCtx& hc = cx.holes[h];
    fi.fills[h].clear();
    fi.unit_vals[h].clear();
    fi.unit_tys[h].clear();
    if (alloc[h] == 0) return do_hole(h + 1);

    std::function<bool(int)> unit_at = [&](int k) -> bool {
      if (k == alloc[h]) return do_hole(h + 1);
      // Fresh per-position operand lists: newest unit results first, then
      // the static list. Locals, so the yield path cannot invalidate them.
      // Unit types come from the fill itself: the value table has no entry
      // for ids in the hole range.
      std::vector<uint32_t> ints, floats;
      for (size_t q = fi.unit_vals[h].size(); q-- > 0;) {
        Ty t = fi.unit_tys[h][q];
        if (t == Ty::I64) ints.push_back(fi.unit_vals[h][q]);
        if (t == Ty::F64) floats.push_back(fi.unit_vals[h][q]);
      }
      ints.insert(ints.end(), hc.ints.begin(), hc.ints.end());
      floats.insert(floats.end(), hc.floats.begin(), hc.floats.end());

      std::vector<std::pair<uint32_t, uint32_t>> cur_loads = hc.prior_loads;
      std::vector<uint32_t> fill_loads;
      for (const Instr& ins : fi.fills[h])
        if (ins.op == Op::Load) {
          cur_loads.emplace_back(ins.a, ins.b);
          fill_loads.push_back(ins.result);
        }

      uint32_t prev = k == 0 ? ir::kNoOperand : fi.unit_vals[h].back();
      uint32_t rbase = hc.id_base + static_cast<uint32_t>(k) * ir::kIdsPerFillUnit;
      size_t mark = fi.fills[h].size();

      return for_each_unit(cx, hc, ints, floats, cur_loads, fill_loads, prev, rbase,
                           [&](const Unit& u) -> bool {
        for (int t = 0; t < u.n; ++t) fi.fills[h].push_back(u.ins[t]);
        fi.unit_vals[h].push_back(u.val);
        fi.unit_tys[h].push_back(u.ins[u.n - 1].ty);  // u.val is the last instr's result
        bool cont = unit_at(k + 1);
        fi.fills[h].resize(mark);
        fi.unit_vals[h].pop_back();
        fi.unit_tys[h].pop_back();
        return cont;
      });
    };
    return unit_at(0);
  };

  // Distribute total_units over the holes, each within its own budget.
  std::function<bool(size_t, int)> comp = [&](size_t h, int left) -> bool {
    if (h + 1 == H) {
      if (left > cx.holes[h].cap) return true;
      alloc[h] = left;
      return do_hole(0);
    }
    for (int take = 0; take <= std::min(left, cx.holes[h].cap); ++take) {
      alloc[h] = take;
      if (!comp(h + 1, left - take)) return false;
    }
    return true;
  };
  return comp(0, total_units);
}

// One choice for one placeholder: either a redirect to an existing value
// or constant, or a short instruction sequence materialized at the anchor.
struct BindChoice {
  uint32_t target = ir::kNoOperand;
  std::vector<Instr> scratch;
};

struct BindDims {
  // Static per-sketch parts; per-fill dynamic targets are prepended.
  std::vector<std::vector<BindChoice>> ph_static;
  std::vector<std::vector<uint32_t>> pend_static;
  std::vector<size_t> ph_const_tail;  // Ret: how many trailing consts to drop
  std::vector<uint32_t> pend_latch;   // block whose end the pending value must reach
  // Some slot has no static choice and provably no fill can supply one;
  // the sketch cannot produce a candidate at any stratum.
  bool unsat = false;
};

std::vector<uint32_t> lives_at_end(const Ctx& cx, uint32_t block) {
  const Function& fn = *cx.fn;
  auto lv = ir::live_values_at(fn, cx.dt, block,
                               static_cast<uint32_t>(fn.blocks[block].body.size()));
  std::sort(lv.begin(), lv.end(), std::greater<uint32_t>());
  return lv;
}

BindDims build_bind_dims(const Ctx& cx) {
  const Function& fn = *cx.fn;
  BindDims bd;
  bd.ph_static.resize(fn.placeholders.size());
  bd.ph_const_tail.assign(fn.placeholders.size(), 0);

  for (uint32_t i = 0; i < fn.placeholders.size(); ++i) {
    const ir::Placeholder& ph = fn.placeholders[i];
    std::vector<BindChoice>& out = bd.ph_static[i];
    std::vector<uint32_t> lv = lives_at_end(cx, ph.anchor);

    auto push_val = [&](uint32_t v) {
      BindChoice c;
      c.target = v;
      out.push_back(std::move(c));
    };

    switch (ph.role) {
      case ir::PhRole::Cond: {
        // Compares that steer another branch are invariant inside this
        // loop: binding one either spins forever or restates the enclosing
        // exit test. Booleans a fill computes arrive through the dynamic
        // dimension instead.
        std::set<uint32_t> steering;
        for (const ir::Block& b : fn.blocks)
          if (b.term.op == Op::CondBr && ir::is_value_ref(b.term.a)) steering.insert(b.term.a);
        for (const ir::Placeholder& o : fn.placeholders) steering.insert(o.vid);
        for (uint32_t v : lv)
          if (fn.value_ty[v] == Ty::I1 && !steering.count(v)) push_val(v);
        // Sentinel scan: run while the cell under the innermost counter
        // differs from a pool constant. Scalar bound checks come from
        // counted loops, not from here.
        uint32_t idx = ir::kNoOperand;
        for (uint32_t iv : cx.inds)
          if (std::find(lv.begin(), lv.end(), iv) != lv.end()) idx = iv;
        if (idx == ir::kNoOperand) break;
        for (uint32_t p : cx.ptr_params) {
          Ty lt = ir::scalar_ty(ir::ptr_elem(fn.value_ty[p]));
          if (lt != Ty::I64) continue;
          for (uint32_t r : cx.pool_ints) {
            BindChoice c;
            c.scratch.push_back(mk(Op::Load, lt, ph.scratch_base, p, idx));
            c.scratch.push_back(mk(Op::ICmpNe, Ty::I1, ph.vid, ph.scratch_base, r));
            out.push_back(std::move(c));
          }
        }
        break;
      }
      case ir::PhRole::AccInit: {
        const auto& pool = ph.ty == Ty::F64 ? cx.pool_floats : cx.pool_ints;
        for (uint32_t r : pool) push_val(r);
        for (uint32_t v : lv)
          if (fn.value_ty[v] == ph.ty) push_val(v);
        break;
      }
      case ir::PhRole::StoreVal: {
        for (uint32_t v : lv)
          if (fn.value_ty[v] == ph.ty) push_val(v);
        break;
      }
      case ir::PhRole::Ret: {
        for (uint32_t v : lv)
          if (fn.value_ty[v] == ph.ty) push_val(v);
        const auto& pool = ph.ty == Ty::F64 ? cx.pool_floats : cx.pool_ints;
        for (uint32_t r : pool) push_val(r);
        bd.ph_const_tail[i] = pool.size();
        break;
      }
    }
  }

  bd.pend_static.resize(fn.pending.size());
  bd.pend_latch.resize(fn.pending.size());
  for (uint32_t s = 0; s < fn.pending.size(); ++s) {
    const ir::PendingPhi& pp = fn.pending[s];
    const Instr& phi = fn.blocks[pp.block].phis[pp.phi_idx];
    uint32_t latch = ir::is_pending_ref(phi.b) ? phi.y : phi.x;
    bd.pend_latch[s] = latch;
    uint32_t other = ir::is_pending_ref(phi.b) ? phi.a : phi.b;
    for (uint32_t v : lives_at_end(cx, latch)) {
      if (fn.value_ty[v] != phi.ty) continue;
      if (v == phi.result) continue;
      if (ir::is_value_ref(other) && v == other) continue;
      bd.pend_static[s].push_back(v);
    }
  }

  // Fills can only put an integer compare in front of a condition when an
  // integer load exists to compare against; everything else a fill makes is
  // arithmetic. A slot that is empty now and unreachable by fills stays
  // empty forever, and one such slot dooms the whole sketch.
  bool int_mem = false;
  for (uint32_t p : cx.ptr_params)
    if (ir::scalar_ty(ir::ptr_elem(fn.value_ty[p])) == Ty::I64) int_mem = true;
  auto hole_reaches = [&](uint32_t block) {
    for (const HoleCtx& h : cx.holes)
      if (ir::dominates(cx.dt, h.block, block)) return true;
    return false;
  };
  for (uint32_t i = 0; i < fn.placeholders.size(); ++i) {
    if (!bd.ph_static[i].empty()) continue;
    const ir::Placeholder& ph = fn.placeholders[i];
    bool dyn = hole_reaches(ph.anchor) && (ph.role != ir::PhRole::Cond || int_mem);
    if (!dyn) bd.unsat = true;
  }
  for (uint32_t s = 0; s < fn.pending.size(); ++s)
    if (bd.pend_static[s].empty() && !hole_reaches(bd.pend_latch[s])) bd.unsat = true;

  return bd;
}

bool walk_bindings(const Ctx& cx, const BindDims& bd, const FillInfo& fi,
                   const std::function<bool(const interp::CandidateView&)>& yield) {
  const Function& fn = *cx.fn;

  bool fills_empty = true;
  for (const auto& f : fi.fills)
    if (!f.empty()) fills_empty = false;

  // Fill values visible at a block: same block (fills run with the body
  // segments, before anchored code and stores) or a dominating one.
  auto fill_vals_at = [&](uint32_t block, Ty ty, std::vector<uint32_t>& out) {
    for (size_t h = fi.unit_vals.size(); h-- > 0;) {
      uint32_t hb = cx.holes[h].block;
      if (!ir::dominates(cx.dt, hb, block)) continue;
      for (size_t q = fi.unit_vals[h].size(); q-- > 0;)
        if (fi.unit_tys[h][q] == ty) out.push_back(fi.unit_vals[h][q]);
    }
  };

  size_t nph = fn.placeholders.size(), npend = fn.pending.size();
  std::vector<std::vector<uint32_t>> ph_dyn(nph);
  std::vector<size_t> ph_size(nph);
  for (size_t i = 0; i < nph; ++i) {
    const ir::Placeholder& ph = fn.placeholders[i];
    if (ph.role == ir::PhRole::Cond) {
      // fill-produced booleans
      for (size_t h = 0; h < fi.fills.size(); ++h)
        if (ir::dominates(cx.dt, cx.holes[h].block, ph.anchor))
          for (const Instr& ins : fi.fills[h])
            if (ins.ty == Ty::I1) ph_dyn[i].push_back(ins.result);
    } else {
      fill_vals_at(ph.anchor, ph.ty, ph_dyn[i]);
    }
    size_t st = bd.ph_static[i].size();
    if (ph.role == ir::PhRole::Ret && !fills_empty && !cx.has_stores)
      st -= bd.ph_const_tail[i];
    ph_size[i] = ph_dyn[i].size() + st;
    if (ph_size[i] == 0) return true;  // unfillable placeholder, no candidates
  }

  std::vector<std::vector<uint32_t>> pend_dyn(npend);
  std::vector<size_t> pend_size(npend);
  for (size_t s = 0; s < npend; ++s) {
    fill_vals_at(bd.pend_latch[s], fn.blocks[fn.pending[s].block].phis[fn.pending[s].phi_idx].ty,
                 pend_dyn[s]);
    pend_size[s] = pend_dyn[s].size() + bd.pend_static[s].size();
    if (pend_size[s] == 0) return true;
  }

  // Final value of each nonempty hole; a combination must consume them all.
  std::vector<uint32_t> lasts;
  for (const auto& uv : fi.unit_vals)
    if (!uv.empty()) lasts.push_back(uv.back());

  interp::CandidateView view;
  std::vector<size_t> ix(nph + npend, 0);
  std::vector<uint32_t> used;

  while (true) {
    used.clear();
    for (size_t i = 0; i < nph; ++i) {
      if (ix[i] < ph_dyn[i].size()) {
        used.push_back(ph_dyn[i][ix[i]]);
      } else {
        const BindChoice& c = bd.ph_static[i][ix[i] - ph_dyn[i].size()];
        if (ir::is_value_ref(c.target)) used.push_back(c.target);
        for (const Instr& ins : c.scratch) {
          if (ir::is_value_ref(ins.a)) used.push_back(ins.a);
          if (ir::is_value_ref(ins.b)) used.push_back(ins.b);
          if (ir::is_value_ref(ins.c)) used.push_back(ins.c);
        }
      }
    }
    for (size_t s = 0; s < npend; ++s) {
      uint32_t v = ix[nph + s] < pend_dyn[s].size()
                       ? pend_dyn[s][ix[nph + s]]
                       : bd.pend_static[s][ix[nph + s] - pend_dyn[s].size()];
      used.push_back(v);
    }

    bool ok = true;
    for (uint32_t lv : lasts)
      if (std::find(used.begin(), used.end(), lv) == used.end()) ok = false;

    if (ok) {
      view.reset(fn);
      view.fills = fi.fills;
      for (size_t i = 0; i < nph; ++i) {
        const ir::Placeholder& ph = fn.placeholders[i];
        if (ix[i] < ph_dyn[i].size()) {
          view.redirect[ph.vid] = ph_dyn[i][ix[i]];
        } else {
          const BindChoice& c = bd.ph_static[i][ix[i] - ph_dyn[i].size()];
          if (c.scratch.empty())
            view.redirect[ph.vid] = c.target;
          else
            view.ph_scratch[i] = c.scratch;
        }
      }
      for (size_t s = 0; s < npend; ++s)
        view.pending_vals[s] = ix[nph + s] < pend_dyn[s].size()
                                   ? pend_dyn[s][ix[nph + s]]
                                   : bd.pend_static[s][ix[nph + s] - pend_dyn[s].size()];
      if (!yield(view)) return false;
    }

    // advance odometer, last dimension fastest
    size_t d = ix.size();
    while (d > 0) {
      --d;
      size_t cap = d < nph ? ph_size[d] : pend_size[d - nph];
      if (++ix[d] < cap) break;
      ix[d] = 0;
      if (d == 0) return true;
    }
    if (ix.empty()) return true;  // no dimensions: the single combo was yielded
  }
}

}  // namespace

bool enumerate_fills(const ir::Function& fn, const SearchConfig& cfg, int total_units,
                     const std::function<bool(const FillInfo&)>& yield) {
  Ctx cx = build_ctx(fn, cfg);
  return walk_fills(cx, total_units, yield);
}

bool enumerate_bindings(const ir::Function& fn, const SearchConfig& cfg, const FillInfo& fi,
                        const std::function<bool(const interp::CandidateView&)>& yield) {
  Ctx cx = build_ctx(fn, cfg);
  BindDims bd = build_bind_dims(cx);
  return walk_bindings(cx, bd, fi, yield);
}

Verdict evaluate_candidate(const interp::CandidateView& view, const ProblemSpec& spec,
                           const MemoryEnv& mem, interp::ExecEnv& env) {
  for (size_t i = 0; i < spec.examples.size(); ++i) {
    env.load(spec.sig, spec.examples[i], mem.L);
    interp::RunResult res = interp::run(view, env);
    switch (res.outcome) {
      case interp::Outcome::OutOfBounds:
        return {Verdict::Kind::OOB, static_cast<int>(i)};
      case interp::Outcome::DivByZero:
      case interp::Outcome::StepLimit:
        return {Verdict::Kind::Diverged, static_cast<int>(i)};
      case interp::Outcome::Done:
        break;
    }
    if (!interp::matches(spec.sig, spec.examples[i], res, env, spec.cfg.float_tol))
      return {Verdict::Kind::FailAt, static_cast<int>(i)};
  }
  return {Verdict::Kind::Pass, -1};
}

ir::Function freeze_candidate(const ir::Function& fn, const interp::CandidateView& view) {
  ir::Function g = fn;

  auto resolve = [&](uint32_t o) -> uint32_t {
    if (o == ir::kNoOperand) return o;
    if (ir::is_pending_ref(o)) o = view.pending_vals[ir::ref_index(o)];
    if (ir::is_value_ref(o)) {
      uint32_t r = view.redirect[o];
      if (r != o) o = r;
    }
    return o;
  };

  for (uint32_t h = 0; h < fn.holes.size(); ++h) {
    const ir::HoleInfo& hi = fn.holes[h];
    ir::Segment seg;
    seg.code = view.fills[h];
    g.blocks[hi.block].body[hi.segment] = std::move(seg);
  }
  for (uint32_t i = 0; i < fn.placeholders.size(); ++i) {
    if (view.ph_scratch.size() <= i || view.ph_scratch[i].empty()) continue;
    ir::Segment seg;
    seg.code = view.ph_scratch[i];
    g.blocks[fn.placeholders[i].anchor].body.push_back(std::move(seg));
  }

  for (ir::Block& b : g.blocks) {
    for (Instr& p : b.phis) {
      p.a = resolve(p.a);
      p.b = resolve(p.b);
    }
    for (ir::Segment& s : b.body)
      for (Instr& ins : s.code) {
        ins.a = resolve(ins.a);
        ins.b = resolve(ins.b);
        ins.c = resolve(ins.c);
      }
    for (Instr& st : b.stores) {
      st.a = resolve(st.a);
      st.b = resolve(st.b);
      st.c = resolve(st.c);
    }
    b.term.a = resolve(b.term.a);
    b.anchored.clear();
  }
  g.holes.clear();
  g.pending.clear();

  // Fill and scratch ids enter the value table untyped; the instructions
  // that now occupy them fix that.
  for (const ir::Block& b : g.blocks)
    for (const ir::Segment& s : b.body)
      for (const Instr& ins : s.code)
        if (ins.result != ir::kNoOperand) g.value_ty[ins.result] = ins.ty;

  // Drop pure instructions nothing reads. Guarded divisions stay: their
  // error path is observable.
  auto pure = [](Op op) {
    switch (op) {
      case Op::Add: case Op::Sub: case Op::Mul:
      case Op::FAdd: case Op::FSub: case Op::FMul:
      case Op::Select: case Op::Load: case Op::SIToFP: case Op::FPToSI:
        return true;
      default:
        return ir::is_icmp(op) || ir::is_fcmp(op);
    }
  };
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<uint32_t> used;
    auto mark = [&](uint32_t o) {
      if (ir::is_value_ref(o)) used.insert(o);
    };
    for (const ir::Block& b : g.blocks) {
      for (const Instr& p : b.phis) {
        mark(p.a);
        mark(p.b);
      }
      for (const ir::Segment& s : b.body)
        for (const Instr& ins : s.code) {
          mark(ins.a);
          mark(ins.b);
          mark(ins.c);
        }
      for (const Instr& st : b.stores) {
        mark(st.a);
        mark(st.b);
        mark(st.c);
      }
      mark(b.term.a);
    }
    for (ir::Block& b : g.blocks)
      for (ir::Segment& s : b.body) {
        auto it = std::remove_if(s.code.begin(), s.code.end(), [&](const Instr& ins) {
          return pure(ins.op) && ins.result != ir::kNoOperand && !used.count(ins.result);
        });
        if (it != s.code.end()) {
          s.code.erase(it, s.code.end());
          changed = true;
        }
      }
  }
  for (ir::Block& b : g.blocks)
    b.body.erase(std::remove_if(b.body.begin(), b.body.end(),
                                [](const ir::Segment& s) { return s.code.empty(); }),
                 b.body.end());

  return ir::strip_bounds_checks(g);
}

namespace {

bool reverify(const ir::Function& frozen, const ProblemSpec& spec, uint32_t mem_len,
              interp::ExecEnv& env) {
  for (const Example& ex : spec.examples) {
    env.load(spec.sig, ex, mem_len);
    interp::RunResult res = interp::run_function(frozen, env);
    if (res.outcome != interp::Outcome::Done) return false;
    if (!interp::matches(spec.sig, ex, res, env, spec.cfg.float_tol)) return false;
  }
  return true;
}

}  // namespace

SynthesisReport synthesize(const ProblemSpec& spec, const IidModel* iid,
                           const MarkovModel* markov, const SearchConfig& cfg) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  SynthesisReport rep;
  rep.status = Status::Timeout;

  std::vector<Fragment> population = instantiate_population(spec.sig);
  std::vector<Fragment> f0;
  if (cfg.mode != Mode::Uniform && iid != nullptr) f0 = predict_F0(*iid, spec, population);
  if (f0.empty()) f0 = population;
  int max_len = markov != nullptr ? markov->max_length : 6;

  std::mt19937_64 rng(cfg.seed);

  struct Entry {
    Sketch sk;
    std::string key;
    Ctx cx;
    BindDims bd;
    int next_stratum = 0;
    int max_stratum = 0;
    long used = 0;
    double secs = 0;
    bool retired = false;
    bool started = false;
  };
  std::vector<std::unique_ptr<Entry>> entries;
  // SYNTH_TRACE=1 dumps a per-sketch cost table to stderr when the run ends.
  const bool trace = std::getenv("SYNTH_TRACE") != nullptr;
  std::set<std::string> seen;
  long attempts = 0;
  const long attempt_cap = static_cast<long>(cfg.max_sketches) * 50;

  auto add_sketch = [&](std::vector<Fragment> seq) -> bool {
    std::string key = print_sequence(seq, spec.sig);
    if (seen.count(key)) return false;
    seen.insert(key);
    auto e = std::make_unique<Entry>();
    e->key = key;
    e->sk = compile_sequence(seq, spec.sig);
    add_pool_constants(e->sk.fn, cfg);
    // The context keeps the function's address; fill it in only once the
    // entry has its final home.
    entries.push_back(std::move(e));
    Entry& ent = *entries.back();
    ent.cx = build_ctx(ent.sk.fn, cfg);
    ent.bd = build_bind_dims(ent.cx);
    for (const auto& hc : ent.cx.holes) ent.max_stratum += hc.cap;
    ent.retired = ent.bd.unsat;
    return true;
  };

  auto sample_seq = [&]() -> std::vector<Fragment> {
    if (cfg.mode == Mode::Markov && markov != nullptr)
      return sample_sequence(*markov, f0, spec.sig, population, rng);
    const std::vector<Fragment>& pool = cfg.mode == Mode::Uniform ? population : f0;
    std::uniform_int_distribution<int> len_d(1, max_len);
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    std::vector<Fragment> seq;
    int len = len_d(rng);
    for (int i = 0; i < len; ++i) seq.push_back(pool[pick(rng)]);
    return seq;
  };

  auto top_up = [&](int want) {
    while (static_cast<int>(entries.size()) < std::min(want, cfg.max_sketches) &&
           attempts < attempt_cap) {
      ++attempts;
      add_sketch(sample_seq());
    }
  };

  add_sketch({});
  top_up(8);

  interp::ExecEnv env;
  // Candidates whose loop condition never flips spin until the step limit;
  // keep it low here so they cost microseconds, not milliseconds. Real
  // programs over these buffer sizes finish in well under a thousand steps,
  // nested loops included. The final check below runs unclamped.
  env.step_limit = 4000;
  MemoryEnv mem;
  long tick = 0;
  bool timed_out = false, solved = false;

  while (!solved && !timed_out) {
    if (elapsed() >= cfg.time_budget) {
      timed_out = true;
      break;
    }
    // Shallow strata first: a freshly sampled sketch gets its cheap strata
    // evaluated before older sketches grind through deep ones.
    std::vector<Entry*> order;
    order.reserve(entries.size());
    for (auto& ep : entries) order.push_back(ep.get());
    std::stable_sort(order.begin(), order.end(),
                     [](const Entry* a, const Entry* b) { return a->next_stratum < b->next_stratum; });

    bool any_active = false;
    for (Entry* ep : order) {
      Entry& e = *ep;
      if (e.retired) continue;
      if (e.next_stratum > e.max_stratum || e.used >= cfg.max_candidates_per_sketch) {
        e.retired = true;
        continue;
      }
      any_active = true;
      if (!e.started) {
        e.started = true;
        rep.sketches += 1;
      }

      double stratum_t0 = trace ? elapsed() : 0;
      walk_fills(e.cx, e.next_stratum, [&](const FillInfo& fi) -> bool {
        return walk_bindings(e.cx, e.bd, fi, [&](const interp::CandidateView& view) -> bool {
          if (((++tick) & 63) == 0 && elapsed() >= cfg.time_budget) {
            timed_out = true;
            return false;
          }
          if (e.used >= cfg.max_candidates_per_sketch) return false;
          e.used += 1;
          rep.candidates += 1;

          Verdict v = evaluate_candidate(view, spec, mem, env);
          while (v.kind == Verdict::Kind::OOB && mem.L < mem.L_max) {
            mem.L = std::min(mem.L * 2, mem.L_max);
            v = evaluate_candidate(view, spec, mem, env);
          }
          if (v.kind != Verdict::Kind::Pass) return true;

          ir::Function frozen = freeze_candidate(e.sk.fn, view);
          if (ir::validate(frozen).has_value()) return true;
          interp::ExecEnv check_env;  // full step budget for the final check
          if (!reverify(frozen, spec, mem.L, check_env)) return true;

          rep.status = Status::Solved;
          rep.solution = std::move(frozen);
          rep.sequence = e.sk.sequence;
          rep.mem_len = mem.L;
          solved = true;
          return false;
        });
      });
      if (trace) e.secs += elapsed() - stratum_t0;
      if (solved || timed_out) break;
      e.next_stratum += 1;
    }
    if (solved || timed_out) break;

    size_t before = entries.size();
    top_up(static_cast<int>(entries.size()) + 8);
    bool grew = entries.size() > before;
    if (!any_active && !grew) {
      rep.status = Status::Exhausted;
      break;
    }
  }

  if (trace) {
    std::vector<const Entry*> by_cost;
    for (auto& ep : entries) by_cost.push_back(ep.get());
    std::stable_sort(by_cost.begin(), by_cost.end(),
                     [](const Entry* a, const Entry* b) { return a->secs > b->secs; });
    std::fprintf(stderr, "trace: %zu sketches, %ld candidates, L=%u\n", entries.size(),
                 rep.candidates, mem.L);
    for (size_t i = 0; i < by_cost.size() && i < 15; ++i)
      std::fprintf(stderr, "  %8.3fs %9ld cand  stratum=%d/%d  %s\n", by_cost[i]->secs,
                   by_cost[i]->used, by_cost[i]->next_stratum, by_cost[i]->max_stratum,
                   by_cost[i]->key.c_str());
  }

  if (solved && rep.solution.has_value()) {
    rep.ir_text = ir::to_text(*rep.solution);
    rep.pseudo_c_text = pseudo_c(*rep.solution);
  }
  rep.wall_time = elapsed();
  return rep;
}

}  // namespace synth
