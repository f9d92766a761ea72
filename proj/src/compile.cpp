#include "synth/compile.hpp"

namespace synth {

using namespace synth::ir;

namespace {

const char* induction_name(size_t depth) {
  static const char* names[] = {"i", "j", "k", "l"};
  return depth < 4 ? names[depth] : "i";
}

struct Region {
  std::vector<StructNode> nodes;
  uint32_t cur = 0;
};

struct Lowering {
  Function fn;
  struct Loop {
    uint32_t preheader, header, latch, exit, induction;
  };
  std::vector<Loop> loops;
  int acc_count = 0;

  explicit Lowering(const Signature& sig) {
    fn.sig = sig;
    for (const auto& p : sig.params) fn.new_value(param_ty(p.type), p.name);
    fn.blocks.emplace_back();
  }

  uint32_t new_block() {
    fn.blocks.emplace_back();
    return static_cast<uint32_t>(fn.blocks.size() - 1);
  }

  void ensure_straight(Region& r) {
    if (!r.nodes.empty() && r.nodes.back().kind == StructNode::K::Straight &&
        r.nodes.back().block == r.cur)
      return;
    StructNode n;
    n.kind = StructNode::K::Straight;
    n.block = r.cur;
    r.nodes.push_back(std::move(n));
  }

  uint32_t add_placeholder(Ty ty, PhRole role, uint32_t anchor) {
    Placeholder ph;
    ph.ty = ty;
    ph.role = role;
    ph.vid = fn.new_value(ty);
    ph.scratch_base = fn.new_value(Ty::Void);
    fn.new_value(Ty::Void);
    ph.anchor = anchor;
    uint32_t idx = static_cast<uint32_t>(fn.placeholders.size());
    fn.placeholders.push_back(ph);
    fn.blocks[anchor].anchored.push_back(idx);
    return idx;
  }

  uint32_t index_operand() const {
    return loops.empty() ? fn_const_zero : loops.back().induction;
  }
  uint32_t fn_const_zero = 0;  // set after construction

  Ty acc_type() const {
    switch (fn.sig.ret) {
      case RetType::Float:
        return Ty::F64;
      case RetType::Int:
      case RetType::Char:
        return Ty::I64;
      case RetType::Void:
        for (const auto& p : fn.sig.params)
          if (p.type == ParamType::PtrFloat) return Ty::F64;
        return Ty::I64;
    }
    return Ty::I64;
  }

  void add_hole(Region& r, bool affine) {
    ensure_straight(r);
    HoleInfo h;
    h.block = r.cur;
    h.segment = static_cast<uint32_t>(fn.blocks[r.cur].body.size());
    h.affine = affine;
    h.id_base = fn.num_values();
    uint32_t hid = static_cast<uint32_t>(fn.holes.size());
    for (uint32_t k = 0; k < kMaxFillUnits * kIdsPerFillUnit; ++k)
      fn.new_value(Ty::Void, "h" + std::to_string(hid) + "_" + std::to_string(k));
    Segment seg;
    seg.is_hole = true;
    seg.hole_id = hid;
    fn.blocks[r.cur].body.push_back(std::move(seg));
    fn.holes.push_back(h);
  }

  void lower_loop(const Fragment& f, Region& r) {
    uint32_t preheader = r.cur;
    uint32_t header = new_block();
    uint32_t body = new_block();
    uint32_t latch = new_block();
    uint32_t exit = new_block();

    fn.blocks[preheader].term = Instr{Op::Br, Ty::Void, kNoOperand,
                                      kNoOperand, kNoOperand, kNoOperand, header, kNoOperand};

    uint32_t iv = fn.new_value(Ty::I64, induction_name(loops.size()));
    uint32_t inc = fn.new_value(Ty::I64);
    Instr latch_add;
    latch_add.op = Op::Add;
    latch_add.ty = Ty::I64;
    latch_add.result = inc;
    latch_add.a = iv;
    latch_add.b = fn.add_const_i(1);
    Segment latch_seg;
    latch_seg.code.push_back(latch_add);
    fn.blocks[latch].body.push_back(std::move(latch_seg));
    fn.blocks[latch].term = Instr{Op::Br, Ty::Void, kNoOperand,
                                  kNoOperand, kNoOperand, kNoOperand, header, kNoOperand};

    Instr iv_phi;
    iv_phi.op = Op::Phi;
    iv_phi.ty = Ty::I64;
    iv_phi.result = iv;
    iv_phi.a = fn.add_const_i(0);
    iv_phi.b = inc;
    iv_phi.x = preheader;
    iv_phi.y = latch;
    fn.blocks[header].phis.push_back(iv_phi);

    StructNode node;
    node.latch = latch;
    node.exit = exit;
    node.block = header;
    node.induction = iv;

    if (f.kind == FragmentKind::WhileLoop) {
      uint32_t ph = add_placeholder(Ty::I1, PhRole::Cond, header);
      fn.blocks[header].term =
          Instr{Op::CondBr, Ty::Void, kNoOperand, fn.placeholders[ph].vid,
                kNoOperand, kNoOperand, body, exit};
      node.kind = StructNode::K::WhileLoop;
      node.cond_ph = ph;
    } else {
      uint32_t bound =
          f.kind == FragmentKind::FixedLoop ? fn.add_const_i(f.bound) : f.arg;
      uint32_t cond = fn.new_value(Ty::I1);
      Instr cmp;
      cmp.op = Op::ICmpSlt;
      cmp.ty = Ty::I1;
      cmp.result = cond;
      cmp.a = iv;
      cmp.b = bound;
      Segment seg;
      seg.code.push_back(cmp);
      fn.blocks[header].body.push_back(std::move(seg));
      fn.blocks[header].term = Instr{Op::CondBr, Ty::Void, kNoOperand,
                                     cond, kNoOperand, kNoOperand, body, exit};
      node.kind = StructNode::K::CountedLoop;
      node.bound = bound;
    }

    loops.push_back({preheader, header, latch, exit, iv});
    Region body_region;
    body_region.cur = body;
    ensure_straight(body_region);
    if (!f.children.empty()) lower(f.children[0], body_region);
    fn.blocks[body_region.cur].term =
        Instr{Op::Br, Ty::Void, kNoOperand, kNoOperand, kNoOperand, kNoOperand,
              latch, kNoOperand};
    loops.pop_back();

    node.kids = std::move(body_region.nodes);
    r.nodes.push_back(std::move(node));
    r.cur = exit;
    ensure_straight(r);
  }

  void lower_branch(const Fragment& f, Region& r) {
    uint32_t head = r.cur;
    uint32_t then_b = new_block();
    bool has_else = f.kind == FragmentKind::IfElse;
    uint32_t else_b = has_else ? new_block() : kNoOperand;
    uint32_t join = new_block();

    uint32_t ph = add_placeholder(Ty::I1, PhRole::Cond, head);
    fn.blocks[head].term =
        Instr{Op::CondBr, Ty::Void, kNoOperand, fn.placeholders[ph].vid,
              kNoOperand, kNoOperand, then_b, has_else ? else_b : join};

    StructNode node;
    node.kind = has_else ? StructNode::K::IfElse : StructNode::K::If;
    node.block = head;
    node.exit = join;
    node.cond_ph = ph;

    Region then_region;
    then_region.cur = then_b;
    ensure_straight(then_region);
    if (!f.children.empty()) lower(f.children[0], then_region);
    fn.blocks[then_region.cur].term =
        Instr{Op::Br, Ty::Void, kNoOperand, kNoOperand, kNoOperand, kNoOperand,
              join, kNoOperand};
    node.kids = std::move(then_region.nodes);

    if (has_else) {
      Region else_region;
      else_region.cur = else_b;
      ensure_straight(else_region);
      if (f.children.size() > 1) lower(f.children[1], else_region);
      fn.blocks[else_region.cur].term =
          Instr{Op::Br, Ty::Void, kNoOperand, kNoOperand, kNoOperand, kNoOperand,
                join, kNoOperand};
      node.else_kids = std::move(else_region.nodes);
    }

    r.nodes.push_back(std::move(node));
    r.cur = join;
    ensure_straight(r);
  }

  void lower(const Fragment& f, Region& r) {
    switch (f.kind) {
      case FragmentKind::Linear:
        add_hole(r, false);
        break;
      case FragmentKind::AffineIndex:
        add_hole(r, true);
        break;
      case FragmentKind::GatherIndex: {
        ensure_straight(r);
        Ty elem = scalar_ty(pointee(fn.sig.params[f.arg].type));
        Instr ld;
        ld.op = Op::Load;
        ld.ty = elem;
        ld.result = fn.new_value(elem);
        ld.a = f.arg;
        ld.b = index_operand();
        Segment seg;
        seg.code.push_back(ld);
        fn.blocks[r.cur].body.push_back(std::move(seg));
        if (!f.children.empty()) lower(f.children[0], r);
        break;
      }
      case FragmentKind::Accumulate: {
        if (!loops.empty()) {
          const Loop& L = loops.back();
          Ty ty = acc_type();
          uint32_t init_ph = add_placeholder(ty, PhRole::AccInit, L.preheader);
          uint32_t g = fn.new_value(ty, acc_count++ ? "g" + std::to_string(acc_count) : "g");
          uint32_t slot = static_cast<uint32_t>(fn.pending.size());
          Instr phi;
          phi.op = Op::Phi;
          phi.ty = ty;
          phi.result = g;
          phi.a = fn.placeholders[init_ph].vid;
          phi.b = pending_ref(slot);
          phi.x = L.preheader;
          phi.y = L.latch;
          fn.pending.push_back(
              {L.header, static_cast<uint32_t>(fn.blocks[L.header].phis.size())});
          fn.blocks[L.header].phis.push_back(phi);
        }
        if (!f.children.empty()) lower(f.children[0], r);
        break;
      }
      case FragmentKind::StoreOutput: {
        ensure_straight(r);
        Ty elem = scalar_ty(pointee(fn.sig.params[f.arg].type));
        uint32_t ph = add_placeholder(elem, PhRole::StoreVal, r.cur);
        Instr st;
        st.op = Op::Store;
        st.ty = elem;
        st.a = fn.placeholders[ph].vid;
        st.b = f.arg;
        st.c = index_operand();
        fn.blocks[r.cur].stores.push_back(st);
        if (!f.children.empty()) lower(f.children[0], r);
        break;
      }
      case FragmentKind::FixedLoop:
      case FragmentKind::ArgLoop:
      case FragmentKind::WhileLoop:
        lower_loop(f, r);
        break;
      case FragmentKind::If:
      case FragmentKind::IfElse:
        lower_branch(f, r);
        break;
      case FragmentKind::Seq:
        if (!f.children.empty()) lower(f.children[0], r);
        if (f.children.size() > 1) lower(f.children[1], r);
        break;
      case FragmentKind::Start:
      case FragmentKind::End:
        break;
    }
  }
};

}  // namespace

Sketch compile_sketch(const Fragment& tree, const Signature& sig) {
  Lowering lw(sig);
  lw.fn_const_zero = lw.fn.add_const_i(0);

  Region top;
  top.cur = 0;
  lw.ensure_straight(top);
  lw.lower(tree, top);

  Instr ret;
  ret.op = Op::Ret;
  if (sig.ret != RetType::Void) {
    Ty ty = sig.ret == RetType::Float ? Ty::F64 : Ty::I64;
    uint32_t ph = lw.add_placeholder(ty, PhRole::Ret, top.cur);
    ret.a = lw.fn.placeholders[ph].vid;
  }
  lw.fn.blocks[top.cur].term = ret;

  lw.fn.structure = std::move(top.nodes);
  lw.fn.recompute_preds();

  Sketch sk;
  sk.fn = std::move(lw.fn);
  sk.sequence = flatten(tree);
  return sk;
}

Sketch compile_sequence(const std::vector<Fragment>& seq, const Signature& sig) {
  Sketch sk = compile_sketch(compose_sequence(seq), sig);
  sk.sequence = seq;
  return sk;
}

std::vector<uint32_t> induction_values(const ir::Function& fn) {
  std::vector<uint32_t> out;
  auto walk = [&](const auto& self, const std::vector<StructNode>& nodes) -> void {
    for (const auto& n : nodes) {
      if (n.kind == StructNode::K::CountedLoop || n.kind == StructNode::K::WhileLoop)
        out.push_back(n.induction);
      self(self, n.kids);
      self(self, n.else_kids);
    }
  };
  walk(walk, fn.structure);
  return out;
}

}  // namespace synth
