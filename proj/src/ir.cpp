#include "synth/ir.hpp"

#include <algorithm>
#include <sstream>

#include "synth/analysis.hpp"

namespace synth::ir {

bool is_ptr_ty(Ty t) {
  return t == Ty::PtrChar || t == Ty::PtrInt || t == Ty::PtrFloat;
}

Scalar ptr_elem(Ty t) {
  switch (t) {
    case Ty::PtrInt:
      return Scalar::Int;
    case Ty::PtrFloat:
      return Scalar::Float;
    default:
      return Scalar::Char;
  }
}

Ty param_ty(ParamType t) {
  switch (t) {
    case ParamType::Char:
    case ParamType::Int:
      return Ty::I64;
    case ParamType::Float:
      return Ty::F64;
    case ParamType::PtrChar:
    case ParamType::PtrOpaque:
      return Ty::PtrChar;
    case ParamType::PtrInt:
      return Ty::PtrInt;
    case ParamType::PtrFloat:
      return Ty::PtrFloat;
  }
  return Ty::I64;
}

Ty scalar_ty(Scalar s) { return s == Scalar::Float ? Ty::F64 : Ty::I64; }

const char* to_string(Op op) {
  switch (op) {
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::SDiv: return "sdiv";
    case Op::FAdd: return "fadd";
    case Op::FSub: return "fsub";
    case Op::FMul: return "fmul";
    case Op::FDiv: return "fdiv";
    case Op::ICmpEq: return "icmp.eq";
    case Op::ICmpNe: return "icmp.ne";
    case Op::ICmpSlt: return "icmp.slt";
    case Op::ICmpSle: return "icmp.sle";
    case Op::ICmpSgt: return "icmp.sgt";
    case Op::ICmpSge: return "icmp.sge";
    case Op::FCmpEq: return "fcmp.eq";
    case Op::FCmpNe: return "fcmp.ne";
    case Op::FCmpLt: return "fcmp.lt";
    case Op::FCmpLe: return "fcmp.le";
    case Op::FCmpGt: return "fcmp.gt";
    case Op::FCmpGe: return "fcmp.ge";
    case Op::Select: return "select";
    case Op::Load: return "load";
    case Op::Store: return "store";
    case Op::SIToFP: return "sitofp";
    case Op::FPToSI: return "fptosi";
    case Op::Phi: return "phi";
    case Op::Br: return "br";
    case Op::CondBr: return "condbr";
    case Op::Ret: return "ret";
  }
  return "?";
}

bool is_terminator(Op op) { return op == Op::Br || op == Op::CondBr || op == Op::Ret; }

bool is_icmp(Op op) {
  return op >= Op::ICmpEq && op <= Op::ICmpSge;
}

bool is_fcmp(Op op) {
  return op >= Op::FCmpEq && op <= Op::FCmpGe;
}

uint32_t Function::new_value(Ty t, std::string name) {
  value_ty.push_back(t);
  value_name.push_back(std::move(name));
  return static_cast<uint32_t>(value_ty.size() - 1);
}

uint32_t Function::add_const_i(int64_t v) {
  for (size_t i = 0; i < consts.size(); ++i)
    if (consts[i].ty == Ty::I64 && consts[i].w.i == v) return const_ref(static_cast<uint32_t>(i));
  consts.push_back({Ty::I64, word_i(v)});
  return const_ref(static_cast<uint32_t>(consts.size() - 1));
}

uint32_t Function::add_const_f(double v) {
  for (size_t i = 0; i < consts.size(); ++i)
    if (consts[i].ty == Ty::F64 && consts[i].w.f == v) return const_ref(static_cast<uint32_t>(i));
  consts.push_back({Ty::F64, word_f(v)});
  return const_ref(static_cast<uint32_t>(consts.size() - 1));
}

uint32_t Function::add_const_bool(bool v) {
  for (size_t i = 0; i < consts.size(); ++i)
    if (consts[i].ty == Ty::I1 && consts[i].w.i == (v ? 1 : 0))
      return const_ref(static_cast<uint32_t>(i));
  consts.push_back({Ty::I1, word_i(v ? 1 : 0)});
  return const_ref(static_cast<uint32_t>(consts.size() - 1));
}

void Function::recompute_preds() {
  for (auto& b : blocks) b.preds.clear();
  for (uint32_t i = 0; i < blocks.size(); ++i) {
    const Instr& t = blocks[i].term;
    if (t.op == Op::Br) {
      blocks[t.x].preds.push_back(i);
    } else if (t.op == Op::CondBr) {
      blocks[t.x].preds.push_back(i);
      if (t.y != t.x) blocks[t.y].preds.push_back(i);
    }
  }
}

namespace {

// Type of an operand reference, or nullopt when it cannot be determined
// statically (pending phi inputs).
std::optional<Ty> operand_ty(const Function& f, uint32_t o) {
  if (o == kNoOperand) return std::nullopt;
  if (is_const_ref(o)) {
    uint32_t i = ref_index(o);
    if (i >= f.consts.size()) return std::nullopt;
    return f.consts[i].ty;
  }
  if (is_pending_ref(o)) return std::nullopt;
  uint32_t i = ref_index(o);
  if (i >= f.value_ty.size()) return std::nullopt;
  return f.value_ty[i];
}

struct UseChecker {
  const Function& f;
  const DomTree& dt;
  // def_block[v] = block defining value v (params get entry).
  std::vector<uint32_t> def_block;

  explicit UseChecker(const Function& fn, const DomTree& tree) : f(fn), dt(tree) {
    def_block.assign(f.num_values(), kNoOperand);
    for (size_t i = 0; i < f.sig.params.size(); ++i) def_block[i] = 0;
    for (const auto& ph : f.placeholders) def_block[ph.vid] = ph.anchor;
    for (uint32_t b = 0; b < f.blocks.size(); ++b) {
      auto note = [&](const Instr& ins) {
        if (ins.result != kNoOperand) def_block[ins.result] = b;
      };
      for (const auto& ins : f.blocks[b].phis) note(ins);
      for (const auto& seg : f.blocks[b].body)
        for (const auto& ins : seg.code) note(ins);
      for (const auto& ins : f.blocks[b].stores) note(ins);
    }
  }

  std::optional<std::string> check_use(uint32_t o, uint32_t user_block) const {
    if (!is_value_ref(o)) return std::nullopt;
    uint32_t v = ref_index(o);
    if (v >= f.num_values()) return "operand references value id out of range";
    uint32_t db = def_block[v];
    if (db == kNoOperand) return "operand references a value with no definition";
    if (!dominates(dt, db, user_block))
      return "use of value " + std::to_string(v) + " is not dominated by its definition";
    return std::nullopt;
  }
};

}  // namespace

std::optional<std::string> validate(const Function& f) {
  if (f.blocks.empty()) return "function has no blocks";

  // Terminators and instruction placement.
  for (uint32_t b = 0; b < f.blocks.size(); ++b) {
    const Block& blk = f.blocks[b];
    if (!is_terminator(blk.term.op)) return "block " + std::to_string(b) + " lacks a terminator";
    for (const auto& ins : blk.phis)
      if (ins.op != Op::Phi) return "non-phi instruction in phi section";
    for (const auto& seg : blk.body)
      for (const auto& ins : seg.code)
        if (is_terminator(ins.op) || ins.op == Op::Phi)
          return "terminator or phi in block body";
    for (const auto& ins : blk.stores)
      if (ins.op != Op::Store) return "non-store instruction in store section";
    if (blk.term.op == Op::Br && blk.term.x >= f.blocks.size())
      return "branch target out of range";
    if (blk.term.op == Op::CondBr &&
        (blk.term.x >= f.blocks.size() || blk.term.y >= f.blocks.size()))
      return "branch target out of range";
    if (blk.term.op == Op::Ret) {
      bool want = f.sig.ret != RetType::Void;
      if (want != (blk.term.a != kNoOperand)) return "return value does not match signature";
    }
  }

  // Reachability; dominance_tree also rejects unreachable blocks but we want
  // a clear message here.
  {
    std::vector<bool> seen(f.blocks.size(), false);
    std::vector<uint32_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      uint32_t b = stack.back();
      stack.pop_back();
      const Instr& t = f.blocks[b].term;
      for (uint32_t nxt : {t.x, t.y}) {
        if (nxt == kNoOperand || nxt >= f.blocks.size()) continue;
        if (t.op == Op::Br && nxt != t.x) continue;
        if (t.op == Op::Ret) continue;
        if (!seen[nxt]) {
          seen[nxt] = true;
          stack.push_back(nxt);
        }
      }
    }
    for (uint32_t b = 0; b < f.blocks.size(); ++b)
      if (!seen[b]) return "block " + std::to_string(b) + " is unreachable";
  }

  Function& mut = const_cast<Function&>(f);
  mut.recompute_preds();
  if (!f.blocks[0].preds.empty()) return "entry block has predecessors";

  // Phi inputs must name the block's predecessors exactly.
  for (uint32_t b = 0; b < f.blocks.size(); ++b) {
    for (const auto& phi : f.blocks[b].phis) {
      const auto& preds = f.blocks[b].preds;
      if (preds.size() != 2) return "phi in block with pred count != 2";
      bool ok = (phi.x == preds[0] && phi.y == preds[1]) ||
                (phi.x == preds[1] && phi.y == preds[0]);
      if (!ok) return "phi inputs do not match block predecessors";
    }
  }

  DomTree dt = dominance_tree(f);
  UseChecker uc(f, dt);

  for (uint32_t b = 0; b < f.blocks.size(); ++b) {
    const Block& blk = f.blocks[b];
    for (const auto& phi : blk.phis) {
      // A phi input must be dominated by the matching predecessor, not by
      // the phi's own block.
      for (auto [val, pred] : {std::pair{phi.a, phi.x}, std::pair{phi.b, phi.y}}) {
        if (!is_value_ref(val)) continue;
        if (auto err = uc.check_use(val, pred)) return err;
      }
    }
    auto check_ins = [&](const Instr& ins) -> std::optional<std::string> {
      for (uint32_t o : {ins.a, ins.b, ins.c})
        if (auto err = uc.check_use(o, b)) return err;
      // Typing for the common shapes.
      if (ins.op == Op::Load) {
        auto pt = operand_ty(f, ins.a);
        auto it = operand_ty(f, ins.b);
        if (!pt || !is_ptr_ty(*pt)) return "load from a non-pointer";
        if (it && *it != Ty::I64) return "load index is not an int";
      }
      if (ins.op == Op::Store) {
        auto pt = operand_ty(f, ins.b);
        if (!pt || !is_ptr_ty(*pt)) return "store to a non-pointer";
      }
      return std::nullopt;
    };
    for (const auto& seg : blk.body)
      for (const auto& ins : seg.code)
        if (auto err = check_ins(ins)) return err;
    for (const auto& ins : blk.stores)
      if (auto err = check_ins(ins)) return err;
    if (blk.term.op == Op::CondBr)
      if (auto err = uc.check_use(blk.term.a, b)) return err;
    if (blk.term.op == Op::Ret)
      if (auto err = uc.check_use(blk.term.a, b)) return err;
  }
  return std::nullopt;
}

Function strip_bounds_checks(const Function& f) {
  Function g = f;
  g.bounds_checked = false;
  return g;
}

namespace {

std::string operand_str(const Function& f, uint32_t o) {
  if (o == kNoOperand) return "_";
  if (is_const_ref(o)) {
    const ConstVal& c = f.consts[ref_index(o)];
    if (c.ty == Ty::F64) {
      std::ostringstream os;
      os << c.w.f;
      return os.str();
    }
    return std::to_string(c.w.i);
  }
  if (is_pending_ref(o)) return "<pending" + std::to_string(ref_index(o)) + ">";
  uint32_t v = ref_index(o);
  if (v < f.value_name.size() && !f.value_name[v].empty()) return "%" + f.value_name[v];
  return "%" + std::to_string(v);
}

void print_instr(std::ostringstream& os, const Function& f, const Instr& ins) {
  os << "  ";
  if (ins.result != kNoOperand) os << operand_str(f, ins.result) << " = ";
  os << to_string(ins.op);
  switch (ins.op) {
    case Op::Phi:
      os << " [b" << ins.x << ": " << operand_str(f, ins.a) << "], [b" << ins.y << ": "
         << operand_str(f, ins.b) << "]";
      break;
    case Op::Br:
      os << " b" << ins.x;
      break;
    case Op::CondBr:
      os << " " << operand_str(f, ins.a) << ", b" << ins.x << ", b" << ins.y;
      break;
    case Op::Ret:
      if (ins.a != kNoOperand) os << " " << operand_str(f, ins.a);
      break;
    case Op::Load:
      os << " " << operand_str(f, ins.a) << "[" << operand_str(f, ins.b) << "]";
      break;
    case Op::Store:
      os << " " << operand_str(f, ins.b) << "[" << operand_str(f, ins.c)
         << "] = " << operand_str(f, ins.a);
      break;
    default:
      for (uint32_t o : {ins.a, ins.b, ins.c}) {
        if (o == kNoOperand) break;
        os << " " << operand_str(f, o);
      }
      break;
  }
  os << "\n";
}

}  // namespace

std::string to_text(const Function& f) {
  std::ostringstream os;
  os << f.sig.render() << " {\n";
  for (uint32_t b = 0; b < f.blocks.size(); ++b) {
    os << "b" << b << ":\n";
    const Block& blk = f.blocks[b];
    for (const auto& ins : blk.phis) print_instr(os, f, ins);
    for (const auto& seg : blk.body) {
      if (seg.is_hole) {
        os << "  <hole " << seg.hole_id << ">\n";
        continue;
      }
      for (const auto& ins : seg.code) print_instr(os, f, ins);
    }
    for (const auto& ins : blk.stores) print_instr(os, f, ins);
    print_instr(os, f, blk.term);
  }
  os << "}\n";
  return os.str();
}

}  // namespace synth::ir
