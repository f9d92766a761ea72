#include "synth/render.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace synth {

using namespace synth::ir;

namespace {

const char* c_type(Ty t) {
  switch (t) {
    case Ty::F64: return "float";
    case Ty::I1: return "int";
    default: return "int";
  }
}

const char* binop_sym(Op op) {
  switch (op) {
    case Op::Add:
    case Op::FAdd: return "+";
    case Op::Sub:
    case Op::FSub: return "-";
    case Op::Mul:
    case Op::FMul: return "*";
    case Op::SDiv:
    case Op::FDiv: return "/";
    case Op::ICmpEq:
    case Op::FCmpEq: return "==";
    case Op::ICmpNe:
    case Op::FCmpNe: return "!=";
    case Op::ICmpSlt:
    case Op::FCmpLt: return "<";
    case Op::ICmpSle:
    case Op::FCmpLe: return "<=";
    case Op::ICmpSgt:
    case Op::FCmpGt: return ">";
    case Op::ICmpSge:
    case Op::FCmpGe: return ">=";
    default: return "?";
  }
}

struct Renderer {
  const Function& fn;
  std::ostringstream out;
  std::map<uint32_t, std::string> names;
  std::set<const Instr*> skipped;  // instructions folded into a condition
  // block id -> instrs, in execution order (segments then stores)
  std::vector<std::vector<const Instr*>> block_code;
  int tmp = 0;
  int indent = 0;

  explicit Renderer(const Function& f) : fn(f) {
    for (uint32_t i = 0; i < f.sig.params.size(); ++i) names[i] = f.sig.params[i].name;
    block_code.resize(f.blocks.size());
    for (uint32_t b = 0; b < f.blocks.size(); ++b) {
      for (const auto& seg : f.blocks[b].body)
        for (const auto& ins : seg.code) block_code[b].push_back(&ins);
      for (const auto& ins : f.blocks[b].stores) block_code[b].push_back(&ins);
    }
  }

  std::string name_of(uint32_t v) {
    auto it = names.find(v);
    if (it != names.end()) return it->second;
    std::string n = !fn.value_name[v].empty() ? fn.value_name[v] : "t" + std::to_string(tmp++);
    names[v] = n;
    return n;
  }

  std::string const_str(const ConstVal& c) {
    if (c.ty == Ty::F64) {
      std::ostringstream os;
      os << c.w.f;
      std::string s = os.str();
      if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
      return s;
    }
    return std::to_string(c.w.i);
  }

  // Definition lookup for inlining conditions out of loop headers.
  const Instr* def_in_block(uint32_t block, uint32_t v) const {
    for (const Instr* ins : block_code[block])
      if (ins->result == v) return ins;
    return nullptr;
  }

  std::string expr(uint32_t o, uint32_t inline_block) {
    if (o == kNoOperand) return "?";
    if (is_const_ref(o)) return const_str(fn.consts[ref_index(o)]);
    uint32_t v = ref_index(o);
    if (inline_block != kNoOperand) {
      if (const Instr* d = def_in_block(inline_block, v)) {
        skipped.insert(d);
        return instr_expr(*d, inline_block);
      }
    }
    return name_of(v);
  }

  std::string instr_expr(const Instr& ins, uint32_t inline_block = kNoOperand) {
    switch (ins.op) {
      case Op::Load:
        return expr(ins.a, inline_block) + "[" + expr(ins.b, inline_block) + "]";
      case Op::Select:
        return expr(ins.a, inline_block) + " ? " + expr(ins.b, inline_block) + " : " +
               expr(ins.c, inline_block);
      case Op::SIToFP:
        return "(float)" + expr(ins.a, inline_block);
      case Op::FPToSI:
        return "(int)" + expr(ins.a, inline_block);
      default:
        return expr(ins.a, inline_block) + " " + binop_sym(ins.op) + " " +
               expr(ins.b, inline_block);
    }
  }

  void line(const std::string& s) {
    for (int i = 0; i < indent; ++i) out << "  ";
    out << s << "\n";
  }

  void print_block_code(uint32_t b) {
    for (const Instr* ins : block_code[b]) {
      if (skipped.count(ins)) continue;
      if (ins->op == Op::Store) {
        line(expr(ins->b, kNoOperand) + "[" + expr(ins->c, kNoOperand) +
             "] = " + expr(ins->a, kNoOperand) + ";");
      } else {
        line(std::string(c_type(ins->ty)) + " " + name_of(ins->result) + " = " +
             instr_expr(*ins) + ";");
      }
    }
    const Instr& t = fn.blocks[b].term;
    if (t.op == Op::Ret && t.a != kNoOperand) line("return " + expr(t.a, kNoOperand) + ";");
  }

  // Accumulator phis: every header phi except the loop counter.
  std::vector<const Instr*> acc_phis(uint32_t header, uint32_t induction) const {
    std::vector<const Instr*> out_phis;
    for (const auto& phi : fn.blocks[header].phis)
      if (phi.result != induction) out_phis.push_back(&phi);
    return out_phis;
  }

  // Conditions fold into the if/while line; their defs must be claimed
  // before the head block's statements print.
  void mark_conds(const std::vector<StructNode>& nodes) {
    for (const auto& n : nodes) {
      if (n.kind == StructNode::K::If || n.kind == StructNode::K::IfElse ||
          n.kind == StructNode::K::WhileLoop)
        (void)expr(fn.blocks[n.block].term.a, n.block);
      mark_conds(n.kids);
      mark_conds(n.else_kids);
    }
  }

  void walk(const std::vector<StructNode>& nodes) {
    for (const auto& n : nodes) {
      switch (n.kind) {
        case StructNode::K::Straight:
          print_block_code(n.block);
          break;
        case StructNode::K::CountedLoop:
        case StructNode::K::WhileLoop: {
          auto accs = acc_phis(n.block, n.induction);
          for (const Instr* phi : accs) {
            // preheader input: phi operand a pairs with pred x
            uint32_t init = phi->x == n.latch ? phi->b : phi->a;
            line(std::string(c_type(phi->ty)) + " " + name_of(phi->result) + " = " +
                 expr(init, kNoOperand) + ";");
          }
          std::string iv = name_of(n.induction);
          if (n.kind == StructNode::K::CountedLoop) {
            line("for (int " + iv + " = 0; " + iv + " < " + expr(n.bound, kNoOperand) +
                 "; ++" + iv + ") {");
          } else {
            uint32_t cond = fn.blocks[n.block].term.a;
            line("int " + iv + " = 0;");
            line("while (" + expr(cond, n.block) + ") {");
          }
          ++indent;
          walk(n.kids);
          for (const Instr* phi : accs) {
            uint32_t upd = phi->x == n.latch ? phi->a : phi->b;
            line(name_of(phi->result) + " = " + expr(upd, kNoOperand) + ";");
          }
          if (n.kind == StructNode::K::WhileLoop) line(iv + " = " + iv + " + 1;");
          --indent;
          line("}");
          break;
        }
        case StructNode::K::If:
        case StructNode::K::IfElse: {
          uint32_t cond = fn.blocks[n.block].term.a;
          line("if (" + expr(cond, n.block) + ") {");
          ++indent;
          walk(n.kids);
          --indent;
          if (n.kind == StructNode::K::IfElse) {
            line("} else {");
            ++indent;
            walk(n.else_kids);
            --indent;
          }
          line("}");
          break;
        }
      }
    }
  }
};

}  // namespace

std::string pseudo_c(const ir::Function& fn) {
  Renderer r(fn);
  r.out << fn.sig.render() << " {\n";
  r.indent = 1;
  r.mark_conds(fn.structure);
  r.walk(fn.structure);
  r.out << "}\n";
  return r.out.str();
}

}  // namespace synth
