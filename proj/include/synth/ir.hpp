#pragma once

#include <optional>
#include <string>
#include <vector>

#include "synth/types.hpp"

namespace synth::ir {

enum class Ty : uint8_t { I64, F64, I1, PtrChar, PtrInt, PtrFloat, Void };

bool is_ptr_ty(Ty t);
Scalar ptr_elem(Ty t);
Ty param_ty(ParamType t);
Ty scalar_ty(Scalar s);  // Char promotes to I64

enum class Op : uint8_t {
  Add,
  Sub,
  Mul,
  SDiv,
  FAdd,
  FSub,
  FMul,
  FDiv,
  ICmpEq,
  ICmpNe,
  ICmpSlt,
  ICmpSle,
  ICmpSgt,
  ICmpSge,
  FCmpEq,
  FCmpNe,
  FCmpLt,
  FCmpLe,
  FCmpGt,
  FCmpGe,
  Select,
  Load,
  Store,
  SIToFP,
  FPToSI,
  Phi,
  Br,
  CondBr,
  Ret,
};

const char* to_string(Op op);
bool is_terminator(Op op);
bool is_icmp(Op op);
bool is_fcmp(Op op);

// Operands are tagged 32-bit references:
//   plain value id            v < 0x40000000
//   constant-table entry      0x80000000 | index
//   pending phi input slot    0xC0000000 | slot
// kNoOperand marks absent operands.
constexpr uint32_t kNoOperand = 0xffffffffu;
constexpr uint32_t kConstTag = 0x80000000u;
constexpr uint32_t kPendingTag = 0xc0000000u;
constexpr uint32_t kTagMask = 0xc0000000u;

inline bool is_const_ref(uint32_t o) { return (o & kTagMask) == kConstTag; }
inline bool is_pending_ref(uint32_t o) { return (o & kTagMask) == kPendingTag; }
inline bool is_value_ref(uint32_t o) { return o != kNoOperand && (o & kTagMask) == 0; }
inline uint32_t const_ref(uint32_t idx) { return kConstTag | idx; }
inline uint32_t pending_ref(uint32_t slot) { return kPendingTag | slot; }
inline uint32_t ref_index(uint32_t o) { return o & ~kTagMask; }

// One instruction. Field use by op:
//   binop/cmp    a, b
//   Select       a = cond, b, c
//   Load         a = pointer, b = index
//   Store        a = value, b = pointer, c = index
//   casts        a
//   Phi          a = value from pred x, b = value from pred y
//   Br           x = target
//   CondBr       a = cond, x = true target, y = false target
//   Ret          a = value or kNoOperand
struct Instr {
  Op op;
  Ty ty = Ty::Void;  // result type
  uint32_t result = kNoOperand;
  uint32_t a = kNoOperand, b = kNoOperand, c = kNoOperand;
  uint32_t x = kNoOperand, y = kNoOperand;
};

struct ConstVal {
  Ty ty;
  Word w;
};

// A straight-line run of instructions or an open hole to be filled by the
// search. Hole segments carry no code of their own.
struct Segment {
  bool is_hole = false;
  uint32_t hole_id = 0;
  std::vector<Instr> code;
};

struct Block {
  std::vector<Instr> phis;
  std::vector<Segment> body;
  // Placeholders anchored here; their materialized instructions execute
  // after the body segments and before the stores.
  std::vector<uint32_t> anchored;
  std::vector<Instr> stores;
  Instr term;
  std::vector<uint32_t> preds;  // derived; see recompute_preds
};

enum class PhRole : uint8_t { Cond, AccInit, StoreVal, Ret };

// A typed slot the secondary search binds: branch conditions, accumulator
// seeds, stored values, return values. `vid` is the value id other
// instructions reference; `scratch_base` reserves ids for instructions a
// binding may materialize at the anchor (at most kScratchIds of them).
struct Placeholder {
  Ty ty;
  PhRole role;
  uint32_t vid;
  uint32_t anchor;
  uint32_t scratch_base;
};

constexpr uint32_t kScratchIds = 2;

// Location of a phi input left open for the secondary search.
struct PendingPhi {
  uint32_t block;
  uint32_t phi_idx;
};

struct HoleInfo {
  uint32_t block;
  uint32_t segment;
  bool affine;  // seed the enumerator with affine index expressions
  uint32_t id_base;
};

// Every hole reserves id_base .. id_base + kMaxFillUnits*kIdsPerFillUnit
// value ids at compile time. One enumeration unit may expand to up to
// kIdsPerFillUnit instructions (a seeded load plus its index arithmetic).
constexpr uint32_t kIdsPerFillUnit = 3;
constexpr uint32_t kMaxFillUnits = 8;

// Rendering skeleton recorded while fragments are lowered; the pseudo-C
// printer walks this instead of re-discovering loops from the CFG.
struct StructNode {
  enum class K : uint8_t { Straight, CountedLoop, WhileLoop, If, IfElse };
  K kind = K::Straight;
  uint32_t block = 0;      // Straight: the block; loops: header
  uint32_t latch = 0;      // loops
  uint32_t exit = 0;       // loops / join block for ifs
  uint32_t induction = 0;  // loops: value id of the counter phi
  uint32_t bound = kNoOperand;  // counted loops: operand compared against
  uint32_t cond_ph = 0;         // while/if: placeholder index of the condition
  std::vector<StructNode> kids;       // loop body / then-branch
  std::vector<StructNode> else_kids;  // if-else only
};

struct Function {
  Signature sig;
  std::vector<Ty> value_ty;
  std::vector<std::string> value_name;
  std::vector<ConstVal> consts;
  std::vector<Block> blocks;  // blocks[0] is the entry
  std::vector<Placeholder> placeholders;
  std::vector<PendingPhi> pending;
  std::vector<HoleInfo> holes;
  std::vector<StructNode> structure;
  bool bounds_checked = true;

  uint32_t num_values() const { return static_cast<uint32_t>(value_ty.size()); }
  uint32_t new_value(Ty t, std::string name = "");
  uint32_t add_const_i(int64_t v);
  uint32_t add_const_f(double v);
  uint32_t add_const_bool(bool v);
  void recompute_preds();
};

// Structural checks: reachability, terminators, phi/pred agreement, operand
// typing, and defs dominating uses. Returns an explanation for the first
// violation, or nullopt for a well-formed function.
std::optional<std::string> validate(const Function& f);

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Marks every checked access as plain. Interpretation semantics are
// unchanged (the interpreter always guards memory); rendered output drops
// the check annotations.
Function strip_bounds_checks(const Function& f);

std::string to_text(const Function& f);

}  // namespace synth::ir
