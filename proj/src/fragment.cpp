#include "synth/fragment.hpp"

#include <sstream>

namespace synth {

int slot_count(FragmentKind k) {
  switch (k) {
    case FragmentKind::Linear:
    case FragmentKind::AffineIndex:
    case FragmentKind::Start:
    case FragmentKind::End:
      return 0;
    case FragmentKind::GatherIndex:
    case FragmentKind::Accumulate:
    case FragmentKind::StoreOutput:
    case FragmentKind::FixedLoop:
    case FragmentKind::ArgLoop:
    case FragmentKind::WhileLoop:
    case FragmentKind::If:
      return 1;
    case FragmentKind::IfElse:
    case FragmentKind::Seq:
      return 2;
  }
  return 0;
}

const char* kind_name(FragmentKind k) {
  switch (k) {
    case FragmentKind::Linear: return "linear";
    case FragmentKind::AffineIndex: return "affine-index";
    case FragmentKind::GatherIndex: return "gather";
    case FragmentKind::Accumulate: return "accumulate";
    case FragmentKind::StoreOutput: return "store-output";
    case FragmentKind::FixedLoop: return "fixed-loop";
    case FragmentKind::ArgLoop: return "arg-loop";
    case FragmentKind::WhileLoop: return "while-loop";
    case FragmentKind::If: return "if";
    case FragmentKind::IfElse: return "if-else";
    case FragmentKind::Seq: return "seq";
    case FragmentKind::Start: return "f_start";
    case FragmentKind::End: return "f_end";
  }
  return "?";
}

bool Fragment::operator==(const Fragment& o) const {
  return kind == o.kind && arg == o.arg && bound == o.bound && children == o.children;
}

namespace {

bool insert_first_empty(Fragment& a, const Fragment& b) {
  int slots = slot_count(a.kind);
  for (int i = 0; i < slots; ++i) {
    if (i < static_cast<int>(a.children.size())) {
      if (insert_first_empty(a.children[i], b)) return true;
    } else {
      a.children.push_back(b);
      return true;
    }
  }
  return false;
}

bool is_identity(FragmentKind k) {
  return k == FragmentKind::Start || k == FragmentKind::End;
}

}  // namespace

Fragment compose(Fragment a, Fragment b) {
  if (is_identity(a.kind)) return b;
  if (is_identity(b.kind)) return a;
  if (insert_first_empty(a, b)) return a;
  Fragment s;
  s.kind = FragmentKind::Seq;
  s.children.push_back(std::move(a));
  s.children.push_back(std::move(b));
  return s;
}

Fragment compose_sequence(const std::vector<Fragment>& seq) {
  Fragment acc;
  acc.kind = FragmentKind::Start;
  for (const auto& f : seq) acc = compose(std::move(acc), f);
  return acc;
}

namespace {

void flatten_into(const Fragment& f, std::vector<Fragment>& out) {
  Fragment bare = f;
  bare.children.clear();
  out.push_back(std::move(bare));
  for (const auto& c : f.children) flatten_into(c, out);
}

}  // namespace

std::vector<Fragment> flatten(const Fragment& tree) {
  std::vector<Fragment> out;
  if (!is_identity(tree.kind)) flatten_into(tree, out);
  return out;
}

namespace {

const char* shape_name(ParamType t) {
  switch (t) {
    case ParamType::Char: return "char";
    case ParamType::Int: return "int";
    case ParamType::Float: return "float";
    case ParamType::PtrChar: return "ptr-char";
    case ParamType::PtrInt: return "ptr-int";
    case ParamType::PtrFloat: return "ptr-float";
    case ParamType::PtrOpaque: return "ptr-opaque";
  }
  return "?";
}

}  // namespace

std::string fragment_key(const Fragment& f, const Signature& sig) {
  switch (f.kind) {
    case FragmentKind::GatherIndex:
    case FragmentKind::StoreOutput:
    case FragmentKind::ArgLoop:
      return std::string(kind_name(f.kind)) + "(" + shape_name(sig.params[f.arg].type) + ")";
    case FragmentKind::FixedLoop:
      return "fixed-loop(const)";
    default:
      return kind_name(f.kind);
  }
}

std::string print_fragment(const Fragment& f, const Signature& sig) {
  switch (f.kind) {
    case FragmentKind::GatherIndex:
    case FragmentKind::StoreOutput:
    case FragmentKind::ArgLoop:
      return std::string(kind_name(f.kind)) + "(" + sig.params[f.arg].name + ")";
    case FragmentKind::FixedLoop:
      return std::string(kind_name(f.kind)) + "(" + std::to_string(f.bound) + ")";
    default:
      return kind_name(f.kind);
  }
}

std::string print_sequence(const std::vector<Fragment>& seq, const Signature& sig) {
  std::string out;
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i) out += " ∘ ";
    out += print_fragment(seq[i], sig);
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

Fragment parse_fragment(const std::string& tok, const Signature& sig) {
  std::string name = tok;
  std::string arg;
  size_t open = tok.find('(');
  if (open != std::string::npos) {
    if (tok.back() != ')') throw FragmentError("malformed fragment: " + tok);
    name = trim(tok.substr(0, open));
    arg = trim(tok.substr(open + 1, tok.size() - open - 2));
  }
  static const std::pair<const char*, FragmentKind> kinds[] = {
      {"linear", FragmentKind::Linear},
      {"affine-index", FragmentKind::AffineIndex},
      {"gather", FragmentKind::GatherIndex},
      {"accumulate", FragmentKind::Accumulate},
      {"store-output", FragmentKind::StoreOutput},
      {"fixed-loop", FragmentKind::FixedLoop},
      {"arg-loop", FragmentKind::ArgLoop},
      {"while-loop", FragmentKind::WhileLoop},
      {"if", FragmentKind::If},
      {"if-else", FragmentKind::IfElse},
      {"seq", FragmentKind::Seq},
  };
  Fragment f;
  f.kind = FragmentKind::Linear;
  bool found = false;
  for (const auto& [n, k] : kinds) {
    if (name == n) {
      f.kind = k;
      found = true;
      break;
    }
  }
  if (!found) throw FragmentError("unknown fragment kind: " + name);

  switch (f.kind) {
    case FragmentKind::FixedLoop: {
      if (arg.empty()) throw FragmentError("fixed-loop needs a bound");
      f.bound = std::stoll(arg);
      if (f.bound < 1) throw FragmentError("fixed-loop bound must be positive");
      break;
    }
    case FragmentKind::GatherIndex:
    case FragmentKind::StoreOutput: {
      int p = sig.param_index(arg);
      if (p < 0 || !is_pointer(sig.params[p].type))
        throw FragmentError(std::string(kind_name(f.kind)) + " needs a pointer param: " + arg);
      f.arg = static_cast<uint32_t>(p);
      break;
    }
    case FragmentKind::ArgLoop: {
      int p = sig.param_index(arg);
      if (p < 0 || sig.params[p].type != ParamType::Int)
        throw FragmentError("arg-loop needs an int param: " + arg);
      f.arg = static_cast<uint32_t>(p);
      break;
    }
    default:
      if (!arg.empty()) throw FragmentError(std::string(kind_name(f.kind)) + " takes no argument");
      break;
  }
  return f;
}

}  // namespace

std::vector<Fragment> parse_sequence(const std::string& text, const Signature& sig) {
  std::vector<Fragment> out;
  std::string rest = text;
  const std::string sep = "∘";
  size_t pos = 0;
  while (pos <= rest.size()) {
    size_t next = rest.find(sep, pos);
    std::string tok =
        trim(next == std::string::npos ? rest.substr(pos) : rest.substr(pos, next - pos));
    if (!tok.empty()) out.push_back(parse_fragment(tok, sig));
    if (next == std::string::npos) break;
    pos = next + sep.size();
  }
  if (out.empty()) throw FragmentError("empty fragment sequence");
  return out;
}

std::vector<Fragment> instantiate_population(const Signature& sig) {
  std::vector<Fragment> out;
  auto add = [&](FragmentKind k, uint32_t arg = kNoArg, int64_t bound = 0) {
    Fragment f;
    f.kind = k;
    f.arg = arg;
    f.bound = bound;
    out.push_back(std::move(f));
  };
  add(FragmentKind::Linear);
  add(FragmentKind::AffineIndex);
  for (uint32_t p = 0; p < sig.params.size(); ++p)
    if (is_pointer(sig.params[p].type)) add(FragmentKind::GatherIndex, p);
  add(FragmentKind::Accumulate);
  for (uint32_t p = 0; p < sig.params.size(); ++p)
    if (is_pointer(sig.params[p].type)) add(FragmentKind::StoreOutput, p);
  for (int64_t n = 1; n <= 8; ++n) add(FragmentKind::FixedLoop, kNoArg, n);
  for (uint32_t p = 0; p < sig.params.size(); ++p)
    if (sig.params[p].type == ParamType::Int) add(FragmentKind::ArgLoop, p);
  add(FragmentKind::WhileLoop);
  add(FragmentKind::If);
  add(FragmentKind::IfElse);
  add(FragmentKind::Seq);
  return out;
}

}  // namespace synth
