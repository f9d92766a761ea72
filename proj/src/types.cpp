#include "synth/types.hpp"

#include <cctype>
#include <cstring>

namespace synth {

bool is_pointer(ParamType t) {
  switch (t) {
    case ParamType::PtrChar:
    case ParamType::PtrInt:
    case ParamType::PtrFloat:
    case ParamType::PtrOpaque:
      return true;
    default:
      return false;
  }
}

Scalar pointee(ParamType t) {
  switch (t) {
    case ParamType::PtrInt:
      return Scalar::Int;
    case ParamType::PtrFloat:
      return Scalar::Float;
    default:
      return Scalar::Char;
  }
}

const char* to_string(ParamType t) {
  switch (t) {
    case ParamType::Char:
      return "char";
    case ParamType::Int:
      return "int";
    case ParamType::Float:
      return "float";
    case ParamType::PtrChar:
      return "char*";
    case ParamType::PtrInt:
      return "int*";
    case ParamType::PtrFloat:
      return "float*";
    case ParamType::PtrOpaque:
      return "void*";
  }
  return "?";
}

const char* to_string(RetType t) {
  switch (t) {
    case RetType::Char:
      return "char";
    case RetType::Int:
      return "int";
    case RetType::Float:
      return "float";
    case RetType::Void:
      return "void";
  }
  return "?";
}

const char* to_string(Scalar s) {
  switch (s) {
    case Scalar::Char:
      return "char";
    case Scalar::Int:
      return "int";
    case Scalar::Float:
      return "float";
  }
  return "?";
}

bool Signature::observable() const {
  if (ret != RetType::Void) return true;
  for (const auto& p : params)
    if (is_pointer(p.type)) return true;
  return false;
}

int Signature::param_index(const std::string& n) const {
  for (size_t i = 0; i < params.size(); ++i)
    if (params[i].name == n) return static_cast<int>(i);
  return -1;
}

std::string Signature::render() const {
  std::string s = to_string(ret);
  s += ' ';
  s += name;
  s += '(';
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) s += ", ";
    s += to_string(params[i].type);
    s += ' ';
    s += params[i].name;
  }
  s += ')';
  return s;
}

bool BufferData::same_contents(const BufferData& o) const {
  if (elem != o.elem || cells.size() != o.cells.size()) return false;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (elem == Scalar::Float) {
      if (cells[i].f != o.cells[i].f) return false;
    } else {
      if (cells[i].i != o.cells[i].i) return false;
    }
  }
  return true;
}

namespace {

struct Lexer {
  const char* p;
  void skip() {
    while (*p && std::isspace(static_cast<unsigned char>(*p))) ++p;
  }
  bool eat(char c) {
    skip();
    if (*p == c) {
      ++p;
      return true;
    }
    return false;
  }
  std::string ident() {
    skip();
    const char* s = p;
    if (std::isalpha(static_cast<unsigned char>(*p)) || *p == '_') {
      ++p;
      while (std::isalnum(static_cast<unsigned char>(*p)) || *p == '_') ++p;
    }
    return std::string(s, p);
  }
  bool done() {
    skip();
    return *p == '\0';
  }
};

}  // namespace

Signature parse_signature(const std::string& decl) {
  Lexer lx{decl.c_str()};
  Signature sig;

  std::string rt = lx.ident();
  if (rt == "char")
    sig.ret = RetType::Char;
  else if (rt == "int")
    sig.ret = RetType::Int;
  else if (rt == "float")
    sig.ret = RetType::Float;
  else if (rt == "void")
    sig.ret = RetType::Void;
  else
    throw SignatureError("unsupported return type: '" + rt + "'");
  if (lx.eat('*')) throw SignatureError("pointer return types are not supported");

  sig.name = lx.ident();
  if (sig.name.empty()) throw SignatureError("missing function name");
  if (!lx.eat('(')) throw SignatureError("expected '(' after function name");

  if (!lx.eat(')')) {
    for (;;) {
      std::string ty = lx.ident();
      bool ptr = lx.eat('*');
      if (lx.eat('*')) throw SignatureError("multi-level pointers are not supported");
      ParamType pt;
      if (ty == "char")
        pt = ptr ? ParamType::PtrChar : ParamType::Char;
      else if (ty == "int")
        pt = ptr ? ParamType::PtrInt : ParamType::Int;
      else if (ty == "float")
        pt = ptr ? ParamType::PtrFloat : ParamType::Float;
      else if (ty == "void") {
        if (!ptr) {
          // "f(void)" — empty parameter list.
          if (!lx.eat(')')) throw SignatureError("bare 'void' must be the whole list");
          if (!sig.params.empty()) throw SignatureError("'void' mixed with parameters");
          break;
        }
        pt = ParamType::PtrOpaque;
      } else {
        throw SignatureError("unsupported parameter type: '" + ty + "'");
      }
      std::string pname = lx.ident();
      if (pname.empty()) throw SignatureError("missing parameter name");
      if (sig.param_index(pname) >= 0)
        throw SignatureError("duplicate parameter name: '" + pname + "'");
      sig.params.push_back({pt, pname});
      if (lx.eat(')')) break;
      if (!lx.eat(',')) throw SignatureError("expected ',' or ')' in parameter list");
    }
  }
  if (!lx.done()) throw SignatureError("trailing characters after signature");
  if (!sig.observable())
    throw SignatureError("signature has no observable output (void return, no pointer params)");
  return sig;
}

}  // namespace synth
