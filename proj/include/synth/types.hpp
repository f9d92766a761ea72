#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace synth {

// Scalar element kinds that can live in a buffer or be passed by value.
enum class Scalar : uint8_t { Char, Int, Float };

enum class ParamType : uint8_t {
  Char,
  Int,
  Float,
  PtrChar,
  PtrInt,
  PtrFloat,
  PtrOpaque,
};

enum class RetType : uint8_t { Char, Int, Float, Void };

constexpr int kNumParamTypes = 7;

bool is_pointer(ParamType t);
// Element kind behind a pointer type. PtrOpaque is treated as char-sized
// storage, so its pointee is Char.
Scalar pointee(ParamType t);
const char* to_string(ParamType t);
const char* to_string(RetType t);
const char* to_string(Scalar s);

struct Param {
  ParamType type;
  std::string name;
};

// A C-style function signature restricted to char/int/float scalars and
// pointers to them. This is the entire interface the synthesizer sees.
struct Signature {
  RetType ret = RetType::Void;
  std::string name;
  std::vector<Param> params;

  bool observable() const;  // a return value or at least one pointer param
  int param_index(const std::string& name) const;  // -1 if absent
std::string render() const;
};

struct SignatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses declarations like "float f(float *a, float *b, int c)".
// Accepted types: char, int, float, void (return or opaque pointer).
// Throws SignatureError on anything else, on duplicate parameter names,
// and on signatures with no observable output.
Signature parse_signature(const std::string& decl);

// One 8-byte cell. The interpretation (i vs f) always comes from a type
// tag carried alongside, never from the cell itself.
union Word {
  int64_t i;
  double f;
};

inline Word word_i(int64_t v) {
  Word w;
  w.i = v;
  return w;
}
inline Word word_f(double v) {
  Word w;
  w.f = v;
  return w;
}

// Contents of one buffer argument.
struct BufferData {
  Scalar elem = Scalar::Int;
  std::vector<Word> cells;

  size_t len() const { return cells.size(); }
  bool same_contents(const BufferData& o) const;
};

// A single argument value. Buffers are identified by the index of the
// parameter they were passed through; contents live in the Example.
struct Value {
  enum class Kind : uint8_t { Char, Int, Float, Buf } kind = Kind::Int;
  Word scalar = word_i(0);
  uint32_t buf_param = 0;  // Kind::Buf: which parameter
  Scalar elem = Scalar::Int;
  uint32_t len = 0;

  static Value of_char(int64_t c) {
    Value v;
    v.kind = Kind::Char;
    v.scalar = word_i(c & 0xff);
    return v;
  }
  static Value of_int(int64_t i) {
    Value v;
    v.kind = Kind::Int;
    v.scalar = word_i(i);
    return v;
  }
  static Value of_float(double f) {
    Value v;
    v.kind = Kind::Float;
    v.scalar = word_f(f);
    return v;
  }
  static Value of_buf(uint32_t param, Scalar elem, uint32_t len) {
    Value v;
    v.kind = Kind::Buf;
    v.buf_param = param;
    v.elem = elem;
    v.len = len;
    return v;
  }
};

// One observed input/output pair. in_bufs/out_bufs are indexed by
// parameter position and populated exactly for pointer parameters;
// out_bufs holds the contents after the oracle ran.
struct Example {
  std::vector<Value> inputs;
  std::vector<std::optional<BufferData>> in_bufs;
  std::vector<std::optional<BufferData>> out_bufs;
  std::optional<Value> returned;
};

struct IntInterval {
  int64_t lo = 0, hi = 0;
};
struct FloatInterval {
  double lo = 0, hi = 0;
};

struct SamplingConfig {
  IntInterval int_range{-16, 16};
  FloatInterval float_range{-8.0, 8.0};
  IntInterval char_range{32, 126};
  IntInterval buf_len{2, 8};
  int examples = 32;
  uint64_t seed = 0;
  bool string_mode = false;  // plant a zero terminator in char buffers
  double float_tol = 1e-5;
};

struct ProblemSpec {
  Signature sig;
  SamplingConfig cfg;
  std::vector<Example> examples;
};

}  // namespace synth
