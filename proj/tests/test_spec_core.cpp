#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <set>

#include "doctest.h"
#include "synth/jsonio.hpp"
#include "synth/spec.hpp"

using namespace synth;

namespace {

SampledInputs dot_inputs(const std::vector<double>& a, const std::vector<double>& b, int64_t c) {
  SampledInputs in;
  BufferData ba, bb;
  ba.elem = bb.elem = Scalar::Float;
  for (double v : a) ba.cells.push_back(word_f(v));
  for (double v : b) bb.cells.push_back(word_f(v));
  in.args = {Value::of_buf(0, Scalar::Float, static_cast<uint32_t>(a.size())),
             Value::of_buf(1, Scalar::Float, static_cast<uint32_t>(b.size())), Value::of_int(c)};
  in.bufs = {ba, bb, std::nullopt};
  return in;
}

}  // namespace

TEST_CASE("signature parsing accepts the supported surface syntax") {
  Signature s = parse_signature("float f(float *a, float *b, int c)");
  CHECK(s.ret == RetType::Float);
  CHECK(s.name == "f");
  REQUIRE(s.params.size() == 3);
  CHECK(s.params[0].type == ParamType::PtrFloat);
  CHECK(s.params[0].name == "a");
  CHECK(s.params[1].type == ParamType::PtrFloat);
  CHECK(s.params[2].type == ParamType::Int);
  CHECK(s.params[2].name == "c");

  Signature g = parse_signature("void g(int *x)");
  CHECK(g.ret == RetType::Void);
  REQUIRE(g.params.size() == 1);
  CHECK(g.params[0].type == ParamType::PtrInt);
}

TEST_CASE("signature parsing rejects what it cannot represent") {
  CHECK_THROWS_AS(parse_signature("int h(double d)"), SignatureError);
  CHECK_THROWS_AS(parse_signature("int h(int a, int a)"), SignatureError);
  CHECK_THROWS_AS(parse_signature("void h(int a)"), SignatureError);  // unobservable
  CHECK_THROWS_AS(parse_signature("int h(int a"), SignatureError);
  CHECK_THROWS_AS(parse_signature(""), SignatureError);
}

TEST_CASE("signatures round-trip through rendering") {
  for (const char* decl : {"float f(float* a, float* b, int c)", "void g(int* x)",
                           "int cnt(char* s, char c)", "void m(void* p, int n)"}) {
    Signature s = parse_signature(decl);
    Signature again = parse_signature(s.render());
    CHECK(s.render() == again.render());
    CHECK(s.params.size() == again.params.size());
  }
}

TEST_CASE("sampled scalars and lengths stay inside their intervals") {
  Signature sig = parse_signature("float f(float* a, float* b, int c)");
  SamplingConfig cfg;
  cfg.int_range = {1, 4};
  cfg.buf_len = {4, 8};
  std::mt19937_64 rng(7);
  for (int round = 0; round < 100; ++round) {
    SampledInputs in = sample_inputs(sig, rng, cfg);
    REQUIRE(in.args.size() == 3);
    CHECK(in.args[2].kind == Value::Kind::Int);
    CHECK(in.args[2].scalar.i >= 1);
    CHECK(in.args[2].scalar.i <= 4);
    for (int p = 0; p < 2; ++p) {
      REQUIRE(in.bufs[p].has_value());
      size_t len = in.bufs[p]->len();
      CHECK(len >= 4);
      CHECK(len <= 8);
      for (const Word& w : in.bufs[p]->cells) {
        CHECK(w.f >= cfg.float_range.lo);
        CHECK(w.f <= cfg.float_range.hi);
      }
    }
    // One length draw serves every buffer of the call.
    CHECK(in.bufs[0]->len() == in.bufs[1]->len());
  }
}

TEST_CASE("degenerate intervals pin every sample to zero") {
  Signature sig = parse_signature("float f(int* a, float x, int n)");
  SamplingConfig cfg;
  cfg.int_range = {0, 0};
  cfg.float_range = {0.0, 0.0};
  cfg.buf_len = {3, 3};
  std::mt19937_64 rng(1);
  SampledInputs in = sample_inputs(sig, rng, cfg);
  CHECK(in.args[1].scalar.f == 0.0);
  CHECK(in.args[2].scalar.i == 0);
  REQUIRE(in.bufs[0].has_value());
  REQUIRE(in.bufs[0]->len() == 3);
  for (const Word& w : in.bufs[0]->cells) CHECK(w.i == 0);
}

TEST_CASE("string mode plants a terminator inside every char buffer") {
  Signature sig = parse_signature("int slen(char* s)");
  SamplingConfig cfg;
  cfg.string_mode = true;
  std::mt19937_64 rng(3);
  for (int round = 0; round < 200; ++round) {
    SampledInputs in = sample_inputs(sig, rng, cfg);
    REQUIRE(in.bufs[0].has_value());
    bool has_zero = false;
    for (const Word& w : in.bufs[0]->cells) has_zero |= w.i == 0;
    CHECK(has_zero);
  }
}

TEST_CASE("sampling is deterministic per seed") {
  Signature sig = parse_signature("float f(float* a, float* b, int c)");
  SamplingConfig cfg;
  cfg.int_range = {1, 4};
  cfg.buf_len = {4, 8};
  std::mt19937_64 r1(99), r2(99);
  for (int round = 0; round < 20; ++round) {
    SampledInputs x = sample_inputs(sig, r1, cfg);
    SampledInputs y = sample_inputs(sig, r2, cfg);
    REQUIRE(x.bufs[0]->len() == y.bufs[0]->len());
    CHECK(x.args[2].scalar.i == y.args[2].scalar.i);
    for (size_t i = 0; i < x.bufs[0]->len(); ++i)
      CHECK(x.bufs[0]->cells[i].f == y.bufs[0]->cells[i].f);
  }
}

TEST_CASE("observing the dot oracle on known inputs") {
  auto oracle = make_builtin_oracle("dot");
  SampledInputs in = dot_inputs({0.0, 1.2, -3.4, -5.6}, {-1.0, 1.2, 2.4, 3.2}, 3);
  Example ex = observe(*oracle, in);
  REQUIRE(ex.returned.has_value());
  CHECK(ex.returned->kind == Value::Kind::Float);
  CHECK(ex.returned->scalar.f == doctest::Approx(-6.72).epsilon(1e-9));
  // Input contents survive the call.
  REQUIRE(ex.in_bufs[0].has_value());
  CHECK(ex.in_bufs[0]->cells[1].f == doctest::Approx(1.2));
}

TEST_CASE("observing a writer records both before and after contents") {
  auto oracle = make_builtin_oracle("scale");
  SampledInputs in;
  BufferData bin, bout;
  bin.elem = bout.elem = Scalar::Int;
  bin.cells = {word_i(1), word_i(2)};
  bout.cells = {word_i(0), word_i(0)};
  in.args = {Value::of_buf(0, Scalar::Int, 2), Value::of_buf(1, Scalar::Int, 2),
             Value::of_int(2)};
  in.bufs = {bin, bout, std::nullopt};
  Example ex = observe(*oracle, in);
  CHECK_FALSE(ex.returned.has_value());
  REQUIRE(ex.out_bufs[1].has_value());
  CHECK(ex.out_bufs[1]->cells[0].i == 2);
  CHECK(ex.out_bufs[1]->cells[1].i == 4);
  CHECK(ex.in_bufs[1]->cells[0].i == 0);
  CHECK(ex.in_bufs[1]->cells[1].i == 0);
  CHECK(ex.out_bufs[0]->cells[0].i == 1);  // read-only param kept intact
}

TEST_CASE("build_spec shape and determinism") {
  auto oracle = make_builtin_oracle("dot");
  SamplingConfig cfg;
  cfg.int_range = {1, 4};
  cfg.buf_len = {4, 8};
  cfg.examples = 32;
  cfg.seed = 42;
  ProblemSpec spec = build_spec(*oracle, cfg);
  REQUIRE(spec.examples.size() == 32);
  for (const Example& ex : spec.examples) {
    CHECK(ex.inputs.size() == 3);
    REQUIRE(ex.returned.has_value());
  }
  ProblemSpec again = build_spec(*make_builtin_oracle("dot"), cfg);
  CHECK(spec_to_json(spec) == spec_to_json(again));

  cfg.examples = 1;
  CHECK(build_spec(*oracle, cfg).examples.size() == 1);
}

TEST_CASE("nondeterministic oracles are rejected at spec construction") {
  auto oracle = make_builtin_oracle("nondet");
  SamplingConfig cfg;
  CHECK_THROWS_AS(build_spec(*oracle, cfg), SpecError);
}

TEST_CASE("float comparison uses relative tolerance with an absolute floor") {
  CHECK(float_close(-6.72, -6.7200001, 1e-5));
  CHECK_FALSE(float_close(2.0, 2.1, 1e-5));
  CHECK(float_close(1e-9, -1e-9, 1e-5));  // both under the magnitude floor
  CHECK(float_close(0.0, 0.0, 1e-5));
  CHECK_FALSE(float_close(1.0, 1.001, 1e-5));
  CHECK(float_close(1e6, 1e6 * (1 + 1e-6), 1e-5));
}

TEST_CASE("equivalence checks returns and buffers") {
  auto oracle = make_builtin_oracle("scale");
  SampledInputs in;
  BufferData bin, bout;
  bin.elem = bout.elem = Scalar::Int;
  bin.cells = {word_i(1), word_i(2)};
  bout.cells = {word_i(0), word_i(0)};
  in.args = {Value::of_buf(0, Scalar::Int, 2), Value::of_buf(1, Scalar::Int, 2),
             Value::of_int(2)};
  in.bufs = {bin, bout, std::nullopt};
  Example ex = observe(*oracle, in);

  // Reflexivity: the oracle's own outputs match the example.
  CHECK(equivalent(oracle->signature(), ex, ex.returned, ex.out_bufs, 1e-5));

  // One integer cell off: [2,4] vs [2,5].
  auto wrong = ex.out_bufs;
  wrong[1]->cells[1] = word_i(5);
  CHECK_FALSE(equivalent(oracle->signature(), ex, ex.returned, wrong, 1e-5));
}

TEST_CASE("float returns compare within tolerance") {
  auto oracle = make_builtin_oracle("dot");
  SampledInputs in = dot_inputs({0.0, 1.2, -3.4, -5.6}, {-1.0, 1.2, 2.4, 3.2}, 3);
  Example ex = observe(*oracle, in);
  std::optional<Value> close = Value::of_float(ex.returned->scalar.f + 1e-9);
  CHECK(equivalent(oracle->signature(), ex, close, ex.out_bufs, 1e-5));
  std::optional<Value> far = Value::of_float(ex.returned->scalar.f + 0.5);
  CHECK_FALSE(equivalent(oracle->signature(), ex, far, ex.out_bufs, 1e-5));
}

TEST_CASE("output detection flags exactly the written pointer params") {
  SamplingConfig cfg;
  cfg.int_range = {1, 4};
  cfg.buf_len = {4, 8};

  ProblemSpec dot = build_spec(*make_builtin_oracle("dot"), cfg);
  CHECK(detect_output_params(dot).empty());

  cfg.int_range = {1, 2};  // scale reads in[0..n), writes out[0..n)
  cfg.buf_len = {2, 4};
  ProblemSpec scale = build_spec(*make_builtin_oracle("scale"), cfg);
  std::vector<uint32_t> outs = detect_output_params(scale);
  REQUIRE(outs.size() == 1);
  CHECK(outs[0] == 1);

  // Detected params are always pointer params.
  for (uint32_t p : outs) CHECK(is_pointer(scale.sig.params[p].type));
}
