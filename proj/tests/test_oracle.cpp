#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "synth/oracle.hpp"
#include "synth/subprocess_oracle.hpp"

using namespace synth;

namespace {

BufferData ibuf(std::vector<int64_t> v) {
  BufferData d;
  d.elem = Scalar::Int;
  for (int64_t x : v) d.cells.push_back(word_i(x));
  return d;
}

BufferData fbuf(std::vector<double> v) {
  BufferData d;
  d.elem = Scalar::Float;
  for (double x : v) d.cells.push_back(word_f(x));
  return d;
}

BufferData cbuf(const std::string& s, size_t pad = 0) {
  BufferData d;
  d.elem = Scalar::Char;
  for (char ch : s) d.cells.push_back(word_i(ch));
  d.cells.push_back(word_i(0));
  for (size_t i = 0; i < pad; ++i) d.cells.push_back(word_i('x'));
  return d;
}

std::vector<int64_t> ints_of(const BufferData& d) {
  std::vector<int64_t> v;
  for (const Word& w : d.cells) v.push_back(w.i);
  return v;
}

std::vector<double> floats_of(const BufferData& d) {
  std::vector<double> v;
  for (const Word& w : d.cells) v.push_back(w.f);
  return v;
}

}  // namespace

TEST_CASE("registry lists the builtins and rejects unknown ids") {
  auto names = builtin_oracle_names();
  for (const char* want : {"dot", "fact", "slen", "matvec", "fir", "saxpy"})
    CHECK(std::find(names.begin(), names.end(), want) != names.end());
  // the counter oracle is reachable by name but stays out of the listing
  CHECK(std::find(names.begin(), names.end(), "nondet") == names.end());
  CHECK_NOTHROW(make_builtin_oracle("nondet"));

  CHECK_THROWS_AS(make_builtin_oracle("no_such_fn"), OracleError);
  CHECK_THROWS_AS(make_oracle("builtin:no_such_fn"), OracleError);
  CHECK_THROWS_AS(make_oracle("gibberish"), OracleError);
  CHECK_THROWS_AS(make_oracle("proc:true"), OracleError);  // needs a signature
}

TEST_CASE("dot multiplies pairwise over the first c elements") {
  auto o = make_oracle("builtin:dot");
  CHECK(o->signature().render() == "float f(float* a, float* b, int c)");

  std::vector<std::optional<BufferData>> bufs(3);
  bufs[0] = fbuf({0.0, 1.2, -3.4, -5.6});
  bufs[1] = fbuf({-1.0, 1.2, 2.4, 3.2});
  std::vector<Value> args = {Value::of_buf(0, Scalar::Float, 4), Value::of_buf(1, Scalar::Float, 4),
                             Value::of_int(3)};
  OracleResult r = o->evaluate(args, bufs);
  REQUIRE(r.ret.has_value());
  CHECK(r.ret->scalar.f == doctest::Approx(-6.72).epsilon(1e-12));
  // inputs pass through untouched
  CHECK(floats_of(*r.bufs[0]) == std::vector<double>{0.0, 1.2, -3.4, -5.6});
  CHECK(floats_of(*r.bufs[1]) == std::vector<double>{-1.0, 1.2, 2.4, 3.2});
}

TEST_CASE("scale doubles into the output buffer, n elements only") {
  auto o = make_builtin_oracle("scale");
  std::vector<std::optional<BufferData>> bufs(3);
  bufs[0] = ibuf({1, -2, 7, 9});
  bufs[1] = ibuf({0, 0, 0, 55});
  std::vector<Value> args = {Value::of_buf(0, Scalar::Int, 4), Value::of_buf(1, Scalar::Int, 4),
                             Value::of_int(3)};
  OracleResult r = o->evaluate(args, bufs);
  CHECK(!r.ret.has_value());
  CHECK(ints_of(*r.bufs[0]) == std::vector<int64_t>{1, -2, 7, 9});
  CHECK(ints_of(*r.bufs[1]) == std::vector<int64_t>{2, -4, 14, 55});
}

TEST_CASE("scalar reductions and counters") {
  std::vector<std::optional<BufferData>> none(1);
  auto fact = make_builtin_oracle("fact");
  auto r = fact->evaluate({Value::of_int(5)}, none);
  CHECK(r.ret->scalar.i == 120);
  r = fact->evaluate({Value::of_int(0)}, none);
  CHECK(r.ret->scalar.i == 1);

  auto tri = make_builtin_oracle("tri");
  CHECK(tri->evaluate({Value::of_int(4)}, none).ret->scalar.i == 10);

  auto sum = make_builtin_oracle("sum");
  std::vector<std::optional<BufferData>> b(2);
  b[0] = ibuf({3, -1, 4, 100});
  CHECK(sum->evaluate({Value::of_buf(0, Scalar::Int, 4), Value::of_int(3)}, b).ret->scalar.i == 6);

  auto ceq = make_builtin_oracle("ceq");
  std::vector<std::optional<BufferData>> b2(3);
  b2[0] = ibuf({1, 2, 3, 4});
  b2[1] = ibuf({1, 0, 3, 9});
  auto cr = ceq->evaluate(
      {Value::of_buf(0, Scalar::Int, 4), Value::of_buf(1, Scalar::Int, 4), Value::of_int(4)}, b2);
  CHECK(cr.ret->scalar.i == 2);
}

TEST_CASE("element access guards reject empty and oversized ranges") {
  auto amax = make_builtin_oracle("amax");
  std::vector<std::optional<BufferData>> b(2);
  b[0] = ibuf({5, 9, 2});
  CHECK(amax->evaluate({Value::of_buf(0, Scalar::Int, 3), Value::of_int(3)}, b).ret->scalar.i == 9);
  CHECK_THROWS_AS(amax->evaluate({Value::of_buf(0, Scalar::Int, 3), Value::of_int(0)}, b),
                  OracleError);
  CHECK_THROWS_AS(amax->evaluate({Value::of_buf(0, Scalar::Int, 3), Value::of_int(4)}, b),
                  OracleError);

  auto last = make_builtin_oracle("last");
  CHECK(last->evaluate({Value::of_buf(0, Scalar::Int, 3), Value::of_int(2)}, b).ret->scalar.i == 9);
  CHECK_THROWS_AS(last->evaluate({Value::of_buf(0, Scalar::Int, 3), Value::of_int(0)}, b),
                  OracleError);

  auto mfirst = make_builtin_oracle("mfirst");
  auto mr = mfirst->evaluate({Value::of_buf(0, Scalar::Int, 3), Value::of_int(3)}, b);
  CHECK(ints_of(*mr.bufs[0]) == std::vector<int64_t>{5, 5, 5});
  CHECK_THROWS_AS(mfirst->evaluate({Value::of_buf(0, Scalar::Int, 3), Value::of_int(0)}, b),
                  OracleError);
}

TEST_CASE("string builtins walk to the terminator") {
  auto slen = make_builtin_oracle("slen");
  std::vector<std::optional<BufferData>> b(1);
  b[0] = cbuf("hello", 2);
  CHECK(slen->evaluate({Value::of_buf(0, Scalar::Char, 8)}, b).ret->scalar.i == 5);
  b[0] = cbuf("");
  CHECK(slen->evaluate({Value::of_buf(0, Scalar::Char, 1)}, b).ret->scalar.i == 0);
  b[0] = ibuf({65, 66});
  b[0]->elem = Scalar::Char;  // no zero anywhere
  CHECK_THROWS_AS(slen->evaluate({Value::of_buf(0, Scalar::Char, 2)}, b), OracleError);

  auto scopy = make_builtin_oracle("scopy");
  std::vector<std::optional<BufferData>> b2(2);
  b2[0] = cbuf("......");
  b2[1] = cbuf("ab", 3);
  auto r = scopy->evaluate({Value::of_buf(0, Scalar::Char, 7), Value::of_buf(1, Scalar::Char, 6)},
                           b2);
  CHECK(r.bufs[0]->cells[0].i == 'a');
  CHECK(r.bufs[0]->cells[1].i == 'b');
  // copies stop at the source terminator; the rest of dst is untouched
  CHECK(r.bufs[0]->cells[2].i == '.');

  std::vector<std::optional<BufferData>> b3(2);
  b3[0] = cbuf("");
  b3[1] = cbuf("long");
  CHECK_THROWS_AS(
      scopy->evaluate({Value::of_buf(0, Scalar::Char, 1), Value::of_buf(1, Scalar::Char, 5)}, b3),
      OracleError);

  auto cntc = make_builtin_oracle("cntc");
  std::vector<std::optional<BufferData>> b4(2);
  b4[0] = cbuf("banana");
  CHECK(cntc->evaluate({Value::of_buf(0, Scalar::Char, 7), Value::of_char('a')}, b4)
            .ret->scalar.i == 3);
}

TEST_CASE("builtins check their arity") {
  auto o = make_builtin_oracle("sum");
  std::vector<std::optional<BufferData>> b(1);
  b[0] = ibuf({1, 2});
  CHECK_THROWS_AS(o->evaluate({Value::of_buf(0, Scalar::Int, 2)}, b), OracleError);
}

TEST_CASE("matvec is row-major") {
  auto o = make_builtin_oracle("matvec");
  std::vector<std::optional<BufferData>> b(4);
  b[0] = fbuf({0, 0});
  b[1] = fbuf({1, 2, 3, 4});
  b[2] = fbuf({5, 6});
  std::vector<Value> args = {Value::of_buf(0, Scalar::Float, 2), Value::of_buf(1, Scalar::Float, 4),
                             Value::of_buf(2, Scalar::Float, 2), Value::of_int(2)};
  auto r = o->evaluate(args, b);
  CHECK(floats_of(*r.bufs[0]) == std::vector<double>{17.0, 39.0});
}

TEST_CASE("fir convolves k taps over a window of n-1+k samples") {
  auto o = make_builtin_oracle("fir");
  std::vector<std::optional<BufferData>> b(5);
  b[0] = fbuf({0, 0, 0});
  b[1] = fbuf({1, 2, 3, 4});
  b[2] = fbuf({1, 1});
  std::vector<Value> args = {Value::of_buf(0, Scalar::Float, 3), Value::of_buf(1, Scalar::Float, 4),
                             Value::of_buf(2, Scalar::Float, 2), Value::of_int(3),
                             Value::of_int(2)};
  auto r = o->evaluate(args, b);
  CHECK(floats_of(*r.bufs[0]) == std::vector<double>{3.0, 5.0, 7.0});

  // window exceeds x: n-1+k = 5 > len(x) = 4
  args[3] = Value::of_int(4);
  std::vector<std::optional<BufferData>> b2(5);
  b2[0] = fbuf({0, 0, 0, 0});
  b2[1] = fbuf({1, 2, 3, 4});
  b2[2] = fbuf({1, 1});
  CHECK_THROWS_AS(o->evaluate(args, b2), OracleError);
}

TEST_CASE("nondet oracle changes its answer on every call") {
  std::vector<std::optional<BufferData>> none(1);
  auto o = make_builtin_oracle("nondet");
  auto a = o->evaluate({Value::of_int(1)}, none);
  auto b = o->evaluate({Value::of_int(1)}, none);
  CHECK(a.ret->scalar.i != b.ret->scalar.i);
}

TEST_CASE("subprocess oracle round-trips the line protocol") {
  // Implements scale: reads {"args":[buf,buf,int]}, answers ret:null plus
  // both buffers with the second doubled from the first.
  const char* py = R"(python3 -c '
import json, sys
for line in sys.stdin:
    q = json.loads(line)
    a = q["args"][0]["data"]
    n = q["args"][2]["v"]
    out = [2 * a[i] for i in range(n)] + q["args"][1]["data"][n:]
    print(json.dumps({"ret": None, "bufs": [a, out]}), flush=True)
')";
  Signature sig = parse_signature("void scale(int* in, int* out, int n)");
  auto o = make_subprocess_oracle(py, sig);

  std::vector<std::optional<BufferData>> bufs(3);
  bufs[0] = ibuf({4, 5, 6});
  bufs[1] = ibuf({0, 0, -1});
  std::vector<Value> args = {Value::of_buf(0, Scalar::Int, 3), Value::of_buf(1, Scalar::Int, 3),
                             Value::of_int(2)};
  OracleResult r = o->evaluate(args, bufs);
  CHECK(!r.ret.has_value());
  CHECK(ints_of(*r.bufs[1]) == std::vector<int64_t>{8, 10, -1});

  // twice more: the child is spawned once and must keep answering
  r = o->evaluate(args, bufs);
  r = o->evaluate(args, bufs);
  CHECK(ints_of(*r.bufs[1]) == std::vector<int64_t>{8, 10, -1});
}

TEST_CASE("subprocess oracle reports a returning child") {
  std::vector<std::optional<BufferData>> none(1);
  Signature sig = parse_signature("int f(int x)");
  auto o = make_subprocess_oracle("python3 -c 'pass'", sig);
  CHECK_THROWS_AS(o->evaluate({Value::of_int(1)}, none), OracleError);
}

TEST_CASE("subprocess oracle rejects malformed replies") {
  std::vector<std::optional<BufferData>> none(1);
  Signature sig = parse_signature("int f(int x)");
  auto o = make_subprocess_oracle(
      "python3 -c 'import sys\nfor l in sys.stdin: print(\"not json\", flush=True)'", sig);
  CHECK_THROWS_AS(o->evaluate({Value::of_int(1)}, none), OracleError);
}

TEST_CASE("subprocess oracle rejects a wrong-shape reply") {
  Signature sig = parse_signature("int f(int* a, int n)");
  // answers with no buffers at all
  auto o = make_subprocess_oracle(
      "python3 -c 'import sys\nfor l in sys.stdin: print(\"{\\\"ret\\\":{\\\"kind\\\":\\\"int\\\",\\\"v\\\":0}}\", flush=True)'",
      sig);
  std::vector<std::optional<BufferData>> b(2);
  b[0] = ibuf({1});
  CHECK_THROWS_AS(o->evaluate({Value::of_buf(0, Scalar::Int, 1), Value::of_int(1)}, b),
                  OracleError);
}

TEST_CASE("subprocess oracle times out on a silent child") {
  std::vector<std::optional<BufferData>> none(1);
  Signature sig = parse_signature("int f(int x)");
  auto o = make_subprocess_oracle("python3 -c 'import time; time.sleep(30)'", sig, 300);
  CHECK_THROWS_AS(o->evaluate({Value::of_int(1)}, none), OracleError);
}
