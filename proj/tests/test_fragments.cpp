#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "synth/compile.hpp"
#include "synth/fragment.hpp"
#include "synth/ir.hpp"

using namespace synth;

namespace {

Fragment frag(FragmentKind k, uint32_t arg = kNoArg, int64_t bound = 0) {
  Fragment f;
  f.kind = k;
  f.arg = arg;
  f.bound = bound;
  return f;
}

const Signature& dot_sig() {
  static Signature s = parse_signature("float f(float* a, float* b, int c)");
  return s;
}

}  // namespace

TEST_CASE("slot counts separate chain enders, chainers, and region openers") {
  CHECK(slot_count(FragmentKind::Linear) == 0);
  CHECK(slot_count(FragmentKind::AffineIndex) == 0);
  CHECK(slot_count(FragmentKind::StoreOutput) == 1);
  CHECK(slot_count(FragmentKind::GatherIndex) == 1);
  CHECK(slot_count(FragmentKind::Accumulate) == 1);
  CHECK(slot_count(FragmentKind::FixedLoop) == 1);
  CHECK(slot_count(FragmentKind::ArgLoop) == 1);
  CHECK(slot_count(FragmentKind::WhileLoop) == 1);
  CHECK(slot_count(FragmentKind::If) == 1);
  CHECK(slot_count(FragmentKind::IfElse) == 2);
  CHECK(slot_count(FragmentKind::Seq) == 2);
  CHECK(slot_count(FragmentKind::Start) == 0);
  CHECK(slot_count(FragmentKind::End) == 0);
}

TEST_CASE("start and end compose as identities") {
  Fragment g = frag(FragmentKind::GatherIndex, 0);
  CHECK(compose(frag(FragmentKind::Start), g) == g);
  CHECK(compose(g, frag(FragmentKind::End)) == g);
  CHECK(compose(g, frag(FragmentKind::Start)) == g);
  CHECK(compose(frag(FragmentKind::End), g) == g);
}

TEST_CASE("composition fills the first empty slot depth first") {
  Fragment t = compose_sequence({frag(FragmentKind::Seq), frag(FragmentKind::GatherIndex, 0),
                                 frag(FragmentKind::Linear), frag(FragmentKind::Linear)});
  REQUIRE(t.kind == FragmentKind::Seq);
  REQUIRE(t.children.size() == 2);
  CHECK(t.children[0].kind == FragmentKind::GatherIndex);
  REQUIRE(t.children[0].children.size() == 1);
  CHECK(t.children[0].children[0].kind == FragmentKind::Linear);  // inside the gather first
  CHECK(t.children[1].kind == FragmentKind::Linear);              // then the second seq arm
}

TEST_CASE("composing into a full tree overflows into a sequence pair") {
  Fragment t = compose(frag(FragmentKind::Linear), frag(FragmentKind::AffineIndex));
  REQUIRE(t.kind == FragmentKind::Seq);
  REQUIRE(t.children.size() == 2);
  CHECK(t.children[0].kind == FragmentKind::Linear);
  CHECK(t.children[1].kind == FragmentKind::AffineIndex);

  std::vector<Fragment> flat = flatten(t);
  REQUIRE(flat.size() == 3);
  CHECK(flat[0].kind == FragmentKind::Seq);
}

TEST_CASE("flatten is preorder and rebuilding from it is stable") {
  std::vector<Fragment> seq = {frag(FragmentKind::ArgLoop, 2), frag(FragmentKind::Seq),
                               frag(FragmentKind::Accumulate), frag(FragmentKind::GatherIndex, 0),
                               frag(FragmentKind::StoreOutput, 1)};
  Fragment t = compose_sequence(seq);
  std::vector<Fragment> flat = flatten(t);
  CHECK(flat == seq);
  CHECK(compose_sequence(flat) == t);
}

TEST_CASE("rebuild-from-flatten holds on random draws") {
  std::mt19937 rng(5);
  std::vector<Fragment> pop = instantiate_population(dot_sig());
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Fragment> seq;
    size_t len = 1 + rng() % 6;
    for (size_t i = 0; i < len; ++i) seq.push_back(pop[rng() % pop.size()]);
    Fragment t = compose_sequence(seq);
    REQUIRE(compose_sequence(flatten(t)) == t);
  }
}

TEST_CASE("notation round-trips through print and parse") {
  std::vector<Fragment> seq = {frag(FragmentKind::ArgLoop, 2), frag(FragmentKind::Accumulate),
                               frag(FragmentKind::GatherIndex, 0),
                               frag(FragmentKind::GatherIndex, 1), frag(FragmentKind::Linear)};
  std::string text = print_sequence(seq, dot_sig());
  CHECK(text == "arg-loop(c) ∘ accumulate ∘ gather(a) ∘ gather(b) ∘ linear");
  CHECK(parse_sequence(text, dot_sig()) == seq);

  CHECK(print_fragment(frag(FragmentKind::FixedLoop, kNoArg, 5), dot_sig()) == "fixed-loop(5)");
  CHECK(print_fragment(frag(FragmentKind::WhileLoop), dot_sig()) == "while-loop");

  CHECK_THROWS_AS(parse_sequence("gather(zz)", dot_sig()), FragmentError);
  CHECK_THROWS_AS(parse_sequence("spin-loop(c)", dot_sig()), FragmentError);
}

TEST_CASE("keys abstract arguments to their type shape") {
  Signature s = parse_signature("void scale(int* in, int* out, int n)");
  CHECK(fragment_key(frag(FragmentKind::GatherIndex, 0), s) == "gather(ptr-int)");
  CHECK(fragment_key(frag(FragmentKind::StoreOutput, 1), s) == "store-output(ptr-int)");
  CHECK(fragment_key(frag(FragmentKind::ArgLoop, 2), s) == "arg-loop(int)");
  CHECK(fragment_key(frag(FragmentKind::FixedLoop, kNoArg, 3), s) == "fixed-loop(const)");
  CHECK(fragment_key(frag(FragmentKind::Seq), s) == "seq");
  CHECK(fragment_key(frag(FragmentKind::GatherIndex, 0), dot_sig()) == "gather(ptr-float)");
  CHECK(std::string(start_key()) == "f_start");
  CHECK(std::string(end_key()) == "f_end");
}

TEST_CASE("populations cover every type-compatible instantiation once") {
  struct Row {
    const char* decl;
    size_t count;
  };
  // one fragment per argument choice, eight fixed-loop bounds, seven argless kinds
  const Row rows[] = {
      {"float f(float* a, float* b, int c)", 20},
      {"int sum(int* a, int n)", 18},
      {"int id(int x)", 16},
      {"void scopy(char* dst, char* src)", 19},
  };
  for (const Row& r : rows) {
    Signature s = parse_signature(r.decl);
    std::vector<Fragment> pop = instantiate_population(s);
    CHECK(pop.size() == r.count);
    std::set<std::string> names;
    for (const Fragment& f : pop) names.insert(print_fragment(f, s));
    CHECK(names.size() == pop.size());  // no duplicates
    CHECK(names.count("linear") == 1);
    CHECK(names.count("while-loop") == 1);
    CHECK(names.count("fixed-loop(8)") == 1);
    CHECK(names.count("fixed-loop(9)") == 0);
  }
  std::vector<Fragment> pop = instantiate_population(dot_sig());
  std::set<std::string> names;
  for (const Fragment& f : pop) names.insert(print_fragment(f, dot_sig()));
  for (const char* want : {"gather(a)", "gather(b)", "store-output(a)", "arg-loop(c)", "if-else"})
    CHECK(names.count(want) == 1);
  CHECK(names.count("arg-loop(a)") == 0);  // pointers do not drive counted loops
}

TEST_CASE("every random tree compiles to a function that validates") {
  const char* decls[] = {
      "float f(float* a, float* b, int c)",
      "int sum(int* a, int n)",
      "void scopy(char* dst, char* src)",
      "int id(int x)",
  };
  std::mt19937 rng(99);
  for (const char* d : decls) {
    Signature sig = parse_signature(d);
    std::vector<Fragment> pop = instantiate_population(sig);
    for (int trial = 0; trial < 250; ++trial) {
      std::vector<Fragment> seq;
      size_t len = 1 + rng() % 8;
      for (size_t i = 0; i < len; ++i) seq.push_back(pop[rng() % pop.size()]);
      Sketch sk = compile_sequence(seq, sig);
      auto err = ir::validate(sk.fn);
      if (err) {
        CAPTURE(print_sequence(seq, sig));
        CAPTURE(*err);
        REQUIRE(!err.has_value());
      }
      CHECK(sk.sequence == seq);
    }
  }
}

TEST_CASE("loop counters surface outermost first") {
  Signature sig = parse_signature("int sum(int* a, int n)");
  Sketch one = compile_sequence({frag(FragmentKind::ArgLoop, 1)}, sig);
  REQUIRE(induction_values(one.fn).size() == 1);
  CHECK(one.fn.value_ty[induction_values(one.fn)[0]] == ir::Ty::I64);

  Sketch two = compile_sequence({frag(FragmentKind::ArgLoop, 1), frag(FragmentKind::FixedLoop, kNoArg, 3)},
                                sig);
  std::vector<uint32_t> ivs = induction_values(two.fn);
  REQUIRE(ivs.size() == 2);
  CHECK(ivs[0] != ivs[1]);
  // the outer counter is the one defined in the earlier header block
  CHECK(ivs[0] == induction_values(one.fn)[0]);
}
