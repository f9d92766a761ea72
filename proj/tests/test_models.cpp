#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "synth/jsonio.hpp"
#include "synth/models.hpp"
#include "synth/oracle.hpp"
#include "synth/spec.hpp"

using namespace synth;

namespace {

const Signature& sum_sig() {
  static Signature s = parse_signature("int sum(int* a, int n)");
  return s;
}

CorpusRecord rec(const Signature& sig, const std::string& text) {
  return {sig, parse_sequence(text, sig)};
}

// f_start -> arg-loop(int) twice, -> linear once.
TrainingCorpus toy_corpus() {
  return {
      rec(sum_sig(), "arg-loop(n) ∘ accumulate ∘ gather(a)"),
      rec(sum_sig(), "arg-loop(n) ∘ gather(a)"),
      rec(sum_sig(), "linear"),
  };
}

std::set<std::string> all_keys(const std::vector<Fragment>& pop, const Signature& sig) {
  std::set<std::string> ks;
  for (const Fragment& f : pop) ks.insert(fragment_key(f, sig));
  return ks;
}

std::set<std::string> printed(const std::vector<Fragment>& fs, const Signature& sig) {
  std::set<std::string> out;
  for (const Fragment& f : fs) out.insert(print_fragment(f, sig));
  return out;
}

}  // namespace

TEST_CASE("signatures featurize into type counts, arity, return one-hot") {
  FeatureVector dot = featurize(parse_signature("float f(float* a, float* b, int c)"));
  CHECK(dot == FeatureVector{0, 1, 0, 0, 0, 2, 0, 3, 0, 0, 1, 0});
  FeatureVector scale = featurize(parse_signature("void scale(int* in, int* out, int n)"));
  CHECK(scale == FeatureVector{0, 1, 0, 0, 2, 0, 0, 3, 0, 0, 0, 1});
  FeatureVector slen = featurize(parse_signature("int slen(char* s)"));
  CHECK(slen == FeatureVector{0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0});
}

TEST_CASE("jaccard") {
  CHECK(jaccard({}, {}) == 1.0);
  CHECK(jaccard({"a", "b"}, {"a", "b", "c"}) == doctest::Approx(2.0 / 3.0));
  CHECK(jaccard({"a"}, {"b"}) == 0.0);
  CHECK(jaccard({"x", "y"}, {"x", "y"}) == 1.0);
}

TEST_CASE("bigram counts match the corpus by hand") {
  MarkovModel m = train_markov(toy_corpus());
  CHECK(m.b == 0.75);
  CHECK(m.max_length == 6);
  auto count = [&](const std::string& a, const std::string& b) {
    auto it = m.w.find({a, b});
    return it == m.w.end() ? 0.0 : it->second;
  };
  CHECK(count("f_start", "arg-loop(int)") == 2.0);
  CHECK(count("f_start", "linear") == 1.0);
  CHECK(count("arg-loop(int)", "accumulate") == 1.0);
  CHECK(count("arg-loop(int)", "gather(ptr-int)") == 1.0);
  CHECK(count("gather(ptr-int)", "f_end") == 2.0);
  CHECK(count("linear", "f_end") == 1.0);
  CHECK(count("accumulate", "gather(ptr-int)") == 1.0);
  CHECK(m.row_sum("f_start") == 3.0);
  CHECK(m.row_sum("arg-loop(int)") == 2.0);
  CHECK(m.row_sum("no-such-key") == 0.0);

  std::vector<std::string> nk = m.next_keys();
  std::set<std::string> nks(nk.begin(), nk.end());
  CHECK(nks == std::set<std::string>{"arg-loop(int)", "linear", "accumulate", "gather(ptr-int)",
                                     "f_end"});
}

TEST_CASE("transition probabilities blend the restricted and base rows") {
  MarkovModel m = train_markov(toy_corpus());
  std::set<std::string> all = {"arg-loop(int)", "linear", "accumulate", "gather(ptr-int)"};

  // restricted == base when F0 covers everything
  CHECK(transition_prob(m, "f_start", "arg-loop(int)", all) == doctest::Approx(2.0 / 3.0));
  CHECK(transition_prob(m, "f_start", "linear", all) == doctest::Approx(1.0 / 3.0));
  CHECK(transition_prob(m, "f_start", "accumulate", all) == 0.0);

  // arg-loop row is {accumulate: 1, gather: 1}; restricting to gather moves
  // b of the mass onto it
  std::set<std::string> only_gather = {"gather(ptr-int)"};
  CHECK(transition_prob(m, "arg-loop(int)", "gather(ptr-int)", only_gather) ==
        doctest::Approx(0.75 * 1.0 + 0.25 * 0.5));
  CHECK(transition_prob(m, "arg-loop(int)", "accumulate", only_gather) ==
        doctest::Approx(0.25 * 0.5));

  MarkovModel base_only = m;
  base_only.b = 0.0;
  CHECK(transition_prob(base_only, "arg-loop(int)", "gather(ptr-int)", only_gather) ==
        doctest::Approx(0.5));
  MarkovModel restricted_only = m;
  restricted_only.b = 1.0;
  CHECK(transition_prob(restricted_only, "arg-loop(int)", "gather(ptr-int)", only_gather) ==
        doctest::Approx(1.0));

  // the terminator stays reachable inside a restricted row
  CHECK(transition_prob(m, "gather(ptr-int)", "f_end", only_gather) == doctest::Approx(1.0));

  // a row the corpus never saw falls back to uniform over emittable keys
  CHECK(transition_prob(m, "if", "linear", all) == doctest::Approx(1.0 / 5.0));
  CHECK(transition_prob(m, "if", "no-such-key", all) == 0.0);
}

TEST_CASE("every transition row is a probability distribution") {
  const char* decls[] = {
      "int sum(int* a, int n)",
      "float f(float* a, float* b, int c)",
      "void scopy(char* dst, char* src)",
  };
  std::mt19937 rng(41);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const char* d = decls[rng() % 3];
    Signature sig = parse_signature(d);
    std::vector<Fragment> pop = instantiate_population(sig);

    TrainingCorpus corpus;
    size_t nrec = 1 + rng() % 4;
    for (size_t r = 0; r < nrec; ++r) {
      CorpusRecord cr;
      cr.sig = sig;
      size_t len = 1 + rng() % 5;
      for (size_t i = 0; i < len; ++i) cr.sequence.push_back(pop[rng() % pop.size()]);
      corpus.push_back(std::move(cr));
    }
    MarkovModel m = train_markov(corpus);

    std::set<std::string> f0;
    for (const Fragment& f : pop)
      if (rng() % 2) f0.insert(fragment_key(f, sig));

    std::vector<std::string> prevs = {"f_start", "never-observed"};
    for (const auto& k : all_keys(pop, sig)) prevs.push_back(k);
    for (const std::string& prev : prevs) {
      double total = 0.0;
      for (const std::string& next : m.next_keys()) total += transition_prob(m, prev, next, f0);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      ++checked;
    }
  }
  CHECK(checked >= 1000);
}

TEST_CASE("training rejects degenerate corpora") {
  CHECK_THROWS_AS(train_markov({}), ModelError);
  CHECK_THROWS_AS(train_iid({}), ModelError);
  TrainingCorpus bad = {{sum_sig(), {}}};
  CHECK_THROWS_AS(train_markov(bad), ModelError);
  CHECK_THROWS_AS(train_iid(bad), ModelError);
}

TEST_CASE("the inclusion classifier memorizes separable shapes") {
  Signature with = sum_sig();
  Signature without = parse_signature("int id(int x)");
  TrainingCorpus corpus;
  for (int i = 0; i < 4; ++i) {
    corpus.push_back(rec(with, "arg-loop(n) ∘ accumulate ∘ gather(a)"));
    corpus.push_back(rec(without, "arg-loop(x) ∘ linear"));
  }
  IidModel m = train_iid(corpus);
  CHECK(m.prob("gather(ptr-int)", featurize(with)) > 0.7);
  CHECK(m.prob("gather(ptr-int)", featurize(without)) < 0.3);
  CHECK(m.prob("linear", featurize(without)) > 0.7);
  CHECK(m.prob("key-never-trained", featurize(with)) == 0.0);
}

TEST_CASE("predicted start sets honor the threshold and forced outputs") {
  SamplingConfig cfg;
  cfg.examples = 8;
  cfg.seed = 1;
  cfg.int_range = {0, 2};  // n stays below every sampled buffer length
  auto oracle = make_builtin_oracle("scale");
  ProblemSpec spec = build_spec(*oracle, cfg);
  std::vector<Fragment> pop = instantiate_population(spec.sig);

  IidModel m = train_iid({rec(spec.sig, "arg-loop(n) ∘ gather(in) ∘ store-output(out)")});

  m.theta = 0.0;  // degenerate threshold admits everything
  CHECK(printed(predict_F0(m, spec, pop), spec.sig) == printed(pop, spec.sig));

  m.theta = 1.1;  // nothing passes the classifier; outputs stay forced
  CHECK(printed(predict_F0(m, spec, pop), spec.sig) ==
        std::set<std::string>{"store-output(out)"});

  // raising the threshold never grows the set
  m.theta = 0.3;
  auto low = printed(predict_F0(m, spec, pop), spec.sig);
  m.theta = 0.9;
  auto high = printed(predict_F0(m, spec, pop), spec.sig);
  for (const std::string& k : high) CHECK(low.count(k) == 1);
  CHECK(low.count("store-output(out)") == 1);
  CHECK(high.count("store-output(out)") == 1);
}

TEST_CASE("sampled first fragments track the start row") {
  MarkovModel m = train_markov(toy_corpus());
  std::vector<Fragment> pop = instantiate_population(sum_sig());
  std::mt19937_64 rng(7);
  const int n = 10000;
  std::map<std::string, int> first;
  for (int i = 0; i < n; ++i) {
    std::vector<Fragment> s = sample_sequence(m, pop, sum_sig(), pop, rng);
    REQUIRE(!s.empty());
    first[fragment_key(s[0], sum_sig())] += 1;
  }
  CHECK(first["arg-loop(int)"] / double(n) == doctest::Approx(2.0 / 3.0).epsilon(0.045));
  CHECK(first["linear"] / double(n) == doctest::Approx(1.0 / 3.0).epsilon(0.09));
  CHECK(first.size() == 2);
}

TEST_CASE("sampling truncates at max_length and prefers F0 instantiations") {
  Signature dot = parse_signature("float f(float* a, float* b, int c)");
  std::vector<Fragment> pop = instantiate_population(dot);

  TrainingCorpus chain = {rec(dot, "gather(a) ∘ gather(b) ∘ gather(a) ∘ gather(b) ∘ gather(a) "
                                   "∘ gather(b) ∘ gather(a) ∘ gather(b)")};
  MarkovModel m = train_markov(chain);
  m.max_length = 3;

  Fragment ga;
  ga.kind = FragmentKind::GatherIndex;
  ga.arg = 0;
  std::vector<Fragment> f0 = {ga};

  std::mt19937_64 rng(3);
  bool hit_cap = false;
  for (int i = 0; i < 200; ++i) {
    std::vector<Fragment> s = sample_sequence(m, f0, dot, pop, rng);
    CHECK(s.size() <= 3);
    hit_cap = hit_cap || s.size() == 3;
    for (const Fragment& f : s) {
      CHECK(f.kind == FragmentKind::GatherIndex);
      CHECK(f.arg == 0);  // the F0 member, not gather(b)
    }
  }
  CHECK(hit_cap);

  // without the F0 restriction both pointer args appear
  std::set<uint32_t> args_seen;
  for (int i = 0; i < 200; ++i)
    for (const Fragment& f : sample_sequence(m, {}, dot, pop, rng)) args_seen.insert(f.arg);
  CHECK(args_seen == std::set<uint32_t>{0, 1});
}

TEST_CASE("identical seeds sample identical sequences") {
  MarkovModel m = train_markov(toy_corpus());
  std::vector<Fragment> pop = instantiate_population(sum_sig());
  std::mt19937_64 r1(99), r2(99);
  for (int i = 0; i < 50; ++i) {
    auto a = sample_sequence(m, pop, sum_sig(), pop, r1);
    auto b = sample_sequence(m, pop, sum_sig(), pop, r2);
    REQUIRE(a == b);
  }
}

TEST_CASE("models survive a json round trip") {
  TrainingCorpus corpus = toy_corpus();
  IidModel iid = train_iid(corpus);
  MarkovModel mk = train_markov(corpus);
  mk.b = 0.6;
  mk.max_length = 9;

  std::string text = models_to_json(iid, mk);
  IidModel iid2;
  MarkovModel mk2;
  models_from_json(text, iid2, mk2);

  CHECK(mk2.b == doctest::Approx(0.6));
  CHECK(mk2.max_length == 9);
  REQUIRE(mk2.w.size() == mk.w.size());
  for (const auto& [k, v] : mk.w) {
    REQUIRE(mk2.w.count(k) == 1);
    CHECK(mk2.w.at(k) == doctest::Approx(v));
  }

  CHECK(iid2.theta == doctest::Approx(iid.theta));
  REQUIRE(iid2.forests.size() == iid.forests.size());
  for (const Signature* s : {&sum_sig()}) {
    FeatureVector v = featurize(*s);
    for (const auto& [key, forest] : iid.forests)
      CHECK(iid2.prob(key, v) == doctest::Approx(iid.prob(key, v)).epsilon(1e-9));
  }
}

TEST_CASE("corpus files round trip record for record") {
  TrainingCorpus corpus = toy_corpus();
  corpus.push_back(rec(parse_signature("float f(float* a, float* b, int c)"),
                       "arg-loop(c) ∘ accumulate ∘ gather(a) ∘ gather(b) ∘ linear"));
  std::string text = corpus_to_text(corpus);
  TrainingCorpus back = corpus_from_text(text);
  REQUIRE(back.size() == corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    CHECK(back[i].sig.render() == corpus[i].sig.render());
    CHECK(back[i].sequence == corpus[i].sequence);
  }
}
