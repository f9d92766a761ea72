#include "synth/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "synth/jsonio.hpp"
#include "synth/oracle.hpp"

namespace synth {

namespace {

using nlohmann::json;

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Independent streams per problem: one for sampling, one for the engine.
uint64_t problem_seed(uint64_t suite_seed, const std::string& id, uint64_t salt) {
  return mix64(suite_seed ^ mix64(fnv1a(id) + salt));
}

}  // namespace

std::vector<BenchmarkProblem> desk_problems() {
  struct Row {
    const char* id;
    const char* group;
    const char* annotation;
    void (*tune)(SamplingConfig&);
  };
  // Every int argument doubles as a loop bound somewhere, so its range stays
  // at or below the smallest buffer length the same example can draw.
  static const auto small_arrays = [](SamplingConfig& c) {
    c.int_range = {1, 4};
    c.buf_len = {4, 8};
  };
  static const Row rows[] = {
      {"fact", "simpl-int", "arg-loop(n) ∘ accumulate ∘ linear",
       [](SamplingConfig& c) { c.int_range = {0, 6}; }},
      {"tri", "simpl-int", "arg-loop(n) ∘ accumulate ∘ linear",
       [](SamplingConfig& c) { c.int_range = {0, 6}; }},
      {"sum", "simpl-array", "arg-loop(n) ∘ accumulate ∘ gather(a) ∘ linear",
       small_arrays},
      {"amax", "simpl-array",
       "gather(a) ∘ arg-loop(n) ∘ accumulate ∘ gather(a) ∘ linear",
       small_arrays},
      {"ceq", "simpl-array",
       "arg-loop(n) ∘ accumulate ∘ gather(a) ∘ gather(b) ∘ linear",
       small_arrays},
      {"last", "lambda2", "linear", small_arrays},
      {"mfirst", "lambda2", "gather(a) ∘ arg-loop(n) ∘ store-output(a)", small_arrays},
      {"incr", "makespeare-like",
       "arg-loop(n) ∘ gather(x) ∘ store-output(x) ∘ linear", small_arrays},
      {"copy", "makespeare-like", "arg-loop(n) ∘ gather(src) ∘ store-output(dst)",
       small_arrays},
      {"slen", "string", "while-loop", [](SamplingConfig& c) { c.string_mode = true; }},
      {"scopy", "string", "while-loop ∘ gather(src) ∘ store-output(dst)",
       [](SamplingConfig& c) { c.string_mode = true; }},
      {"cntc", "string", "while-loop ∘ accumulate ∘ gather(s) ∘ linear",
       [](SamplingConfig& c) {
         c.string_mode = true;
         c.char_range = {97, 102};  // narrow alphabet so matches actually occur
       }},
      {"vscale", "mathfu", "arg-loop(n) ∘ gather(a) ∘ store-output(out) ∘ linear",
       small_arrays},
      {"vadd", "mathfu",
       "arg-loop(n) ∘ gather(a) ∘ gather(b) ∘ store-output(out) ∘ linear",
       small_arrays},
      {"dot", "mathfu", "arg-loop(c) ∘ accumulate ∘ gather(a) ∘ gather(b) ∘ linear",
       small_arrays},
      {"saxpy", "blas",
       "arg-loop(n) ∘ gather(y) ∘ gather(x) ∘ store-output(y) ∘ linear",
       small_arrays},
      {"matvec", "blas",
       "arg-loop(m) ∘ seq ∘ arg-loop(m) ∘ accumulate ∘ gather(x) ∘ "
       "affine-index ∘ store-output(y)",
       [](SamplingConfig& c) {
         c.int_range = {1, 2};  // m*m cells of A must fit one length draw
         c.buf_len = {4, 8};
       }},
      {"energy", "dsp", "arg-loop(n) ∘ accumulate ∘ gather(a) ∘ linear",
       small_arrays},
      {"vmul", "dsp",
       "arg-loop(n) ∘ gather(a) ∘ gather(b) ∘ store-output(out) ∘ linear",
       small_arrays},
      {"fir", "dsp",
       "arg-loop(n) ∘ seq ∘ arg-loop(k) ∘ accumulate ∘ gather(h) ∘ "
       "affine-index ∘ store-output(y)",
       [](SamplingConfig& c) {
         c.int_range = {1, 3};  // x is read at i+j <= n-1 + k-1
         c.buf_len = {6, 8};
       }},
  };

  std::vector<BenchmarkProblem> out;
  for (const Row& r : rows) {
    BenchmarkProblem p;
    p.id = r.id;
    p.group = r.group;
    p.oracle = r.id;
    p.signature = make_builtin_oracle(p.oracle)->signature().render();
    r.tune(p.sampling);
    p.annotation = r.annotation;
    out.push_back(std::move(p));
  }
  return out;
}

ProblemSpec build_problem_spec(const BenchmarkProblem& p, int examples, uint64_t seed) {
  auto oracle = make_builtin_oracle(p.oracle);
  SamplingConfig cfg = p.sampling;
  cfg.examples = examples;
  cfg.seed = seed;
  return build_spec(*oracle, cfg);
}

TrainingCorpus corpus_from(const std::vector<BenchmarkProblem>& problems) {
  TrainingCorpus corpus;
  for (const BenchmarkProblem& p : problems) {
    if (p.annotation.empty()) continue;
    CorpusRecord rec;
    rec.sig = parse_signature(p.signature);
    rec.sequence = parse_sequence(p.annotation, rec.sig);
    corpus.push_back(std::move(rec));
  }
  return corpus;
}

void train_models(const TrainingCorpus& corpus, IidModel& iid, MarkovModel& markov,
                  uint64_t seed) {
  IidConfig ic;
  ic.seed = seed;
  iid = train_iid(corpus, ic);
  markov = train_markov(corpus);
  int longest = markov.max_length;
  for (const CorpusRecord& r : corpus)
    longest = std::max(longest, static_cast<int>(r.sequence.size()));
  markov.max_length = longest;
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Markov: return "markov";
    case Mode::IidOnly: return "iid-only";
    case Mode::Uniform: return "uniform";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  if (name == "markov") return Mode::Markov;
  if (name == "iid-only") return Mode::IidOnly;
  if (name == "uniform") return Mode::Uniform;
  throw HarnessError("unknown mode: " + name + " (markov | iid-only | uniform)");
}

namespace {

double problem_jaccard(const IidModel& iid, const BenchmarkProblem& p, const ProblemSpec& spec) {
  std::vector<Fragment> population = instantiate_population(spec.sig);
  std::set<std::string> pred;
  for (const Fragment& f : predict_F0(iid, spec, population))
    pred.insert(fragment_key(f, spec.sig));
  std::set<std::string> truth;
  for (const Fragment& f : parse_sequence(p.annotation, spec.sig))
    truth.insert(fragment_key(f, spec.sig));
  for (uint32_t q : detect_output_params(spec)) {
    Fragment f;
    f.kind = FragmentKind::StoreOutput;
    f.arg = q;
    truth.insert(fragment_key(f, spec.sig));
  }
  return jaccard(pred, truth);
}

json row_to_json(const ProblemResult& r) {
  Signature sig = parse_signature(r.signature);
  return json{{"id", r.id},
              {"group", r.group},
              {"signature", r.signature},
              {"error", r.error},
              {"jaccard", r.jaccard},
              {"report", json::parse(report_to_json(r.report, sig))}};
}

ProblemResult row_of_json(const json& j) {
  ProblemResult r;
  r.id = j.at("id").get<std::string>();
  r.group = j.at("group").get<std::string>();
  r.signature = j.at("signature").get<std::string>();
  r.error = j.at("error").get<std::string>();
  r.jaccard = j.at("jaccard").get<double>();
  r.report = report_from_json(j.at("report").dump(), parse_signature(r.signature));
  return r;
}

}  // namespace

RunSummary summarize(std::vector<ProblemResult> rows, const std::string& mode) {
  RunSummary s;
  s.mode = mode;
  int solved = 0;
  std::vector<long> cand;
  for (const ProblemResult& r : rows) {
    auto& g = s.group_coverage[r.group];
    g.second += 1;
    if (r.solved()) {
      g.first += 1;
      solved += 1;
    }
    if (r.error.empty()) {
      cand.push_back(r.report.candidates);
      s.total_candidates += r.report.candidates;
    }
  }
  if (!rows.empty()) s.coverage = static_cast<double>(solved) / static_cast<double>(rows.size());
  if (!cand.empty()) {
    s.mean_candidates = static_cast<double>(s.total_candidates) / static_cast<double>(cand.size());
    std::sort(cand.begin(), cand.end());
    size_t mid = cand.size() / 2;
    s.median_candidates = cand.size() % 2
                              ? static_cast<double>(cand[mid])
                              : (static_cast<double>(cand[mid - 1]) + static_cast<double>(cand[mid])) / 2.0;
  }
  s.rows = std::move(rows);
  return s;
}

RunSummary run_suite(const std::vector<BenchmarkProblem>& problems, const IidModel* iid,
                     const MarkovModel* markov, const SuiteConfig& cfg) {
  if (problems.empty()) throw HarnessError("run_suite: empty problem list");
  if (cfg.outdir.empty()) throw HarnessError("run_suite: output directory required");
  std::filesystem::create_directories(cfg.outdir);

  std::vector<ProblemResult> rows;
  for (const BenchmarkProblem& p : problems) {
    std::string path = cfg.outdir + "/" + p.id + ".json";
    if (file_exists(path)) {
      try {
        ProblemResult r = row_of_json(json::parse(read_file(path)));
        r.resumed = true;
        rows.push_back(std::move(r));
        continue;
      } catch (const std::exception& e) {
        // Unreadable result file: redo the problem and overwrite it.
        std::cerr << "warning: " << path << ": " << e.what() << "; re-running\n";
      }
    }

    ProblemResult r;
    r.id = p.id;
    r.group = p.group;
    r.signature = p.signature;
    try {
      ProblemSpec spec = build_problem_spec(p, cfg.examples, problem_seed(cfg.seed, p.id, 0));
      SearchConfig sc = cfg.search;
      sc.mode = cfg.mode;
      sc.time_budget = cfg.budget;
      sc.seed = problem_seed(cfg.seed, p.id, 1);
      r.report = synthesize(spec, iid, markov, sc);
      if (iid && !p.annotation.empty()) r.jaccard = problem_jaccard(*iid, p, spec);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    write_file(path, row_to_json(r).dump(2) + "\n");
    rows.push_back(std::move(r));
  }

  RunSummary s = summarize(std::move(rows), mode_name(cfg.mode));
  write_file(cfg.outdir + "/summary.json", summary_to_json(s));
  return s;
}

std::string summary_to_json(const RunSummary& s) {
  json groups = json::object();
  for (const auto& [g, sc] : s.group_coverage) groups[g] = {sc.first, sc.second};
  json rows = json::array();
  for (const ProblemResult& r : s.rows) rows.push_back(row_to_json(r));
  json j{{"mode", s.mode},
         {"coverage", s.coverage},
         {"group_coverage", std::move(groups)},
         {"mean_candidates", s.mean_candidates},
         {"median_candidates", s.median_candidates},
         {"total_candidates", s.total_candidates},
         {"rows", std::move(rows)}};
  return j.dump(2) + "\n";
}

RunSummary summary_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed summary JSON");
  try {
    RunSummary s;
    s.mode = j.at("mode").get<std::string>();
    s.coverage = j.at("coverage").get<double>();
    for (const auto& [g, sc] : j.at("group_coverage").items())
      s.group_coverage[g] = {sc.at(0).get<int>(), sc.at(1).get<int>()};
    s.mean_candidates = j.at("mean_candidates").get<double>();
    s.median_candidates = j.at("median_candidates").get<double>();
    s.total_candidates = j.at("total_candidates").get<long>();
    for (const json& r : j.at("rows")) s.rows.push_back(row_of_json(r));
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad summary JSON: ") + e.what());
  }
}

std::pair<std::vector<BenchmarkProblem>, std::vector<BenchmarkProblem>> train_eval_split(
    const std::vector<BenchmarkProblem>& problems, double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw HarnessError("train_eval_split: fraction must lie in (0, 1)");
  std::vector<BenchmarkProblem> shuffled = problems;
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  size_t want = static_cast<size_t>(
      std::max<long long>(1, std::llround(fraction * static_cast<double>(problems.size()))));
  std::vector<BenchmarkProblem> train, eval;
  for (BenchmarkProblem& p : shuffled) {
    if (train.size() < want && !p.annotation.empty())
      train.push_back(std::move(p));
    else
      eval.push_back(std::move(p));
  }
  if (train.size() < want)
    throw HarnessError("train_eval_split: only " + std::to_string(train.size()) +
                       " annotated problems for a train share of " + std::to_string(want));
  return {std::move(train), std::move(eval)};
}

JaccardEval evaluate_jaccard(const IidModel& iid, const std::vector<BenchmarkProblem>& eval_set,
                             int examples, uint64_t seed) {
  JaccardEval out;
  for (const BenchmarkProblem& p : eval_set) {
    if (p.annotation.empty()) {
      std::cerr << "warning: " << p.id << " carries no ground truth, skipped\n";
      out.skipped += 1;
      continue;
    }
    ProblemSpec spec = build_problem_spec(p, examples, problem_seed(seed, p.id, 0));
    out.per_problem.emplace_back(p.id, problem_jaccard(iid, p, spec));
  }
  if (out.per_problem.empty())
    throw HarnessError("evaluate_jaccard: no annotated problems in the evaluation set");
  double sum = 0.0;
  for (const auto& [id, v] : out.per_problem) sum += v;
  out.mean = sum / static_cast<double>(out.per_problem.size());
  return out;
}

FragmentStats fragment_stats(const RunSummary& summary) {
  TrainingCorpus solved;
  std::map<std::string, std::map<std::string, double>> counts;
  std::map<std::string, double> group_totals;
  for (const ProblemResult& r : summary.rows) {
    if (!r.solved()) continue;
    CorpusRecord rec;
    rec.sig = parse_signature(r.signature);
    rec.sequence = r.report.sequence;
    for (const Fragment& f : rec.sequence) {
      counts[r.group][fragment_key(f, rec.sig)] += 1.0;
      group_totals[r.group] += 1.0;
    }
    solved.push_back(std::move(rec));
  }
  if (solved.empty()) throw HarnessError("fragment_stats: no solved rows");

  FragmentStats st;
  for (auto& [g, per_key] : counts) {
    for (auto& [k, n] : per_key) st.freq[g][k] = n / group_totals[g];
  }

  MarkovModel m = train_markov(solved);
  st.col_states = m.next_keys();
  std::set<std::string> keys;
  for (const auto& [pair, n] : m.w) {
    if (pair.first != start_key()) keys.insert(pair.first);
    if (pair.second != end_key()) keys.insert(pair.second);
  }
  st.row_states.push_back(start_key());
  st.row_states.insert(st.row_states.end(), keys.begin(), keys.end());

  std::set<std::string> all_keys(keys);
  for (const std::string& c : st.col_states) all_keys.insert(c);
  for (const std::string& from : st.row_states) {
    std::vector<double> row;
    for (const std::string& to : st.col_states)
      row.push_back(transition_prob(m, from, to, all_keys));
    st.transitions.push_back(std::move(row));
  }
  return st;
}

std::string stats_to_text(const FragmentStats& st) {
  std::ostringstream out;
  out << "fragment frequency by group\n";
  for (const auto& [g, per_key] : st.freq) {
    out << "  " << g << ":";
    for (const auto& [k, f] : per_key) {
      out << " " << k << "=";
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", f);
      out << buf;
    }
    out << "\n";
  }
  out << "\ntransition matrix (row -> column, rows sum to 1)\n";
  size_t w = 12;
  for (const std::string& s : st.col_states) w = std::max(w, s.size() + 2);
  out << std::string(w, ' ');
  for (const std::string& c : st.col_states) {
    out << c;
    out << std::string(w - c.size(), ' ');
  }
  out << "\n";
  for (size_t r = 0; r < st.row_states.size(); ++r) {
    const std::string& name = st.row_states[r];
    out << name << std::string(w - name.size(), ' ');
    for (double v : st.transitions[r]) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%-*.3f", static_cast<int>(w), v);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace synth
