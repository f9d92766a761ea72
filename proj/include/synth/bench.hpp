#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "synth/models.hpp"
#include "synth/search.hpp"

namespace synth {

struct HarnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One benchmark entry: a reference implementation plus the sampling ranges
// that keep its loop bounds inside every sampled buffer. annotation is the
// known solution in fragment notation ("" when unknown); it doubles as the
// training corpus record and as Jaccard ground truth.
struct BenchmarkProblem {
  std::string id;
  std::string group;
  std::string oracle;     // builtin oracle name
  std::string signature;  // declaration text, matches the oracle
  SamplingConfig sampling;
  std::string annotation;
};

// 20 problems across 8 groups, at least two per group.
std::vector<BenchmarkProblem> desk_problems();

// Samples `examples` observations of the problem's oracle.
ProblemSpec build_problem_spec(const BenchmarkProblem& p, int examples, uint64_t seed);

// Training records from every annotated problem.
TrainingCorpus corpus_from(const std::vector<BenchmarkProblem>& problems);

// Trains both models from the corpus. The sampler's length cap is raised
// to the longest training sequence so nothing in the corpus is unreachable.
void train_models(const TrainingCorpus& corpus, IidModel& iid, MarkovModel& markov,
                  uint64_t seed = 0);

const char* mode_name(Mode m);
Mode parse_mode(const std::string& name);

struct SuiteConfig {
  Mode mode = Mode::Markov;
  double budget = 60.0;  // seconds per problem
  int examples = 32;
  uint64_t seed = 0;
  std::string outdir;
  SearchConfig search;  // base engine settings; mode/budget/seed set per problem
};

struct ProblemResult {
  std::string id;
  std::string group;
  std::string signature;
  std::string error;  // nonempty when the problem failed to run at all
  double jaccard = -1.0;  // initial-fragment-set agreement; -1 when not evaluated
  SynthesisReport report;
  bool resumed = false;  // loaded from a previous run's file, not re-synthesized

  bool solved() const { return error.empty() && report.status == Status::Solved; }
};

struct RunSummary {
  std::string mode;
  std::vector<ProblemResult> rows;
  std::map<std::string, std::pair<int, int>> group_coverage;  // solved, total
  double coverage = 0.0;
  double mean_candidates = 0.0;
  double median_candidates = 0.0;
  long total_candidates = 0;
};

// Aggregates are always derived from the rows, never carried separately.
RunSummary summarize(std::vector<ProblemResult> rows, const std::string& mode);

// Runs synthesize once per problem, each with its own derived seed and the
// suite budget. A problem whose result file already exists in outdir is
// loaded instead of re-run, so an interrupted suite continues where it
// stopped. Individual failures land in the row's error field; the suite
// always completes. Writes <outdir>/<id>.json per problem plus
// <outdir>/summary.json.
RunSummary run_suite(const std::vector<BenchmarkProblem>& problems, const IidModel* iid,
                     const MarkovModel* markov, const SuiteConfig& cfg);

std::string summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const std::string& text);

// Deterministic split; the train side only takes annotated problems.
// Throws HarnessError when fewer than round(fraction * size) problems
// carry annotations.
std::pair<std::vector<BenchmarkProblem>, std::vector<BenchmarkProblem>> train_eval_split(
    const std::vector<BenchmarkProblem>& problems, double fraction, uint64_t seed);

struct JaccardEval {
  std::vector<std::pair<std::string, double>> per_problem;
  double mean = 0.0;
  int skipped = 0;  // problems without annotations
};

// Compares the model's predicted initial fragment set against each
// problem's annotation keys united with its detected-output stores.
JaccardEval evaluate_jaccard(const IidModel& iid, const std::vector<BenchmarkProblem>& eval_set,
                             int examples, uint64_t seed);

struct FragmentStats {
  // group -> fragment key -> relative frequency among that group's solutions
  std::map<std::string, std::map<std::string, double>> freq;
  std::vector<std::string> row_states;  // "f_start" first
  std::vector<std::string> col_states;  // includes "f_end"
  std::vector<std::vector<double>> transitions;  // each row sums to 1
};

// Statistics over the solved rows of a run. Throws HarnessError when
// nothing was solved.
FragmentStats fragment_stats(const RunSummary& summary);
std::string stats_to_text(const FragmentStats& st);

}  // namespace synth
