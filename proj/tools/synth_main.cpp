#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "synth/bench.hpp"
#include "synth/jsonio.hpp"
#include "synth/oracle.hpp"

namespace {

using namespace synth;

int cmd_spec(const std::string& sig_decl, const std::string& oracle_id, int examples,
             uint64_t seed, bool string_mode, const std::vector<int64_t>& int_range,
             const std::vector<int64_t>& buf_len, const std::vector<int64_t>& char_range,
             const std::vector<double>& float_range, const std::string& out_path) {
  std::optional<Signature> sig;
  if (!sig_decl.empty()) sig = parse_signature(sig_decl);
  auto oracle = make_oracle(oracle_id, sig);

  SamplingConfig cfg;
  cfg.examples = examples;
  cfg.seed = seed;
  cfg.string_mode = string_mode;
  if (!int_range.empty()) cfg.int_range = {int_range[0], int_range[1]};
  if (!buf_len.empty()) cfg.buf_len = {buf_len[0], buf_len[1]};
  if (!char_range.empty()) cfg.char_range = {char_range[0], char_range[1]};
  if (!float_range.empty()) cfg.float_range = {float_range[0], float_range[1]};
  ProblemSpec spec = build_spec(*oracle, cfg);
  write_file(out_path, spec_to_json(spec));
  std::cout << "wrote " << out_path << ": " << spec.examples.size() << " examples of "
            << spec.sig.render() << "\n";
  return 0;
}

int cmd_run(const std::string& spec_path, const std::string& model_path, const std::string& mode,
            double budget, uint64_t seed, const std::string& report_path) {
  ProblemSpec spec = spec_from_json(read_file(spec_path));

  IidModel iid;
  MarkovModel markov;
  bool have_models = !model_path.empty();
  if (have_models) models_from_json(read_file(model_path), iid, markov);

  SearchConfig cfg;
  cfg.mode = parse_mode(mode);
  cfg.time_budget = budget;
  cfg.seed = seed;
  if (cfg.mode != Mode::Uniform && !have_models)
    throw HarnessError("mode '" + mode + "' needs --model");

  SynthesisReport rep = synthesize(spec, have_models ? &iid : nullptr,
                                   have_models ? &markov : nullptr, cfg);

  std::cout << "status:     " << to_string(rep.status) << "\n"
            << "candidates: " << rep.candidates << "\n"
            << "sketches:   " << rep.sketches << "\n"
            << "wall time:  " << rep.wall_time << " s\n";
  if (rep.status == Status::Solved) {
    std::cout << "sequence:   " << print_sequence(rep.sequence, spec.sig) << "\n\n"
              << rep.pseudo_c_text << "\n";
  }
  if (!report_path.empty()) {
    write_file(report_path, report_to_json(rep, spec.sig));
    std::cout << "wrote " << report_path << "\n";
  }
  return 0;
}

int cmd_train(const std::string& corpus_path, uint64_t seed, const std::string& out_path) {
  TrainingCorpus corpus = corpus_from_text(read_file(corpus_path));
  IidModel iid;
  MarkovModel markov;
  train_models(corpus, iid, markov, seed);
  write_file(out_path, models_to_json(iid, markov));
  std::cout << "wrote " << out_path << ": " << corpus.size() << " records, "
            << iid.forests.size() << " fragment classifiers, " << markov.w.size()
            << " transition pairs\n";
  return 0;
}

int cmd_bench(const std::string& suite, const std::string& model_path, const std::string& mode,
              double budget, int examples, uint64_t seed, const std::string& outdir) {
  if (suite != "desk") throw HarnessError("unknown suite: " + suite + " (only 'desk' exists)");
  std::vector<BenchmarkProblem> problems = desk_problems();

  IidModel iid;
  MarkovModel markov;
  if (!model_path.empty()) {
    models_from_json(read_file(model_path), iid, markov);
  } else {
    train_models(corpus_from(problems), iid, markov, seed);
    std::cout << "no --model given; trained on the suite's own annotations\n";
  }

  SuiteConfig cfg;
  cfg.mode = parse_mode(mode);
  cfg.budget = budget;
  cfg.examples = examples;
  cfg.seed = seed;
  cfg.outdir = outdir;
  RunSummary s = run_suite(problems, &iid, &markov, cfg);

  for (const ProblemResult& r : s.rows) {
    std::cout << (r.solved() ? "  solved " : r.error.empty() ? "  ------ " : "  error  ")
              << r.id;
    if (r.error.empty())
      std::cout << "  (" << r.report.candidates << " candidates, " << r.report.wall_time
                << " s" << (r.resumed ? ", resumed" : "") << ")";
    else
      std::cout << "  " << r.error;
    std::cout << "\n";
  }
  std::cout << "coverage: " << s.coverage << "  mean candidates: " << s.mean_candidates
            << "  median: " << s.median_candidates << "\nwrote " << outdir << "/summary.json\n";
  return 0;
}

int cmd_stats(const std::string& outdir) {
  RunSummary s = summary_from_json(read_file(outdir + "/summary.json"));
  std::cout << stats_to_text(fragment_stats(s));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"black-box program synthesizer"};
  app.require_subcommand(1);

  std::string sig_decl, oracle_id, out_path;
  int examples = 32;
  uint64_t seed = 0;
  bool string_mode = false;
  std::vector<int64_t> int_range, buf_len, char_range;
  std::vector<double> float_range;
  auto* sp = app.add_subcommand("spec", "sample a behavioral spec from an oracle");
  sp->add_option("--sig", sig_decl, "signature, e.g. \"int f(int* a, int n)\"");
  sp->add_option("--oracle", oracle_id, "builtin:<name> or proc:<command>")->required();
  sp->add_option("--examples", examples, "examples to sample")->default_val(32);
  sp->add_option("--seed", seed, "sampling seed")->default_val(0);
  sp->add_flag("--string-mode", string_mode, "zero-terminate char buffers");
  sp->add_option("--int-range", int_range, "int argument range LO HI")->expected(2);
  sp->add_option("--buf-len", buf_len, "buffer length range LO HI")->expected(2);
  sp->add_option("--char-range", char_range, "char range LO HI")->expected(2);
  sp->add_option("--float-range", float_range, "float argument range LO HI")->expected(2);
  sp->add_option("-o,--out", out_path, "output spec.json")->required();

  std::string spec_path, model_path, mode = "markov", report_path;
  double budget = 60.0;
  auto* rn = app.add_subcommand("run", "synthesize a program for a spec");
  rn->add_option("--spec", spec_path, "spec.json")->required();
  rn->add_option("--model", model_path, "model.json (omit for uniform mode)");
  rn->add_option("--mode", mode, "markov | iid-only | uniform")->default_val("markov");
  rn->add_option("--budget", budget, "time budget in seconds")->default_val(60.0);
  rn->add_option("--seed", seed, "engine seed")->default_val(0);
  rn->add_option("--report", report_path, "also write the report as JSON");

  std::string corpus_path;
  auto* tr = app.add_subcommand("train", "train models from an annotated corpus");
  tr->add_option("--corpus", corpus_path, "corpus.txt")->required();
  tr->add_option("--seed", seed, "training seed")->default_val(0);
  tr->add_option("-o,--out", out_path, "output model.json")->required();

  std::string suite = "desk", outdir;
  auto* be = app.add_subcommand("bench", "run a benchmark suite");
  be->add_option("--suite", suite, "suite name")->default_val("desk");
  be->add_option("--model", model_path, "model.json (omit to train on the suite)");
  be->add_option("--mode", mode, "markov | iid-only | uniform")->default_val("markov");
  be->add_option("--budget", budget, "per-problem budget in seconds")->default_val(60.0);
  be->add_option("--examples", examples, "examples per problem")->default_val(32);
  be->add_option("--seed", seed, "suite seed")->default_val(0);
  be->add_option("-o,--out", outdir, "output directory")->required();

  auto* st = app.add_subcommand("stats", "fragment statistics of a finished suite");
  st->add_option("outdir", outdir, "suite output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sp->parsed())
      return cmd_spec(sig_decl, oracle_id, examples, seed, string_mode, int_range, buf_len,
                      char_range, float_range, out_path);
    if (rn->parsed()) return cmd_run(spec_path, model_path, mode, budget, seed, report_path);
    if (tr->parsed()) return cmd_train(corpus_path, seed, out_path);
    if (be->parsed()) return cmd_bench(suite, model_path, mode, budget, examples, seed, outdir);
    if (st->parsed()) return cmd_stats(outdir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
