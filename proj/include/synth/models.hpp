#pragma once

#include <array>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "synth/fragment.hpp"
#include "synth/spec.hpp"

namespace synth {

// 7 param-type counts, arity, return-type one-hot (char/int/float/void).
constexpr int kNumFeatures = 12;
using FeatureVector = std::array<int, kNumFeatures>;

FeatureVector featurize(const Signature& sig);

struct CorpusRecord {
  Signature sig;
  std::vector<Fragment> sequence;
};
using TrainingCorpus = std::vector<CorpusRecord>;

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TreeNode {
  int16_t feature = -1;   // -1 marks a leaf
  int16_t threshold = 0;  // left subtree when v[feature] <= threshold
  uint16_t left = 0, right = 0;
  float p = 0.f;  // positive fraction at this node
};

struct Forest {
  std::vector<std::vector<TreeNode>> trees;
  double predict(const FeatureVector& v) const;  // mean of leaf fractions
};

struct IidConfig {
  int trees = 32;
  int max_depth = 8;
  uint64_t seed = 0;
};

struct IidModel {
  std::map<std::string, Forest> forests;  // keyed by FragmentKey
  double theta = 0.5;

  double prob(const std::string& key, const FeatureVector& v) const;
};

IidModel train_iid(const TrainingCorpus& corpus, const IidConfig& cfg = {});

// F_S (stores into detected output params) united with the classifier
// picks. population must come from instantiate_population(spec.sig).
std::vector<Fragment> predict_F0(const IidModel& m, const ProblemSpec& spec,
                                 const std::vector<Fragment>& population);

struct MarkovModel {
  std::map<std::pair<std::string, std::string>, double> w;  // bigram counts
  double b = 0.75;
  int max_length = 6;

  double row_sum(const std::string& prev) const;
  std::vector<std::string> next_keys() const;  // every key observed in second position
};

MarkovModel train_markov(const TrainingCorpus& corpus);

// b-blend of the F0-restricted and base bigram distributions. Rows never
// seen in training fall back to a uniform distribution over known keys.
double transition_prob(const MarkovModel& m, const std::string& prev, const std::string& next,
                       const std::set<std::string>& f0_keys);

// Draws fragment keys until f_end or max_length, re-instantiating each key
// uniformly among type-compatible population members, preferring F0.
std::vector<Fragment> sample_sequence(const MarkovModel& m, const std::vector<Fragment>& f0,
                                      const Signature& sig,
                                      const std::vector<Fragment>& population,
                                      std::mt19937_64& rng);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

}  // namespace synth
