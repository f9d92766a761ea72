#include "synth/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace synth {

FeatureVector featurize(const Signature& sig) {
  FeatureVector v{};
  for (const Param& p : sig.params) v[static_cast<int>(p.type)] += 1;
  v[7] = static_cast<int>(sig.params.size());
  switch (sig.ret) {
    case RetType::Char: v[8] = 1; break;
    case RetType::Int: v[9] = 1; break;
    case RetType::Float: v[10] = 1; break;
    case RetType::Void: v[11] = 1; break;
  }
  return v;
}

double Forest::predict(const FeatureVector& v) const {
  if (trees.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trees) {
    uint32_t n = 0;
    while (t[n].feature >= 0)
      n = (v[t[n].feature] <= t[n].threshold) ? t[n].left : t[n].right;
    sum += t[n].p;
  }
  return sum / static_cast<double>(trees.size());
}

double IidModel::prob(const std::string& key, const FeatureVector& v) const {
  auto it = forests.find(key);
  if (it == forests.end()) return 0.0;
  return it->second.predict(v);
}

namespace {

struct LabeledSet {
  const std::vector<FeatureVector>* x;
  const std::vector<int>* y;
};

double gini(int n, int pos) {
  if (n == 0) return 0.0;
  double p = static_cast<double>(pos) / n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

uint32_t grow(std::vector<TreeNode>& nodes, const LabeledSet& d, std::vector<int>& idx,
              int lo, int hi, int depth, int max_depth, std::mt19937_64& rng) {
  int n = hi - lo, pos = 0;
  for (int i = lo; i < hi; ++i) pos += (*d.y)[idx[i]];
  uint32_t me = static_cast<uint32_t>(nodes.size());
  nodes.push_back({});
  nodes[me].p = static_cast<float>(n ? static_cast<double>(pos) / n : 0.0);
  if (depth >= max_depth || pos == 0 || pos == n || n < 2) return me;

  // Bag roughly sqrt(kNumFeatures) candidate features for this node.
  std::array<int, kNumFeatures> feats;
  std::iota(feats.begin(), feats.end(), 0);
  for (int i = 0; i < 4; ++i) {
    std::uniform_int_distribution<int> pick(i, kNumFeatures - 1);
    std::swap(feats[i], feats[pick(rng)]);
  }

  double best = gini(n, pos);
  int best_f = -1, best_t = 0;
  for (int fi = 0; fi < 4; ++fi) {
    int f = feats[fi];
    std::vector<int> vals;
    vals.reserve(n);
    for (int i = lo; i < hi; ++i) vals.push_back((*d.x)[idx[i]][f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (size_t t = 0; t + 1 < vals.size(); ++t) {
      int thr = vals[t], nl = 0, pl = 0;
      for (int i = lo; i < hi; ++i) {
        if ((*d.x)[idx[i]][f] <= thr) {
          nl += 1;
          pl += (*d.y)[idx[i]];
        }
      }
      int nr = n - nl, pr = pos - pl;
      double w = (nl * gini(nl, pl) + nr * gini(nr, pr)) / n;
      if (w + 1e-12 < best) {
        best = w;
        best_f = f;
        best_t = thr;
      }
    }
  }
  if (best_f < 0) return me;

  auto mid = std::stable_partition(idx.begin() + lo, idx.begin() + hi,
                                   [&](int i) { return (*d.x)[i][best_f] <= best_t; });
  int cut = static_cast<int>(mid - idx.begin());
  uint32_t l = grow(nodes, d, idx, lo, cut, depth + 1, max_depth, rng);
  uint32_t r = grow(nodes, d, idx, cut, hi, depth + 1, max_depth, rng);
  nodes[me].feature = static_cast<int16_t>(best_f);
  nodes[me].threshold = static_cast<int16_t>(best_t);
  nodes[me].left = static_cast<uint16_t>(l);
  nodes[me].right = static_cast<uint16_t>(r);
  return me;
}

Forest train_forest(const std::vector<FeatureVector>& x, const std::vector<int>& y,
                    const IidConfig& cfg, std::mt19937_64& rng) {
  Forest f;
  int n = static_cast<int>(x.size());
  LabeledSet d{&x, &y};
  std::uniform_int_distribution<int> draw(0, n - 1);
  for (int t = 0; t < cfg.trees; ++t) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = draw(rng);
    std::sort(idx.begin(), idx.end());
    std::vector<TreeNode> nodes;
    grow(nodes, d, idx, 0, n, 0, cfg.max_depth, rng);
    f.trees.push_back(std::move(nodes));
  }
  return f;
}

}  // namespace

IidModel train_iid(const TrainingCorpus& corpus, const IidConfig& cfg) {
  if (corpus.empty()) throw ModelError("cannot train on an empty corpus");

  std::vector<FeatureVector> x;
  x.reserve(corpus.size());
  std::set<std::string> keys;
  for (const auto& rec : corpus) {
    if (rec.sequence.empty()) throw ModelError("corpus record has an empty sequence");
    x.push_back(featurize(rec.sig));
    for (const auto& g : rec.sequence) keys.insert(fragment_key(g, rec.sig));
  }

  IidModel m;
  std::mt19937_64 rng(cfg.seed);
  for (const auto& key : keys) {
    std::vector<int> y;
    y.reserve(corpus.size());
    for (const auto& rec : corpus) {
      bool present = std::any_of(rec.sequence.begin(), rec.sequence.end(),
                                 [&](const Fragment& g) { return fragment_key(g, rec.sig) == key; });
      y.push_back(present ? 1 : 0);
    }
    m.forests.emplace(key, train_forest(x, y, cfg, rng));
  }
  return m;
}

std::vector<Fragment> predict_F0(const IidModel& m, const ProblemSpec& spec,
                                 const std::vector<Fragment>& population) {
  std::vector<uint32_t> outs = detect_output_params(spec);
  FeatureVector v = featurize(spec.sig);
  std::vector<Fragment> f0;
  for (const auto& g : population) {
    bool store_hit = g.kind == FragmentKind::StoreOutput &&
                     std::find(outs.begin(), outs.end(), g.arg) != outs.end();
    bool model_hit = m.prob(fragment_key(g, spec.sig), v) >= m.theta;
    if (store_hit || model_hit) f0.push_back(g);
  }
  return f0;
}

double MarkovModel::row_sum(const std::string& prev) const {
  double s = 0.0;
  for (auto it = w.lower_bound({prev, std::string()});
       it != w.end() && it->first.first == prev; ++it)
    s += it->second;
  return s;
}

std::vector<std::string> MarkovModel::next_keys() const {
  std::set<std::string> ks;
  for (const auto& [pair, count] : w)
    if (count > 0) ks.insert(pair.second);
  return {ks.begin(), ks.end()};
}

MarkovModel train_markov(const TrainingCorpus& corpus) {
  if (corpus.empty()) throw ModelError("cannot train on an empty corpus");
  MarkovModel m;
  for (const auto& rec : corpus) {
    if (rec.sequence.empty()) throw ModelError("corpus record has an empty sequence");
    std::string prev = start_key();
    for (const auto& g : rec.sequence) {
      std::string k = fragment_key(g, rec.sig);
      m.w[{prev, k}] += 1.0;
      prev = k;
    }
    m.w[{prev, end_key()}] += 1.0;
  }
  return m;
}

double transition_prob(const MarkovModel& m, const std::string& prev, const std::string& next,
                       const std::set<std::string>& f0_keys) {
  double s = m.row_sum(prev);
  if (s <= 0.0) {
    // Unseen predecessor: uniform over every key the model can emit.
    std::vector<std::string> ks = m.next_keys();
    if (ks.empty()) return 0.0;
    bool known = std::find(ks.begin(), ks.end(), next) != ks.end();
    return known ? 1.0 / static_cast<double>(ks.size()) : 0.0;
  }

  auto count = [&](const std::string& to) {
    auto it = m.w.find({prev, to});
    return it == m.w.end() ? 0.0 : it->second;
  };
  double pw = count(next) / s;

  // Restricted row: mass on F0 members and the terminator only.
  auto allowed = [&](const std::string& k) {
    return k == end_key() || f0_keys.count(k) > 0;
  };
  double sp = 0.0;
  for (auto it = m.w.lower_bound({prev, std::string()});
       it != m.w.end() && it->first.first == prev; ++it)
    if (allowed(it->first.second)) sp += it->second;
  if (sp <= 0.0) return pw;

  double pr = allowed(next) ? count(next) / sp : 0.0;
  return m.b * pr + (1.0 - m.b) * pw;
}

std::vector<Fragment> sample_sequence(const MarkovModel& m, const std::vector<Fragment>& f0,
                                      const Signature& sig,
                                      const std::vector<Fragment>& population,
                                      std::mt19937_64& rng) {
  std::set<std::string> f0_keys;
  for (const auto& g : f0) f0_keys.insert(fragment_key(g, sig));
  std::set<std::string> pop_keys;
  for (const auto& g : population) pop_keys.insert(fragment_key(g, sig));

  std::vector<std::string> universe = m.next_keys();
  std::vector<Fragment> out;
  std::string prev = start_key();

  while (static_cast<int>(out.size()) < m.max_length) {
    std::vector<std::pair<std::string, double>> choices;
    double total = 0.0;
    for (const auto& k : universe) {
      if (k != end_key() && pop_keys.count(k) == 0) continue;  // not realizable here
      double p = transition_prob(m, prev, k, f0_keys);
      if (p > 0.0) {
        choices.emplace_back(k, p);
        total += p;
      }
    }
    if (choices.empty() || total <= 0.0) break;

    std::uniform_real_distribution<double> unit(0.0, total);
    double u = unit(rng);
    std::string chosen = choices.back().first;
    for (const auto& [k, p] : choices) {
      if (u < p) {
        chosen = k;
        break;
      }
      u -= p;
    }
    if (chosen == end_key()) break;

    std::vector<const Fragment*> members;
    for (const auto& g : f0)
      if (fragment_key(g, sig) == chosen) members.push_back(&g);
    if (members.empty())
      for (const auto& g : population)
        if (fragment_key(g, sig) == chosen) members.push_back(&g);
    std::uniform_int_distribution<size_t> pick(0, members.size() - 1);
    out.push_back(*members[pick(rng)]);
    prev = chosen;
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::string> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::vector<std::string> uni;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

}  // namespace synth
