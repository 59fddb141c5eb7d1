// Copyright 2026 The wcnslu Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wcnslu/confusion_network.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "wcnslu/error.h"

namespace wcnslu {

namespace {

// Residual probability mass below this is dropped rather than turned into an
// epsilon option.
constexpr double kMinEpsilonMass = 1e-9;

struct Cluster {
  std::vector<int> arcs;  // arc positions, ascending
  double lo = 0.0, hi = 0.0;
  double sum_post = 0.0;
  double max_post = 0.0;
  int min_arc_id = 0;
  bool alive = true;
};

// Greedy agglomerative clustering of lattice arcs, shared by ClusterArcs and
// BuildWcn.
class ConsensusClusterer {
 public:
  ConsensusClusterer(const Lattice& lat, const ArcPosteriors& post)
      : lat_(lat), post_(post) {
    BuildNodeReach();
    InitClusters();
  }

  // Runs both merge stages and returns, per arc position, the final bin index
  // in bin order.
  std::vector<int> Run() {
    MergePass(/*same_word=*/true);
    MergePass(/*same_word=*/false);
    return OrderClusters();
  }

 private:
  // reach_[id] = node ids reachable from id, including id itself.
  void BuildNodeReach() {
    for (auto it = lat_.topo_order().rbegin(); it != lat_.topo_order().rend(); ++it) {
      int id = *it;
      std::set<int>& r = reach_[id];
      r.insert(id);
      for (int j : lat_.out_arcs(id)) {
        const std::set<int>& tail = reach_[lat_.arcs()[j].to];
        r.insert(tail.begin(), tail.end());
      }
    }
  }

  bool ArcPrecedes(int a, int b) const {
    return reach_.at(lat_.arcs()[a].to).count(lat_.arcs()[b].from) > 0;
  }

  double Posterior(int arc_pos) const { return post_.at(lat_.arcs()[arc_pos].id); }

  void InitClusters() {
    const bool timed = lat_.has_times();
    for (size_t j = 0; j < lat_.arcs().size(); ++j) {
      const LatticeArc& a = lat_.arcs()[j];
      Cluster c;
      c.arcs = {static_cast<int>(j)};
      if (timed) {
        c.lo = *lat_.node(a.from).time;
        c.hi = *lat_.node(a.to).time;
      } else {
        c.lo = lat_.level(a.from);
        c.hi = lat_.level(a.to);
      }
      c.sum_post = c.max_post = Posterior(static_cast<int>(j));
      c.min_arc_id = a.id;
      clusters_.push_back(std::move(c));
    }
    const size_t n = clusters_.size();
    prec_.assign(n, std::vector<bool>(n, false));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (i != j && ArcPrecedes(static_cast<int>(i), static_cast<int>(j))) {
          prec_[i][j] = true;
        }
      }
    }
  }

  static bool Overlaps(const Cluster& a, const Cluster& b) {
    if (a.lo == b.lo && a.hi == b.hi) return true;  // zero-length equal spans
    return std::max(a.lo, b.lo) < std::min(a.hi, b.hi);
  }

  static double OverlapLen(const Cluster& a, const Cluster& b) {
    return std::min(a.hi, b.hi) - std::max(a.lo, b.lo);
  }

  // True if cluster `to` is reachable from `from` through precedence edges.
  bool ClusterReaches(int from, int to) const {
    if (from == to) return true;
    std::vector<bool> seen(clusters_.size(), false);
    std::deque<int> queue = {from};
    seen[from] = true;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (size_t u = 0; u < clusters_.size(); ++u) {
        if (!clusters_[u].alive || seen[u] || !prec_[v][u]) continue;
        if (static_cast<int>(u) == to) return true;
        seen[u] = true;
        queue.push_back(static_cast<int>(u));
      }
    }
    return false;
  }

  // Mergeable = the merged cluster would still contain no two arcs of a
  // common path and the precedence relation would stay acyclic.
  bool Mergeable(int i, int j) const {
    return !ClusterReaches(i, j) && !ClusterReaches(j, i);
  }

  bool SameWord(const Cluster& a, const Cluster& b) const {
    return lat_.arcs()[a.arcs[0]].word == lat_.arcs()[b.arcs[0]].word;
  }

  void Merge(int i, int j) {
    Cluster& a = clusters_[i];
    Cluster& b = clusters_[j];
    std::vector<int> merged;
    std::merge(a.arcs.begin(), a.arcs.end(), b.arcs.begin(), b.arcs.end(),
               std::back_inserter(merged));
    a.arcs = std::move(merged);
    a.lo = std::min(a.lo, b.lo);
    a.hi = std::max(a.hi, b.hi);
    a.sum_post += b.sum_post;
    a.max_post = std::max(a.max_post, b.max_post);
    a.min_arc_id = std::min(a.min_arc_id, b.min_arc_id);
    b.alive = false;
    for (size_t u = 0; u < clusters_.size(); ++u) {
      if (prec_[j][u]) prec_[i][u] = true;
      if (prec_[u][j]) prec_[u][i] = true;
    }
  }

  void MergePass(bool same_word) {
    while (true) {
      int best_i = -1, best_j = -1;
      double best_post = -1.0, best_overlap = -1.0;
      int best_min_id = std::numeric_limits<int>::max();
      for (size_t i = 0; i < clusters_.size(); ++i) {
        if (!clusters_[i].alive) continue;
        for (size_t j = i + 1; j < clusters_.size(); ++j) {
          if (!clusters_[j].alive) continue;
          const Cluster& a = clusters_[i];
          const Cluster& b = clusters_[j];
          if (same_word && !SameWord(a, b)) continue;
          if (!Overlaps(a, b)) continue;
          // Candidate rank: descending posterior, then overlap, then arc id.
          double post = same_word ? a.sum_post + b.sum_post
                                  : std::max(a.max_post, b.max_post);
          double over = OverlapLen(a, b);
          int min_id = std::min(a.min_arc_id, b.min_arc_id);
          if (best_i >= 0) {
            if (post < best_post) continue;
            if (post == best_post && over < best_overlap) continue;
            if (post == best_post && over == best_overlap && min_id >= best_min_id)
              continue;
          }
          if (!Mergeable(static_cast<int>(i), static_cast<int>(j))) continue;
          best_i = static_cast<int>(i);
          best_j = static_cast<int>(j);
          best_post = post;
          best_overlap = over;
          best_min_id = min_id;
        }
      }
      if (best_i < 0) break;
      Merge(best_i, best_j);
    }
  }

  // Kahn's algorithm over the cluster precedence DAG; ties resolved by span
  // start, span end, then smallest arc id.
  std::vector<int> OrderClusters() {
    std::vector<int> alive;
    for (size_t i = 0; i < clusters_.size(); ++i) {
      if (clusters_[i].alive) alive.push_back(static_cast<int>(i));
    }
    std::map<int, int> indeg;
    for (int v : alive) {
      indeg[v] = 0;
    }
    for (int v : alive) {
      for (int u : alive) {
        if (v != u && prec_[v][u]) ++indeg[u];
      }
    }
    auto order_key = [this](int v) {
      const Cluster& c = clusters_[v];
      return std::make_tuple(c.lo, c.hi, c.min_arc_id);
    };
    std::vector<int> bin_of_cluster(clusters_.size(), -1);
    int next_bin = 0;
    std::set<std::pair<std::tuple<double, double, int>, int>> ready;
    for (int v : alive) {
      if (indeg[v] == 0) ready.insert({order_key(v), v});
    }
    while (!ready.empty()) {
      int v = ready.begin()->second;
      ready.erase(ready.begin());
      bin_of_cluster[v] = next_bin++;
      for (int u : alive) {
        if (u != v && prec_[v][u] && --indeg[u] == 0) {
          ready.insert({order_key(u), u});
        }
      }
    }

    std::vector<int> bin_of_arc(lat_.arcs().size(), -1);
    for (int v : alive) {
      for (int arc : clusters_[v].arcs) bin_of_arc[arc] = bin_of_cluster[v];
    }
    return bin_of_arc;
  }

  const Lattice& lat_;
  const ArcPosteriors& post_;
  std::map<int, std::set<int>> reach_;
  std::vector<Cluster> clusters_;
  std::vector<std::vector<bool>> prec_;
};

}  // namespace

std::vector<int> ClusterArcs(const Lattice& lat, const ArcPosteriors& post) {
  if (lat.empty()) throw EmptyLattice("cannot build a WCN from an empty lattice");
  return ConsensusClusterer(lat, post).Run();
}

ConfusionNetwork BuildWcn(const Lattice& lat, const ArcPosteriors& post) {
  std::vector<int> bin_of_arc = ClusterArcs(lat, post);
  int num_bins = 0;
  for (int b : bin_of_arc) num_bins = std::max(num_bins, b + 1);

  ConfusionNetwork cn;
  cn.bins.resize(num_bins);
  for (int b = 0; b < num_bins; ++b) {
    // Options keep lattice arc order: one option per distinct word, keyed by
    // the smallest contributing arc id.
    std::map<int, std::pair<std::string, double>> by_first_arc;
    std::map<std::string, int> word_slot;
    double total = 0.0;
    double epsilon_mass = 0.0;
    for (size_t j = 0; j < bin_of_arc.size(); ++j) {
      if (bin_of_arc[j] != b) continue;
      const LatticeArc& arc = lat.arcs()[j];
      double p = post.at(arc.id);
      total += p;
      if (arc.is_epsilon()) {
        epsilon_mass += p;
        continue;
      }
      auto it = word_slot.find(arc.word);
      if (it == word_slot.end()) {
        word_slot[arc.word] = arc.id;
        by_first_arc[arc.id] = {arc.word, p};
      } else {
        by_first_arc[it->second].second += p;
      }
    }
    CnBin& bin = cn.bins[b];
    for (const auto& [arc_id, opt] : by_first_arc) {
      bin.push_back({opt.first, opt.second});
    }
    // Paths that skip this bin leave residual mass behind; it becomes the
    // epsilon option together with any mass from explicit epsilon arcs.
    epsilon_mass += std::max(0.0, 1.0 - total);
    if (epsilon_mass > kMinEpsilonMass) {
      bin.push_back({"", epsilon_mass});
    }
  }
  return cn;
}

ConfusionNetwork FilterOptions(const ConfusionNetwork& cn, double threshold) {
  ConfusionNetwork out;
  for (const CnBin& bin : cn.bins) {
    CnBin real;
    for (const CnOption& opt : bin) {
      if (!opt.is_epsilon()) real.push_back(opt);
    }
    if (real.empty()) continue;  // confident deletion: drop the bin
    CnBin kept;
    for (const CnOption& opt : real) {
      if (opt.posterior >= threshold) kept.push_back(opt);
    }
    if (kept.empty()) {
      // Keep the single best option so the sentence never silently loses a
      // position.
      const CnOption* best = &real[0];
      for (const CnOption& opt : real) {
        if (opt.posterior > best->posterior ||
            (opt.posterior == best->posterior && opt.word < best->word)) {
          best = &opt;
        }
      }
      kept.push_back(*best);
    }
    out.bins.push_back(std::move(kept));
  }
  return out;
}

std::string FlattenWcn(const ConfusionNetwork& cn, const WcnRenderOptions& opts) {
  if (opts.separator != "|" && opts.separator != "/") {
    throw Error("separator must be \"|\" or \"/\"");
  }
  std::string out;
  for (size_t b = 0; b < cn.bins.size(); ++b) {
    if (b > 0) out += ' ';
    const CnBin& bin = cn.bins[b];
    for (size_t i = 0; i < bin.size(); ++i) {
      if (bin[i].is_epsilon()) {
        throw EpsilonPresent("bin " + std::to_string(b) +
                             " still holds an epsilon option; filter first");
      }
      if (i > 0) out += opts.separator;
      out += bin[i].word;
    }
  }
  return out;
}

WcnStats ComputeWcnStats(const ConfusionNetwork& cn) {
  if (cn.bins.empty()) throw EmptyNetwork("confusion network has no bins");
  WcnStats stats;
  stats.bins = static_cast<int>(cn.bins.size());
  int options = 0;
  for (const CnBin& bin : cn.bins) {
    options += static_cast<int>(bin.size());
    stats.max_bin_size = std::max(stats.max_bin_size, static_cast<int>(bin.size()));
  }
  stats.options_per_word = static_cast<double>(options) / stats.bins;
  return stats;
}

std::string SerializeWcn(const ConfusionNetwork& cn) {
  std::ostringstream out;
  char buf[32];
  for (const CnBin& bin : cn.bins) {
    for (size_t i = 0; i < bin.size(); ++i) {
      if (i > 0) out << ' ';
      std::snprintf(buf, sizeof(buf), "%.6f", bin[i].posterior);
      out << (bin[i].is_epsilon() ? "<eps>" : bin[i].word) << ':' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace wcnslu
