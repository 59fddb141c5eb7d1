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

#ifndef WCNSLU_LATTICE_H_
#define WCNSLU_LATTICE_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wcnslu {

// SLF spelling of the epsilon (null) word. Internally epsilon is the empty
// string; !NULL appears only in serialized lattices.
inline constexpr std::string_view kNullWord = "!NULL";

struct LatticeNode {
  int id = 0;
  std::optional<double> time;  // seconds
};

struct LatticeArc {
  int id = 0;
  int from = 0;
  int to = 0;
  std::string word;       // empty = epsilon
  double acoustic = 0.0;  // natural-log weight
  double lm = 0.0;        // natural-log weight

  bool is_epsilon() const { return word.empty(); }
};

// Acoustic / LM weight multipliers applied when combining arc scores.
struct Scales {
  double acoustic = 1.0;
  double lm = 1.0;
};

// A single path read out of a lattice: epsilon-free word sequence plus the
// combined log weight of its arcs.
struct ScoredHypothesis {
  std::vector<std::string> words;
  double score = 0.0;
};

// Arc id -> posterior probability. For every topological cut of the lattice
// the posteriors of arcs crossing it sum to one.
using ArcPosteriors = std::map<int, double>;

// Immutable word lattice: a DAG over nodes with word-bearing weighted arcs.
// Node 0 is the start; nodes without outgoing arcs are end nodes. Instances
// are validated on construction (acyclic, no dangling arcs, time-monotone)
// and pruned to the part reachable from the start node. All member functions
// are const; instances are safe to share across threads.
class Lattice {
 public:
  Lattice() = default;  // empty; dynamic-programming ops reject it

  // Validates and prunes. Throws MalformedHeader, DanglingArc, CycleDetected
  // or NoPathToEnd.
  static Lattice FromParts(std::vector<LatticeNode> nodes,
                           std::vector<LatticeArc> arcs);

  bool empty() const { return arcs_.empty(); }
  const std::vector<LatticeNode>& nodes() const { return nodes_; }
  const std::vector<LatticeArc>& arcs() const { return arcs_; }
  int start_node() const { return 0; }
  const std::vector<int>& end_nodes() const { return end_nodes_; }

  const LatticeNode& node(int node_id) const;
  bool is_end_node(int node_id) const;

  // Arc positions (indices into arcs()) leaving / entering a node.
  const std::vector<int>& out_arcs(int node_id) const;
  const std::vector<int>& in_arcs(int node_id) const;

  // Node ids in a deterministic topological order (start node first).
  const std::vector<int>& topo_order() const { return topo_order_; }

  // Longest-path depth of each node from the start; proxy for word position
  // when node times are absent.
  int level(int node_id) const;

  // True iff every node carries a time stamp.
  bool has_times() const { return has_times_; }

  // Combined log weight of one arc under the given scales.
  double arc_weight(int arc_pos, const Scales& scales) const {
    const LatticeArc& a = arcs_[arc_pos];
    return scales.acoustic * a.acoustic + scales.lm * a.lm;
  }

 private:
  int node_pos(int node_id) const;
  void BuildIndex();

  std::vector<LatticeNode> nodes_;
  std::vector<LatticeArc> arcs_;
  std::vector<int> end_nodes_;
  std::vector<int> topo_order_;
  std::vector<int> levels_;                 // by node position
  std::vector<std::vector<int>> out_arcs_;  // by node position
  std::vector<std::vector<int>> in_arcs_;   // by node position
  std::map<int, int> node_index_;           // id -> position
  bool has_times_ = false;
};

// Parses the SLF subset: '#' comment lines, N=/L= header counts, node lines
// "I=<id> [t=<float>]", arc lines "J=<id> S=<id> E=<id> W=<word> a=<float>
// l=<float>". W=!NULL denotes epsilon.
Lattice ParseLattice(std::string_view text);

// Debug serializer; ParseLattice(RenderLattice(lat)) reproduces the
// node/arc structure exactly.
std::string RenderLattice(const Lattice& lat);

// Forward-backward arc posteriors in the log domain:
//   posterior(arc) = exp(alpha(from) + w(arc) + beta(to) - logZ).
ArcPosteriors ComputeArcPosteriors(const Lattice& lat, const Scales& scales);

// Maximum-weight start-to-end path. Ties broken by lexicographically
// smallest word sequence, then smallest arc-id sequence.
ScoredHypothesis BestPath(const Lattice& lat, const Scales& scales);

// Top-k paths by descending combined weight, tie-broken as in BestPath.
// With unique_words, duplicate word sequences collapse onto their best
// scoring path. Result has at most k entries; the first equals BestPath.
std::vector<ScoredHypothesis> NBest(const Lattice& lat, int k,
                                    const Scales& scales,
                                    bool unique_words = false);

// Stable log(exp(a) + exp(b)).
double LogAdd(double a, double b);

}  // namespace wcnslu

#endif  // WCNSLU_LATTICE_H_
