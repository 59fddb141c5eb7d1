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

#include "wcnslu/lattice.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "wcnslu/error.h"

namespace wcnslu {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::string_view> SplitTokens(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

struct Field {
  std::string_view key;
  std::string_view value;
};

Field SplitField(std::string_view token, int line_no) {
  size_t eq = token.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw MalformedHeader("line " + std::to_string(line_no) +
                          ": expected key=value field, got '" +
                          std::string(token) + "'");
  }
  return {token.substr(0, eq), token.substr(eq + 1)};
}

int ParseIntField(const Field& f, int line_no) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(f.value.data(), f.value.data() + f.value.size(), v);
  if (ec != std::errc() || ptr != f.value.data() + f.value.size()) {
    throw MalformedHeader("line " + std::to_string(line_no) + ": bad integer in " +
                          std::string(f.key) + "=" + std::string(f.value));
  }
  return v;
}

double ParseFloatField(const Field& f, int line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(f.value.data(), f.value.data() + f.value.size(), v);
  if (ec != std::errc() || ptr != f.value.data() + f.value.size()) {
    throw MalformedHeader("line " + std::to_string(line_no) + ": bad float in " +
                          std::string(f.key) + "=" + std::string(f.value));
  }
  if (!std::isfinite(v)) {
    throw MalformedHeader("line " + std::to_string(line_no) + ": non-finite value in " +
                          std::string(f.key) + "=" + std::string(f.value));
  }
  return v;
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

const LatticeNode& Lattice::node(int node_id) const {
  return nodes_[node_pos(node_id)];
}

int Lattice::node_pos(int node_id) const {
  auto it = node_index_.find(node_id);
  if (it == node_index_.end()) {
    throw Error("unknown node id " + std::to_string(node_id));
  }
  return it->second;
}

bool Lattice::is_end_node(int node_id) const {
  return out_arcs_[node_pos(node_id)].empty();
}

const std::vector<int>& Lattice::out_arcs(int node_id) const {
  return out_arcs_[node_pos(node_id)];
}

const std::vector<int>& Lattice::in_arcs(int node_id) const {
  return in_arcs_[node_pos(node_id)];
}

int Lattice::level(int node_id) const { return levels_[node_pos(node_id)]; }

Lattice Lattice::FromParts(std::vector<LatticeNode> nodes,
                           std::vector<LatticeArc> arcs) {
  std::map<int, int> index;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (!index.emplace(nodes[i].id, static_cast<int>(i)).second) {
      throw MalformedHeader("duplicate node id " + std::to_string(nodes[i].id));
    }
  }
  if (!index.count(0)) {
    throw MalformedHeader("start node 0 is missing");
  }
  std::set<int> arc_ids;
  for (const LatticeArc& a : arcs) {
    if (!arc_ids.insert(a.id).second) {
      throw MalformedHeader("duplicate arc id " + std::to_string(a.id));
    }
    if (!index.count(a.from) || !index.count(a.to)) {
      throw DanglingArc("arc " + std::to_string(a.id) + " references missing node " +
                        std::to_string(index.count(a.from) ? a.to : a.from));
    }
    if (!std::isfinite(a.acoustic) || !std::isfinite(a.lm)) {
      throw MalformedHeader("arc " + std::to_string(a.id) + " has non-finite score");
    }
    const auto& from_t = nodes[index[a.from]].time;
    const auto& to_t = nodes[index[a.to]].time;
    if (from_t && to_t && *from_t > *to_t) {
      throw MalformedHeader("arc " + std::to_string(a.id) +
                            " goes backwards in time");
    }
  }

  // Cycle check on the full graph (Kahn's algorithm).
  {
    std::vector<int> indeg(nodes.size(), 0);
    for (const LatticeArc& a : arcs) ++indeg[index[a.to]];
    std::vector<int> ready;
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
    }
    std::vector<std::vector<int>> out(nodes.size());
    for (size_t j = 0; j < arcs.size(); ++j) {
      out[index[arcs[j].from]].push_back(static_cast<int>(j));
    }
    size_t seen = 0;
    while (!ready.empty()) {
      int v = ready.back();
      ready.pop_back();
      ++seen;
      for (int j : out[v]) {
        int t = index[arcs[j].to];
        if (--indeg[t] == 0) ready.push_back(t);
      }
    }
    if (seen != nodes.size()) {
      throw CycleDetected("lattice contains a cycle");
    }
  }

  // Reachability pruning from the start node. Every surviving node lies on a
  // start-to-end path because sink nodes are end nodes by definition.
  std::set<int> reachable;
  {
    std::vector<std::vector<int>> out_ids(nodes.size());
    for (const LatticeArc& a : arcs) out_ids[index[a.from]].push_back(a.to);
    std::vector<int> stack = {0};
    reachable.insert(0);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int t : out_ids[index[v]]) {
        if (reachable.insert(t).second) stack.push_back(t);
      }
    }
  }
  Lattice lat;
  for (const LatticeNode& n : nodes) {
    if (reachable.count(n.id)) lat.nodes_.push_back(n);
  }
  for (const LatticeArc& a : arcs) {
    if (reachable.count(a.from)) lat.arcs_.push_back(a);
  }
  if (lat.arcs_.empty()) {
    throw NoPathToEnd("no arc is reachable from the start node");
  }
  lat.BuildIndex();
  return lat;
}

void Lattice::BuildIndex() {
  node_index_.clear();
  for (size_t i = 0; i < nodes_.size(); ++i) {
    node_index_[nodes_[i].id] = static_cast<int>(i);
  }
  out_arcs_.assign(nodes_.size(), {});
  in_arcs_.assign(nodes_.size(), {});
  for (size_t j = 0; j < arcs_.size(); ++j) {
    out_arcs_[node_index_[arcs_[j].from]].push_back(static_cast<int>(j));
    in_arcs_[node_index_[arcs_[j].to]].push_back(static_cast<int>(j));
  }
  end_nodes_.clear();
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (out_arcs_[i].empty()) end_nodes_.push_back(nodes_[i].id);
  }

  // Deterministic topological order: smallest ready node id first.
  topo_order_.clear();
  std::vector<int> indeg(nodes_.size());
  for (size_t i = 0; i < nodes_.size(); ++i) {
    indeg[i] = static_cast<int>(in_arcs_[i].size());
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (indeg[i] == 0) ready.push(nodes_[i].id);
  }
  while (!ready.empty()) {
    int id = ready.top();
    ready.pop();
    topo_order_.push_back(id);
    for (int j : out_arcs_[node_index_[id]]) {
      int t = node_index_[arcs_[j].to];
      if (--indeg[t] == 0) ready.push(nodes_[t].id);
    }
  }

  levels_.assign(nodes_.size(), 0);
  for (int id : topo_order_) {
    int pos = node_index_[id];
    for (int j : in_arcs_[pos]) {
      levels_[pos] = std::max(levels_[pos], levels_[node_index_[arcs_[j].from]] + 1);
    }
  }

  has_times_ = !nodes_.empty();
  for (const LatticeNode& n : nodes_) {
    if (!n.time) has_times_ = false;
  }
}

Lattice ParseLattice(std::string_view text) {
  std::optional<int> n_decl, l_decl;
  std::vector<LatticeNode> nodes;
  std::vector<LatticeArc> arcs;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::vector<std::string_view> tokens = SplitTokens(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;

    Field first = SplitField(tokens[0], line_no);
    if (first.key == "N" || first.key == "L") {
      for (const auto& tok : tokens) {
        Field f = SplitField(tok, line_no);
        std::optional<int>* slot = nullptr;
        if (f.key == "N") slot = &n_decl;
        else if (f.key == "L") slot = &l_decl;
        else
          throw MalformedHeader("line " + std::to_string(line_no) +
                                ": unexpected header field " + std::string(f.key));
        if (*slot) {
          throw MalformedHeader("line " + std::to_string(line_no) + ": duplicate " +
                                std::string(f.key) + "= header");
        }
        int v = ParseIntField(f, line_no);
        if (v < 0) {
          throw MalformedHeader("line " + std::to_string(line_no) + ": negative count");
        }
        *slot = v;
      }
    } else if (first.key == "I") {
      LatticeNode node;
      node.id = ParseIntField(first, line_no);
      if (tokens.size() > 2) {
        throw MalformedHeader("line " + std::to_string(line_no) +
                              ": too many fields in node line");
      }
      if (tokens.size() == 2) {
        Field f = SplitField(tokens[1], line_no);
        if (f.key != "t") {
          throw MalformedHeader("line " + std::to_string(line_no) +
                                ": unexpected node field " + std::string(f.key));
        }
        node.time = ParseFloatField(f, line_no);
      }
      nodes.push_back(std::move(node));
    } else if (first.key == "J") {
      static constexpr std::string_view kArcKeys[] = {"J", "S", "E", "W", "a", "l"};
      if (tokens.size() != 6) {
        throw MalformedHeader("line " + std::to_string(line_no) +
                              ": arc line must have exactly 6 fields");
      }
      Field fields[6];
      for (int i = 0; i < 6; ++i) {
        fields[i] = SplitField(tokens[i], line_no);
        if (fields[i].key != kArcKeys[i]) {
          throw MalformedHeader("line " + std::to_string(line_no) + ": expected " +
                                std::string(kArcKeys[i]) + "=, got " +
                                std::string(fields[i].key) + "=");
        }
      }
      LatticeArc arc;
      arc.id = ParseIntField(fields[0], line_no);
      arc.from = ParseIntField(fields[1], line_no);
      arc.to = ParseIntField(fields[2], line_no);
      if (fields[3].value.empty()) {
        throw MalformedHeader("line " + std::to_string(line_no) + ": empty word");
      }
      arc.word = (fields[3].value == kNullWord) ? "" : std::string(fields[3].value);
      arc.acoustic = ParseFloatField(fields[4], line_no);
      arc.lm = ParseFloatField(fields[5], line_no);
      arcs.push_back(std::move(arc));
    } else {
      throw MalformedHeader("line " + std::to_string(line_no) +
                            ": unrecognized line '" + std::string(tokens[0]) + "'");
    }
  }

  if (!n_decl || !l_decl) {
    throw MalformedHeader("missing N=/L= header");
  }
  if (static_cast<size_t>(*n_decl) != nodes.size()) {
    throw MalformedHeader("header declares N=" + std::to_string(*n_decl) + " but " +
                          std::to_string(nodes.size()) + " node lines found");
  }
  if (static_cast<size_t>(*l_decl) != arcs.size()) {
    throw MalformedHeader("header declares L=" + std::to_string(*l_decl) + " but " +
                          std::to_string(arcs.size()) + " arc lines found");
  }
  return Lattice::FromParts(std::move(nodes), std::move(arcs));
}

std::string RenderLattice(const Lattice& lat) {
  std::ostringstream out;
  out << "N=" << lat.nodes().size() << " L=" << lat.arcs().size() << "\n";
  for (const LatticeNode& n : lat.nodes()) {
    out << "I=" << n.id;
    if (n.time) out << " t=" << FormatDouble(*n.time);
    out << "\n";
  }
  for (const LatticeArc& a : lat.arcs()) {
    out << "J=" << a.id << " S=" << a.from << " E=" << a.to << " W="
        << (a.is_epsilon() ? std::string(kNullWord) : a.word)
        << " a=" << FormatDouble(a.acoustic) << " l=" << FormatDouble(a.lm) << "\n";
  }
  return out.str();
}

ArcPosteriors ComputeArcPosteriors(const Lattice& lat, const Scales& scales) {
  if (lat.empty()) throw EmptyLattice("cannot compute posteriors of an empty lattice");

  const size_t n = lat.nodes().size();
  std::map<int, int> pos_of;  // node id -> dense position in topo order
  for (size_t i = 0; i < n; ++i) pos_of[lat.topo_order()[i]] = static_cast<int>(i);

  std::vector<double> alpha(n, kNegInf), beta(n, kNegInf);
  alpha[pos_of[lat.start_node()]] = 0.0;
  for (int id : lat.topo_order()) {
    double a_here = alpha[pos_of[id]];
    if (a_here == kNegInf) continue;
    for (int j : lat.out_arcs(id)) {
      const LatticeArc& arc = lat.arcs()[j];
      double w = lat.arc_weight(j, scales);
      double& slot = alpha[pos_of[arc.to]];
      slot = LogAdd(slot, a_here + w);
    }
  }
  for (auto it = lat.topo_order().rbegin(); it != lat.topo_order().rend(); ++it) {
    int id = *it;
    if (lat.is_end_node(id)) {
      beta[pos_of[id]] = 0.0;
      continue;
    }
    double acc = kNegInf;
    for (int j : lat.out_arcs(id)) {
      const LatticeArc& arc = lat.arcs()[j];
      acc = LogAdd(acc, lat.arc_weight(j, scales) + beta[pos_of[arc.to]]);
    }
    beta[pos_of[id]] = acc;
  }
  double log_z = beta[pos_of[lat.start_node()]];

  ArcPosteriors post;
  for (size_t j = 0; j < lat.arcs().size(); ++j) {
    const LatticeArc& arc = lat.arcs()[j];
    double lp = alpha[pos_of[arc.from]] + lat.arc_weight(static_cast<int>(j), scales) +
                beta[pos_of[arc.to]] - log_z;
    post[arc.id] = std::clamp(std::exp(lp), 0.0, 1.0);
  }
  return post;
}

namespace {

// Best suffix (from a node to any end node) used by BestPath: combined score,
// epsilon-free words, and the full arc position sequence.
struct Suffix {
  double score = kNegInf;
  std::vector<std::string> words;
  std::vector<int> arc_positions;
  bool valid = false;
};

// Order used everywhere a tie between equal-score paths must be broken:
// larger score, then lexicographically smaller word sequence, then smaller
// arc-id sequence.
bool SuffixBetter(const Lattice& lat, double score_a,
                  const std::vector<std::string>& words_a,
                  const std::vector<int>& arcs_a, double score_b,
                  const std::vector<std::string>& words_b,
                  const std::vector<int>& arcs_b) {
  if (score_a != score_b) return score_a > score_b;
  if (words_a != words_b) return words_a < words_b;
  auto id_of = [&lat](int p) { return lat.arcs()[p].id; };
  return std::lexicographical_compare(
      arcs_a.begin(), arcs_a.end(), arcs_b.begin(), arcs_b.end(),
      [&](int x, int y) { return id_of(x) < id_of(y); });
}

double PathScore(const Lattice& lat, const std::vector<int>& arc_positions,
                 const Scales& scales) {
  double s = 0.0;
  for (int p : arc_positions) s += lat.arc_weight(p, scales);
  return s;
}

std::vector<std::string> PathWords(const Lattice& lat,
                                   const std::vector<int>& arc_positions) {
  std::vector<std::string> words;
  for (int p : arc_positions) {
    const LatticeArc& a = lat.arcs()[p];
    if (!a.is_epsilon()) words.push_back(a.word);
  }
  return words;
}

std::map<int, Suffix> ComputeBestSuffixes(const Lattice& lat, const Scales& scales) {
  std::map<int, Suffix> best;
  for (auto it = lat.topo_order().rbegin(); it != lat.topo_order().rend(); ++it) {
    int id = *it;
    Suffix& s = best[id];
    if (lat.is_end_node(id)) {
      s.score = 0.0;
      s.valid = true;
      continue;
    }
    for (int j : lat.out_arcs(id)) {
      const LatticeArc& arc = lat.arcs()[j];
      const Suffix& tail = best[arc.to];
      if (!tail.valid) continue;
      double cand_score = lat.arc_weight(j, scales) + tail.score;
      std::vector<std::string> cand_words;
      if (!arc.is_epsilon()) cand_words.push_back(arc.word);
      cand_words.insert(cand_words.end(), tail.words.begin(), tail.words.end());
      std::vector<int> cand_arcs = {j};
      cand_arcs.insert(cand_arcs.end(), tail.arc_positions.begin(),
                       tail.arc_positions.end());
      if (!s.valid || SuffixBetter(lat, cand_score, cand_words, cand_arcs, s.score,
                                   s.words, s.arc_positions)) {
        s.score = cand_score;
        s.words = std::move(cand_words);
        s.arc_positions = std::move(cand_arcs);
        s.valid = true;
      }
    }
  }
  return best;
}

}  // namespace

ScoredHypothesis BestPath(const Lattice& lat, const Scales& scales) {
  if (lat.empty()) throw EmptyLattice("cannot search an empty lattice");
  std::map<int, Suffix> best = ComputeBestSuffixes(lat, scales);
  const Suffix& s = best[lat.start_node()];
  if (!s.valid) throw NoPathToEnd("start node reaches no end node");
  ScoredHypothesis hyp;
  hyp.words = s.words;
  hyp.score = PathScore(lat, s.arc_positions, scales);
  return hyp;
}

std::vector<ScoredHypothesis> NBest(const Lattice& lat, int k, const Scales& scales,
                                    bool unique_words) {
  if (lat.empty()) throw EmptyLattice("cannot search an empty lattice");
  if (k < 1) throw Error("nbest requires k >= 1");

  // Exact heuristic: best achievable suffix score per node.
  std::map<int, double> h;
  for (auto it = lat.topo_order().rbegin(); it != lat.topo_order().rend(); ++it) {
    int id = *it;
    if (lat.is_end_node(id)) {
      h[id] = 0.0;
      continue;
    }
    double hv = kNegInf;
    for (int j : lat.out_arcs(id)) {
      double cand = lat.arc_weight(j, scales) + h[lat.arcs()[j].to];
      hv = std::max(hv, cand);
    }
    h[id] = hv;
  }

  struct Partial {
    double f;
    long seq;
    int node;
    double g;
    std::vector<int> arc_positions;
  };
  auto worse = [](const Partial& a, const Partial& b) {
    if (a.f != b.f) return a.f < b.f;
    return a.seq > b.seq;
  };
  std::priority_queue<Partial, std::vector<Partial>, decltype(worse)> heap(worse);
  long seq = 0;
  heap.push({h[lat.start_node()], seq++, lat.start_node(), 0.0, {}});

  struct Complete {
    double g;
    std::vector<int> arc_positions;
    std::vector<std::string> words;
  };
  std::vector<Complete> completes;
  std::set<std::vector<std::string>> distinct;
  std::vector<double> distinct_scores;  // score of each new word sequence, in pop order

  constexpr long kMaxPops = 500000;  // degenerate all-ties safety valve
  long pops = 0;
  while (!heap.empty() && pops < kMaxPops) {
    bool enough = unique_words ? distinct.size() >= static_cast<size_t>(k)
                               : completes.size() >= static_cast<size_t>(k);
    if (enough) {
      double kth = unique_words ? distinct_scores[k - 1] : completes[k - 1].g;
      if (heap.top().f < kth) break;
    }
    Partial p = heap.top();
    heap.pop();
    ++pops;
    if (lat.is_end_node(p.node)) {
      Complete c{p.g, p.arc_positions, PathWords(lat, p.arc_positions)};
      if (distinct.insert(c.words).second) distinct_scores.push_back(c.g);
      completes.push_back(std::move(c));
      continue;
    }
    for (int j : lat.out_arcs(p.node)) {
      const LatticeArc& arc = lat.arcs()[j];
      Partial q;
      q.g = p.g + lat.arc_weight(j, scales);
      q.f = q.g + h[arc.to];
      q.seq = seq++;
      q.node = arc.to;
      q.arc_positions = p.arc_positions;
      q.arc_positions.push_back(j);
      heap.push(std::move(q));
    }
  }

  // Canonical scores and the global deterministic order.
  std::vector<Complete*> order;
  order.reserve(completes.size());
  for (Complete& c : completes) {
    c.g = PathScore(lat, c.arc_positions, scales);
    order.push_back(&c);
  }
  std::sort(order.begin(), order.end(), [&](const Complete* a, const Complete* b) {
    return SuffixBetter(lat, a->g, a->words, a->arc_positions, b->g, b->words,
                        b->arc_positions);
  });

  std::vector<ScoredHypothesis> result;
  std::set<std::vector<std::string>> emitted;
  for (const Complete* c : order) {
    if (static_cast<int>(result.size()) >= k) break;
    if (unique_words && !emitted.insert(c->words).second) continue;
    result.push_back({c->words, c->g});
  }
  return result;
}

}  // namespace wcnslu
