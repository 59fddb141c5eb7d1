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

#ifndef WCNSLU_CONFUSION_NETWORK_H_
#define WCNSLU_CONFUSION_NETWORK_H_

#include <string>
#include <vector>

#include "wcnslu/lattice.h"

namespace wcnslu {

// One competing word option in a confusion bin. Empty word = epsilon (the
// "no word here" deletion hypothesis).
struct CnOption {
  std::string word;
  double posterior = 0.0;

  bool is_epsilon() const { return word.empty(); }
};

// Options competing for one position. BuildWcn orders options by the arc
// order of the source lattice (smallest contributing arc id first) with the
// epsilon option, if any, last; posteriors of a freshly built bin sum to one.
using CnBin = std::vector<CnOption>;

struct ConfusionNetwork {
  std::vector<CnBin> bins;
};

struct WcnRenderOptions {
  std::string separator = "|";  // "|" or "/"
  double threshold = 0.3;       // posterior filter, in [0,1]
};

// Collapses a posterior-weighted lattice into a confusion network via
// pivot-style consensus clustering: same-word overlapping arcs merge first,
// then remaining clusters merge by time/topological overlap in descending
// posterior order. Two arcs on a common path never share a bin and bin order
// is a linear extension of the arc partial order, so every lattice path can
// be read out of the network one bin at a time (taking the epsilon option of
// bins the path skips).
ConfusionNetwork BuildWcn(const Lattice& lat, const ArcPosteriors& post);

// The clustering underlying BuildWcn: bin index for each arc position.
std::vector<int> ClusterArcs(const Lattice& lat, const ArcPosteriors& post);

// Deletes epsilon options, then drops options below the threshold. A bin
// whose non-epsilon options all fall below the threshold keeps its single
// best option; a bin holding only epsilon disappears. Posteriors are
// reported unrenormalized.
ConfusionNetwork FilterOptions(const ConfusionNetwork& cn, double threshold);

// Renders a filtered network as one line of text: bins joined by single
// spaces, in-bin options joined by the separator. Throws EpsilonPresent if
// the caller skipped FilterOptions.
std::string FlattenWcn(const ConfusionNetwork& cn, const WcnRenderOptions& opts);

struct WcnStats {
  double options_per_word = 0.0;
  int bins = 0;
  int max_bin_size = 0;
};

WcnStats ComputeWcnStats(const ConfusionNetwork& cn);

// Golden-file format: one bin per line, "word:posterior" pairs separated by
// single spaces, posteriors at six decimal places, epsilon spelled <eps>.
std::string SerializeWcn(const ConfusionNetwork& cn);

}  // namespace wcnslu

#endif  // WCNSLU_CONFUSION_NETWORK_H_
