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

#include "wcnslu/prompting.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wcnslu/confusion_network.h"
#include "wcnslu/error.h"
#include "wcnslu/metrics.h"

namespace wcnslu {

namespace {

// Single left-to-right pass so placeholder-like text inside substituted
// values is never expanded again.
std::string FillTemplate(const std::string& text,
                         const std::vector<std::pair<std::string, std::string>>& subs) {
  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t brace = text.find('{', pos);
    if (brace == std::string::npos) {
      out.append(text, pos, text.size() - pos);
      break;
    }
    out.append(text, pos, brace - pos);
    bool matched = false;
    for (const auto& [key, value] : subs) {
      if (text.compare(brace, key.size(), key) == 0) {
        out += value;
        pos = brace + key.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      out += '{';
      pos = brace + 1;
    }
  }
  return out;
}

std::string JoinWords(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

void CheckSeparator(const std::string& separator) {
  if (separator != "|" && separator != "/") {
    throw Error("separator must be \"|\" or \"/\"");
  }
}

}  // namespace

std::string TranscriptSource::Label() const {
  switch (kind) {
    case Kind::kGroundTruth:
      return "ground_truth";
    case Kind::kOneBest:
      return "1best";
    case Kind::kNBestOracle:
      return "oracle";
    case Kind::kWcn: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "wcn%s%.2f", separator.c_str(), threshold);
      return buf;
    }
  }
  return "unknown";
}

TranscriptSource TranscriptSource::FromToken(const std::string& token,
                                             const std::string& separator,
                                             double threshold) {
  TranscriptSource src;
  if (token == "ground_truth" || token == "ground-truth" || token == "gt") {
    src.kind = Kind::kGroundTruth;
  } else if (token == "1best" || token == "one_best" || token == "one-best") {
    src.kind = Kind::kOneBest;
  } else if (token == "oracle" || token == "nbest_oracle" || token == "nbest-oracle") {
    src.kind = Kind::kNBestOracle;
  } else if (token == "wcn") {
    src.kind = Kind::kWcn;
    CheckSeparator(separator);
    if (threshold < 0.0 || threshold > 1.0) {
      throw Error("wcn threshold must lie in [0,1]");
    }
    src.separator = separator;
    src.threshold = threshold;
  } else {
    throw Error("unknown transcript source '" + token + "'");
  }
  return src;
}

const PromptTemplates& PromptTemplates::Defaults() {
  static const PromptTemplates kDefaults = {
      // sqa_task
      "You are given a passage and a spoken question about it. Answer the "
      "question using only the passage, as briefly as possible.\n"
      "{wcn_instruction}{example_block}Context: {context}\n"
      "Question: {question}\n"
      "Answer:",
      // ic_task
      "Classify the spoken command into one of the following intents: "
      "{labels}. Respond with the intent name only.\n"
      "{wcn_instruction}{example_block}Command: {command}\n"
      "Intent:",
      // wcn_instruction
      "In the transcript, words joined by \"{separator}\" are alternative "
      "speech recognition hypotheses for the same spoken word; pick the "
      "alternative that makes the most sense.",
      // sqa_example
      "Context: {context}\nQuestion: {question}\nAnswer: {answer}",
      // ic_example
      "Command: {command}\nIntent: {intent}",
  };
  return kDefaults;
}

PromptTemplates PromptTemplates::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open template file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();

  PromptTemplates result;
  std::string* section = nullptr;
  bool section_started = false;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '@') {
      std::string name = line.substr(1);
      if (name == "sqa_task") section = &result.sqa_task;
      else if (name == "ic_task") section = &result.ic_task;
      else if (name == "wcn_instruction") section = &result.wcn_instruction;
      else if (name == "sqa_example") section = &result.sqa_example;
      else if (name == "ic_example") section = &result.ic_example;
      else throw ConfigError("unknown template section @" + name);
      section_started = false;
      continue;
    }
    if (section == nullptr) {
      if (line.empty()) continue;
      throw ConfigError("template content before the first @section marker");
    }
    if (section_started) *section += '\n';
    *section += line;
    section_started = true;
  }
  return result;
}

std::string WcnInstructionText(const std::string& separator,
                               const PromptTemplates& templates) {
  CheckSeparator(separator);
  return FillTemplate(templates.wcn_instruction, {{"{separator}", separator}});
}

std::string WcnInstructionText(const std::string& separator) {
  return WcnInstructionText(separator, PromptTemplates::Defaults());
}

std::string RenderTranscript(const RenderableExample& ex, const TranscriptSource& src) {
  using Kind = TranscriptSource::Kind;
  switch (src.kind) {
    case Kind::kGroundTruth:
      return ex.gold_text;
    case Kind::kOneBest: {
      if (ex.lattice == nullptr || ex.lattice->empty()) {
        throw MissingLattice("1-best rendering needs a lattice");
      }
      return JoinWords(BestPath(*ex.lattice, ex.scales).words);
    }
    case Kind::kNBestOracle: {
      if (ex.lattice == nullptr || ex.lattice->empty()) {
        throw MissingLattice("oracle rendering needs a lattice");
      }
      if (ex.gold_text.empty()) {
        throw MissingReference("oracle rendering needs the gold transcript");
      }
      auto nbest = NBest(*ex.lattice, ex.nbest_k, ex.scales, /*unique_words=*/true);
      return JoinWords(SelectOracle(nbest, WerTokens(ex.gold_text)).words);
    }
    case Kind::kWcn: {
      if (ex.lattice == nullptr || ex.lattice->empty()) {
        throw MissingLattice("WCN rendering needs a lattice");
      }
      ArcPosteriors post = ComputeArcPosteriors(*ex.lattice, ex.scales);
      ConfusionNetwork cn = FilterOptions(BuildWcn(*ex.lattice, post), src.threshold);
      return FlattenWcn(cn, {src.separator, src.threshold});
    }
  }
  throw Error("unhandled transcript source");
}

std::string BuildPrompt(const PromptSpec& spec, const PromptTemplates& templates) {
  std::string instruction;
  if (spec.wcn_instruction) {
    instruction = WcnInstructionText(spec.separator, templates) + "\n";
  }

  std::string example_block;
  if (spec.in_context) {
    std::string filled;
    if (spec.task == PromptSpec::Task::kSqa) {
      filled = FillTemplate(templates.sqa_example,
                            {{"{context}", spec.in_context->context},
                             {"{question}", spec.in_context->input},
                             {"{answer}", spec.in_context->gold}});
    } else {
      filled = FillTemplate(templates.ic_example,
                            {{"{command}", spec.in_context->input},
                             {"{intent}", spec.in_context->gold}});
    }
    example_block = filled + "\n\n";
  }

  if (spec.task == PromptSpec::Task::kSqa) {
    return FillTemplate(templates.sqa_task, {{"{wcn_instruction}", instruction},
                                             {"{example_block}", example_block},
                                             {"{context}", spec.context},
                                             {"{question}", spec.test_input}});
  }
  for (size_t i = 0; i + 1 < spec.labels.size(); ++i) {
    if (!(spec.labels[i] < spec.labels[i + 1])) {
      throw UnsortedLabels("intent labels must be strictly sorted, got '" +
                           spec.labels[i] + "' before '" + spec.labels[i + 1] + "'");
    }
  }
  std::string labels;
  for (const std::string& l : spec.labels) {
    if (!labels.empty()) labels += ", ";
    labels += l;
  }
  return FillTemplate(templates.ic_task, {{"{wcn_instruction}", instruction},
                                          {"{example_block}", example_block},
                                          {"{labels}", labels},
                                          {"{command}", spec.test_input}});
}

}  // namespace wcnslu
