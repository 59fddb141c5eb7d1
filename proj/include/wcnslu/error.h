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

#ifndef WCNSLU_ERROR_H_
#define WCNSLU_ERROR_H_

#include <stdexcept>
#include <string>

namespace wcnslu {

// Root of the toolkit's exception hierarchy. Subtypes are deliberately
// fine-grained so callers (and tests) can react to a specific failure.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define WCNSLU_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& msg) : Error(msg) {}      \
  }

// Lattice parsing / validation.
WCNSLU_DEFINE_ERROR(MalformedHeader);
WCNSLU_DEFINE_ERROR(DanglingArc);
WCNSLU_DEFINE_ERROR(CycleDetected);
WCNSLU_DEFINE_ERROR(NoPathToEnd);
WCNSLU_DEFINE_ERROR(EmptyLattice);

// Confusion networks.
WCNSLU_DEFINE_ERROR(EpsilonPresent);
WCNSLU_DEFINE_ERROR(EmptyNetwork);

// Metrics.
WCNSLU_DEFINE_ERROR(EmptyReference);
WCNSLU_DEFINE_ERROR(EmptyNBest);
WCNSLU_DEFINE_ERROR(EmptyLabelSet);

// Prompting.
WCNSLU_DEFINE_ERROR(UnsortedLabels);
WCNSLU_DEFINE_ERROR(MissingLattice);
WCNSLU_DEFINE_ERROR(MissingReference);

// LLM client.
WCNSLU_DEFINE_ERROR(AuthError);
WCNSLU_DEFINE_ERROR(RateLimited);
WCNSLU_DEFINE_ERROR(BackendUnavailable);
WCNSLU_DEFINE_ERROR(MalformedResponse);

// Harness.
WCNSLU_DEFINE_ERROR(SchemaError);
WCNSLU_DEFINE_ERROR(LatticeError);
WCNSLU_DEFINE_ERROR(EmptyRecords);
WCNSLU_DEFINE_ERROR(IoError);
WCNSLU_DEFINE_ERROR(ConfigError);

#undef WCNSLU_DEFINE_ERROR

}  // namespace wcnslu

#endif  // WCNSLU_ERROR_H_
