// core/include/apa/task_spec.h

// Copyright 2026  The apa-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef APA_TASK_SPEC_H_
#define APA_TASK_SPEC_H_

#include <string>
#include <string_view>
#include <vector>

#include "apa/scorekit.h"

namespace apa {

// The granularities and aspects one prompt asks for. Aspect lists are kept
// in canonical order (see AspectsOf) regardless of how they were given.
class TaskSpec {
 public:
  TaskSpec() = default;

  // Every granularity with every aspect.
  static TaskSpec Full();

  // Parses "full" or a ';'-separated list of "granularity[:aspect,...]",
  // e.g. "sentence:accuracy,fluency;word:total". A granularity without an
  // aspect list selects all of its aspects. Throws InvalidArgument.
  static TaskSpec Parse(std::string_view text);

  // Throws InvalidArgument when an aspect is illegal for its granularity.
  void Add(Granularity g, Aspect a);

  bool Has(Granularity g) const { return !Aspects(g).empty(); }
  bool Has(Granularity g, Aspect a) const;
  const std::vector<Aspect> &Aspects(Granularity g) const;
  bool empty() const;

  // Canonical grammar form; Parse(ToString()) == *this.
  std::string ToString() const;

  bool operator==(const TaskSpec &) const = default;

 private:
  std::vector<Aspect> sentence_;
  std::vector<Aspect> word_;
  std::vector<Aspect> phone_;
};

}  // namespace apa

#endif  // APA_TASK_SPEC_H_
