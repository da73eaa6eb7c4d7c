// core/include/apa/promptgen.h

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

#ifndef APA_PROMPTGEN_H_
#define APA_PROMPTGEN_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "apa/scorekit.h"
#include "apa/task_spec.h"

namespace apa {

inline constexpr std::string_view kPromptTemplateVersion = "apa-prompt-v1";
inline constexpr std::string_view kReferenceTextMarker = "{REFERENCE TEXT}";
inline constexpr std::string_view kReferencePhoneMarker =
    "{REFERENCE PHONE SEQUENCE}";

// Prompt text with the two reference placeholders still unfilled.
struct PromptTemplate {
  std::string version;
  std::string text;
};

// Builds the prompt template for a task. The full task yields the
// comprehensive prompt; smaller tasks keep only the rubric sentences and
// output lines that mention a requested aspect.
PromptTemplate BuildTemplate(const TaskSpec &task);

// Reads a template file. The first line may be "#version <tag>"; the rest
// is the template body. Throws Error when the reference-text marker is
// missing.
PromptTemplate LoadTemplate(const std::filesystem::path &path);
void SaveTemplate(const PromptTemplate &tmpl, const std::filesystem::path &path);

struct RenderedPrompt {
  std::string template_version;
  std::string instruction;      // rubric and request, before the references
  std::string reference_text;
  std::string reference_phones; // empty for tasks without phones
  std::vector<std::string> format_stanza;
  std::string text;             // the complete prompt
};

// Fills `tmpl` with the utterance's references. Throws InvalidArgument when
// the task needs phones and the annotation has none.
RenderedPrompt Render(const PromptTemplate &tmpl, const UtteranceAnnotation &a,
                      const TaskSpec &task);
RenderedPrompt Render(const UtteranceAnnotation &a, const TaskSpec &task);

// "G UH D - M AO R N IH NG". Throws InvalidArgument on an empty group.
std::string PhoneSequenceString(const std::vector<std::vector<std::string>> &groups);
// Inverse of PhoneSequenceString. Throws InvalidArgument on empty groups.
std::vector<std::vector<std::string>> SplitPhoneSequence(std::string_view s);

}  // namespace apa

#endif  // APA_PROMPTGEN_H_
