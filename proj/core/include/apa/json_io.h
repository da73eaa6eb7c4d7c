// core/include/apa/json_io.h

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

#ifndef APA_JSON_IO_H_
#define APA_JSON_IO_H_

#include <filesystem>
#include <fstream>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "apa/respparse.h"
#include "apa/scorekit.h"

namespace apa {

using Json = nlohmann::json;

inline constexpr std::string_view kToolName = "apa";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kHeaderKey = "apa_header";

// {"apa_header": {"tool": ..., "version": ..., "kind": kind, "seed": ...}}
Json MakeHeader(std::string_view kind, std::optional<std::uint64_t> seed = {});
bool IsHeader(const Json &j);

Json ToJson(const UtteranceAnnotation &a);
// Throws Error naming the offending field and utterance id.
UtteranceAnnotation AnnotationFromJson(const Json &j);

Json ToJson(const AssessmentResponse &r);
AssessmentResponse ResponseFromJson(const Json &j);

// Writes a JSON-Lines file: a header line, then one compact record per
// line. Each line goes out with a single write.
class JsonLinesWriter {
 public:
  // Truncates `path` and writes the header.
  JsonLinesWriter(const std::filesystem::path &path, std::string_view kind,
                  std::optional<std::uint64_t> seed = {});
  // Appends; writes the header only when the file is new or empty.
  static JsonLinesWriter Append(const std::filesystem::path &path,
                                std::string_view kind);
  void Write(const Json &record);
  std::size_t records() const { return records_; }

 private:
  JsonLinesWriter() = default;
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t records_ = 0;
};

struct JsonLinesIssue {
  std::size_t line = 0;
  std::string message;
};

// Reads every record of a JSON-Lines file, skipping header and blank lines.
// Malformed lines throw Error unless `issues` is given, in which case they
// are reported there and skipped.
std::vector<Json> ReadJsonLines(const std::filesystem::path &path,
                                std::vector<JsonLinesIssue> *issues = nullptr);

std::vector<UtteranceAnnotation> ReadCorpusFile(const std::filesystem::path &path);
void WriteCorpusFile(const std::filesystem::path &path,
                     const std::vector<UtteranceAnnotation> &utterances);

}  // namespace apa

#endif  // APA_JSON_IO_H_
