// core/include/apa/inference.h

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

#ifndef APA_INFERENCE_H_
#define APA_INFERENCE_H_

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "apa/error.h"
#include "apa/json_io.h"

namespace apa {

struct EndpointConfig {
  std::string url;                       // http(s)://host[:port]/path
  std::string auth_env;                  // env var holding a bearer token
  double timeout_s = 60.0;
  int max_retries = 3;
  double backoff_s = 1.0;                // first retry delay; doubles after
  double requests_per_second = 2.0;
  std::size_t max_in_flight = 4;
  std::string response_field = "text";   // dotted path into the reply
  bool inline_audio = true;              // base64 body vs. passing the path/URL

  // Throws InvalidArgument("inference") on a malformed config.
  void Validate() const;
};

struct InferenceInput {
  std::string utterance_id;
  std::string prompt;
  std::string audio_path;
};

struct InferenceRecord {
  std::string utterance_id;
  std::string prompt;
  std::string audio_path;
  std::optional<std::string> response;  // exactly one of response/error
  std::optional<std::string> error;
  double latency_ms = 0.0;
  int attempts = 0;
  bool dry_run = false;

  bool ok() const { return response.has_value() && !dry_run; }
};

Json ToJson(const InferenceRecord &r);
InferenceRecord InferenceRecordFromJson(const Json &j);  // throws Error

struct HttpReply {
  int status = 0;
  std::string body;
};

// Connection-level failure: refused, reset, timed out.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string &what) : Error("inference", what) {}
};

// Sends one POST. Implementations must be safe to call from several
// threads at once.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpReply Post(const std::string &body,
                         const std::map<std::string, std::string> &headers,
                         double timeout_s) = 0;
};

std::unique_ptr<Transport> MakeHttpTransport(const std::string &url);

// Spaces acquisitions at least 1/rate seconds apart across all callers.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second);
  void Acquire();

 private:
  using Clock = std::chrono::steady_clock;
  std::mutex mu_;
  Clock::duration interval_;
  Clock::time_point next_;
};

std::string Base64Encode(const std::string &bytes);

// {utterance_id, prompt, audio, audio_encoding}; audio is null without a
// path. Reads the audio file when inlining.
std::string RequestBody(const InferenceInput &in, const EndpointConfig &c);

// Follows a dotted path ("choices.0.text") through a JSON reply. Throws
// Error when the path is missing or does not end at a string.
std::string ExtractField(const Json &reply, const std::string &path);

using RecordSink = std::function<void(const InferenceRecord &)>;

// One record per input, emitted to `sink` in input order as soon as the
// prefix is complete. Network failures, 5xx and 429 are retried with
// exponential backoff; exhausted retries give an error record. With
// `dry_run` no request is made and responses are empty.
std::vector<InferenceRecord> SubmitBatch(const std::vector<InferenceInput> &inputs,
                                         const EndpointConfig &c, Transport *transport,
                                         const RecordSink &sink = {}, bool dry_run = false);

struct ResumeResult {
  std::vector<InferenceRecord> records;  // newly submitted ones
  std::size_t already_done = 0;
  std::vector<std::string> warnings;     // skipped corrupt lines
};

// Appends to `record_file` a record for every input that has no successful
// record there yet. A missing file behaves as a fresh batch.
ResumeResult Resume(const std::filesystem::path &record_file,
                    const std::vector<InferenceInput> &inputs, const EndpointConfig &c,
                    Transport *transport, bool dry_run = false);

}  // namespace apa

#endif  // APA_INFERENCE_H_
