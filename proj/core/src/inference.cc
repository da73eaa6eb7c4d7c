// core/src/inference.cc

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

#include "apa/inference.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace apa {

void EndpointConfig::Validate() const {
  auto bad = [](const std::string &m) { throw InvalidArgument("inference", m); };
  if (!std::regex_match(url, std::regex(R"(https?://[^/\s]+(/\S*)?)")))
    bad("endpoint url must look like http(s)://host[:port]/path, got '" + url + "'");
  if (!(timeout_s > 0.0)) bad("timeout must be > 0");
  if (max_retries < 0) bad("max retries must be >= 0");
  if (!(backoff_s >= 0.0)) bad("retry backoff must be >= 0");
  if (!(requests_per_second > 0.0) || !std::isfinite(requests_per_second))
    bad("requests per second must be > 0");
  if (max_in_flight < 1) bad("max in-flight requests must be >= 1");
  if (response_field.empty()) bad("response field path is empty");
}

Json ToJson(const InferenceRecord &r) {
  Json j = {{"utterance_id", r.utterance_id},
            {"prompt", r.prompt},
            {"audio_path", r.audio_path},
            {"latency_ms", r.latency_ms},
            {"attempts", r.attempts}};
  if (r.response) j["raw_text"] = *r.response;
  if (r.error) j["error"] = *r.error;
  if (r.dry_run) j["dry_run"] = true;
  return j;
}

InferenceRecord InferenceRecordFromJson(const Json &j) {
  auto str = [&](const char *k) {
    if (!j.contains(k) || !j[k].is_string())
      throw Error("inference", std::string("record field '") + k + "' missing or not a string");
    return j[k].get<std::string>();
  };
  InferenceRecord r;
  r.utterance_id = str("utterance_id");
  r.prompt = str("prompt");
  r.audio_path = j.value("audio_path", "");
  if (j.contains("raw_text")) r.response = str("raw_text");
  if (j.contains("error")) r.error = str("error");
  if (r.response.has_value() == r.error.has_value())
    throw Error("inference", "record " + r.utterance_id + " needs exactly one of raw_text and error");
  r.latency_ms = j.value("latency_ms", 0.0);
  r.attempts = j.value("attempts", 0);
  r.dry_run = j.value("dry_run", false);
  return r;
}

namespace {

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(const std::string &url) {
    std::smatch m;
    if (!std::regex_match(url, m, std::regex(R"((https?://[^/\s]+)(/\S*)?)")))
      throw InvalidArgument("inference", "bad endpoint url '" + url + "'");
    origin_ = m[1];
    path_ = m[2].matched ? std::string(m[2]) : "/";
  }

  HttpReply Post(const std::string &body, const std::map<std::string, std::string> &headers,
                 double timeout_s) override {
    // One client per call: httplib clients are not meant to be shared
    // across threads.
    httplib::Client cli(origin_);
    const auto t = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(timeout_s));
    cli.set_connection_timeout(t);
    cli.set_read_timeout(t);
    cli.set_write_timeout(t);
    httplib::Headers h;
    for (const auto &[k, v] : headers)
      if (k != "Content-Type") h.emplace(k, v);
    auto res = cli.Post(path_, h, body, "application/json");
    if (!res) throw TransportError("POST " + origin_ + path_ + ": " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }

 private:
  std::string origin_;
  std::string path_;
};

}  // namespace

std::unique_ptr<Transport> MakeHttpTransport(const std::string &url) {
  return std::make_unique<HttpTransport>(url);
}

RateLimiter::RateLimiter(double per_second)
    : interval_(std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>(1.0 / per_second))),
      next_(Clock::now()) {
  if (!(per_second > 0.0)) throw InvalidArgument("inference", "rate must be > 0");
}

void RateLimiter::Acquire() {
  Clock::time_point slot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    slot = std::max(next_, Clock::now());
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

std::string Base64Encode(const std::string &bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char *>(out.data()),
                                reinterpret_cast<const unsigned char *>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string RequestBody(const InferenceInput &in, const EndpointConfig &c) {
  Json j = {{"utterance_id", in.utterance_id}, {"prompt", in.prompt}};
  if (in.audio_path.empty()) {
    j["audio"] = nullptr;
  } else if (c.inline_audio) {
    std::ifstream f(in.audio_path, std::ios::binary);
    if (!f) throw Error("inference", "cannot read audio " + in.audio_path);
    std::ostringstream ss;
    ss << f.rdbuf();
    j["audio"] = Base64Encode(ss.str());
    j["audio_encoding"] = "base64";
  } else {
    j["audio"] = in.audio_path;
    j["audio_encoding"] = "url";
  }
  return j.dump();
}

std::string ExtractField(const Json &reply, const std::string &path) {
  const Json *cur = &reply;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = std::min(path.find('.', start), path.size());
    const std::string key = path.substr(start, dot - start);
    if (cur->is_object() && cur->contains(key)) {
      cur = &(*cur)[key];
    } else if (cur->is_array() && !key.empty() &&
               key.find_first_not_of("0123456789") == std::string::npos &&
               std::stoul(key) < cur->size()) {
      cur = &(*cur)[std::stoul(key)];
    } else {
      throw Error("inference", "reply has no field '" + path + "'");
    }
    start = dot + 1;
  }
  if (!cur->is_string()) throw Error("inference", "reply field '" + path + "' is not a string");
  return cur->get<std::string>();
}

namespace {

InferenceRecord SubmitOne(const InferenceInput &in, const EndpointConfig &c, Transport &t,
                          const std::map<std::string, std::string> &headers, RateLimiter &limiter) {
  InferenceRecord rec;
  rec.utterance_id = in.utterance_id;
  rec.prompt = in.prompt;
  rec.audio_path = in.audio_path;
  const auto t0 = std::chrono::steady_clock::now();
  auto stamp = [&] {
    rec.latency_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0).count();
  };
  std::string body;
  try {
    body = RequestBody(in, c);
  } catch (const Error &e) {
    rec.error = e.what();
    stamp();
    return rec;
  }
  std::string last;
  for (int attempt = 1; attempt <= c.max_retries + 1; ++attempt) {
    rec.attempts = attempt;
    limiter.Acquire();
    bool transient = false;
    try {
      const HttpReply reply = t.Post(body, headers, c.timeout_s);
      if (reply.status >= 200 && reply.status < 300) {
        const Json j = Json::parse(reply.body, nullptr, false);
        if (j.is_discarded()) {
          rec.error = "reply is not JSON";
        } else {
          try {
            rec.response = ExtractField(j, c.response_field);
          } catch (const Error &e) {
            rec.error = e.what();
          }
        }
      } else if (reply.status >= 500 || reply.status == 429) {
        transient = true;
        last = "HTTP " + std::to_string(reply.status);
      } else {
        rec.error = "HTTP " + std::to_string(reply.status) + ": " + reply.body.substr(0, 200);
      }
    } catch (const TransportError &e) {
      transient = true;
      last = e.what();
    }
    if (!transient) break;
    if (attempt <= c.max_retries)
      std::this_thread::sleep_for(
          std::chrono::duration<double>(c.backoff_s * std::ldexp(1.0, attempt - 1)));
  }
  if (!rec.response && !rec.error)
    rec.error = "gave up after " + std::to_string(rec.attempts) + " attempts: " + last;
  stamp();
  return rec;
}

}  // namespace

std::vector<InferenceRecord> SubmitBatch(const std::vector<InferenceInput> &inputs,
                                         const EndpointConfig &c, Transport *transport,
                                         const RecordSink &sink, bool dry_run) {
  c.Validate();
  std::map<std::string, std::string> headers = {{"Content-Type", "application/json"}};
  if (!c.auth_env.empty()) {
    const char *token = std::getenv(c.auth_env.c_str());
    if (!token || !*token)
      throw InvalidArgument("inference", "auth token variable " + c.auth_env + " is not set");
    headers["Authorization"] = std::string("Bearer ") + token;
  }
  if (!dry_run && !transport) throw InvalidArgument("inference", "no transport");

  const std::size_t n = inputs.size();
  std::vector<std::optional<InferenceRecord>> slots(n);
  std::mutex emit_mu;
  std::size_t next_emit = 0;
  auto finish = [&](std::size_t i, InferenceRecord rec) {
    std::lock_guard<std::mutex> lock(emit_mu);
    slots[i] = std::move(rec);
    while (next_emit < n && slots[next_emit]) {
      if (sink) sink(*slots[next_emit]);
      ++next_emit;
    }
  };

  if (dry_run) {
    for (std::size_t i = 0; i < n; ++i) {
      InferenceRecord rec;
      rec.utterance_id = inputs[i].utterance_id;
      rec.prompt = inputs[i].prompt;
      rec.audio_path = inputs[i].audio_path;
      rec.response = "";
      rec.dry_run = true;
      finish(i, std::move(rec));
    }
  } else {
    RateLimiter limiter(c.requests_per_second);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex fail_mu;
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          finish(i, SubmitOne(inputs[i], c, *transport, headers, limiter));
        } catch (...) {
          std::lock_guard<std::mutex> lock(fail_mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < std::min(c.max_in_flight, n); ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
  }
  std::vector<InferenceRecord> out;
  out.reserve(n);
  for (auto &s : slots) out.push_back(std::move(*s));
  return out;
}

ResumeResult Resume(const std::filesystem::path &record_file,
                    const std::vector<InferenceInput> &inputs, const EndpointConfig &c,
                    Transport *transport, bool dry_run) {
  ResumeResult res;
  std::unordered_set<std::string> done;
  if (std::filesystem::exists(record_file)) {
    std::vector<JsonLinesIssue> issues;
    for (const Json &j : ReadJsonLines(record_file, &issues)) {
      try {
        const InferenceRecord r = InferenceRecordFromJson(j);
        if (r.ok()) done.insert(r.utterance_id);
      } catch (const Error &e) {
        res.warnings.push_back(record_file.string() + ": skipped record: " + e.what());
      }
    }
    for (const JsonLinesIssue &i : issues) res.warnings.push_back(i.message + " (skipped)");
  }
  std::vector<InferenceInput> pending;
  for (const InferenceInput &in : inputs) {
    if (done.count(in.utterance_id))
      ++res.already_done;
    else
      pending.push_back(in);
  }
  JsonLinesWriter out = JsonLinesWriter::Append(record_file, "inference-records");
  res.records = SubmitBatch(pending, c, transport,
                            [&](const InferenceRecord &r) { out.Write(ToJson(r)); }, dry_run);
  return res;
}

}  // namespace apa
