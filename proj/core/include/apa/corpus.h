// core/include/apa/corpus.h

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

#ifndef APA_CORPUS_H_
#define APA_CORPUS_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "apa/error.h"
#include "apa/metrics.h"
#include "apa/scorekit.h"

namespace apa {

class IngestionError : public Error {
 public:
  explicit IngestionError(const std::string &what) : Error("corpus", what) {}
};

// Rater annotations that do not describe the same token/phone layout.
class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string &what) : Error("corpus", what) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string &what) : Error("corpus", what) {}
};

// Field names of the source score file. Defaults follow the public
// speechocean762 scores.json layout; override them for private corpora.
struct SchemaDescriptor {
  std::string score_file = "resource/scores.json";
  std::vector<std::string> splits = {"train", "test"};

  std::string id_field = "utterance_id";  // JSON-Lines records only
  std::string split_field = "split";      // JSON-Lines records only, optional
  std::string speaker_field = "speaker";  // optional
  std::string audio_field = "wav";        // optional

  std::string text = "text";
  std::string accuracy = "accuracy";
  std::string fluency = "fluency";
  std::string prosody = "prosodic";
  std::string completeness = "completeness";
  std::string total = "total";

  std::string words = "words";
  std::string word_text = "text";
  std::string word_accuracy = "accuracy";
  std::string word_stress = "stress";
  std::string word_total = "total";

  bool has_phones = true;
  std::string word_phones = "phones";
  std::string phone_accuracy = "phones-accuracy";
  PhoneScale phone_scale = PhoneScale::kNative;

  // Reads "key = value" lines ('#' starts a comment). Unknown keys throw.
  static SchemaDescriptor Load(const std::filesystem::path &path);
};

struct CorpusSplit {
  std::string name;
  std::vector<UtteranceAnnotation> utterances;  // sorted by utterance_id
  std::map<std::string, std::vector<std::string>> speaker_index;

  std::size_t size() const { return utterances.size(); }
  const UtteranceAnnotation *Find(const std::string &utterance_id) const;
};

struct QuarantineEntry {
  std::string utterance_id;
  std::vector<Violation> violations;
};

struct LoadResult {
  std::vector<CorpusSplit> splits;
  std::size_t record_count = 0;
  std::vector<QuarantineEntry> quarantine;
  std::vector<std::string> unassigned;  // valid records listed in no split

  const CorpusSplit *Split(const std::string &name) const;
};

// Loads a scored corpus rooted at `root`. The score file is either one JSON
// object keyed by utterance id or JSON-Lines. Split membership comes from
// <root>/<split>/{wav.scp,text,utt2spk}, a split field in JSON-Lines
// records, or else everything lands in a single "all" split. Phone scores
// are rescaled to [0,10]. Invalid utterances are quarantined, not fatal.
// Throws IngestionError when nothing can be read and Error on schema
// mismatches.
LoadResult LoadCorpus(const std::filesystem::path &root,
                      const SchemaDescriptor &schema = {});

// One utterance as scored by several raters, keyed by rater id.
struct RaterAnnotationSet {
  std::string utterance_id;
  std::map<std::string, UtteranceAnnotation> raters;
};

// Arithmetic mean of every score over raters; layout copied from the first
// rater. Throws AlignmentError on mismatched layouts.
UtteranceAnnotation AverageRaters(const RaterAnnotationSet &s);

struct QcThresholds {
  double sentence_pcc_min = 0.6;
  double sentence_scc_min = 0.6;
  double word_pcc_min = 0.6;
  double word_scc_min = 0.5;
  // Pass requires value > threshold; when false, >= is enough.
  bool strict = true;

  bool IsValid() const;
};

struct RaterPairResult {
  std::string rater_a;
  std::string rater_b;
  MetricValue sentence_pcc;
  MetricValue sentence_scc;
  MetricValue word_pcc;
  MetricValue word_scc;
  std::vector<std::string> flags;  // e.g. "sentence_pcc 0.55 <= 0.6"

  bool passed() const { return flags.empty(); }
};

struct QcReport {
  std::vector<RaterPairResult> pairs;
  std::size_t utterances = 0;
  bool passed() const;
};

// Pairwise inter-rater agreement over all utterances. Sentence series
// concatenate the five sentence aspects per utterance; word series
// concatenate accuracy/stress/total of every word, pooled across
// utterances. Throws InsufficientDataError with fewer than two utterances
// or raters.
QcReport RaterQc(const std::vector<RaterAnnotationSet> &sets,
                 const QcThresholds &t = {});

// Buckets are [e0,e1), [e1,e2), ..., [e_{k-1},e_k]: half-open except the
// last, which is closed.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t below = 0;
  std::size_t above = 0;
  std::size_t total = 0;
};

// Distribution of one aspect over a split (pooled over words/phones for
// those granularities; phones on the rescaled scale).
Histogram DistributionReport(const CorpusSplit &split, Granularity g, Aspect a,
                             const std::vector<double> &edges);

}  // namespace apa

#endif  // APA_CORPUS_H_
