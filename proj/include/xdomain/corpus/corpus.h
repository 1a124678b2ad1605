// include/xdomain/corpus/corpus.h

// Copyright 2026  The xdomain Authors
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

#ifndef XDOMAIN_CORPUS_CORPUS_H_
#define XDOMAIN_CORPUS_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "xdomain/numkit/random.h"
#include "xdomain/numkit/tensor.h"

namespace xdomain {

// ---- Acoustic domains ---------------------------------------------------------

enum class DomainKind { kClean, kChannel, kFarField, kNoisy };

std::string_view DomainKindName(DomainKind kind);
DomainKind ParseDomainKind(std::string_view name);

/// One recording condition.  Only the fields of the active kind matter.
struct DomainSpec {
  std::string name = "clean";
  DomainKind kind = DomainKind::kClean;
  /// kChannel: per-dimension gain.  Left empty in a config, it is drawn
  /// log-uniformly from [1/gain_spread, gain_spread] at generation time.
  std::vector<double> channel_gain;
  double gain_spread = 2.0;
  /// kFarField: global attenuation followed by a causal moving average.
  double attenuation = 1.0;
  int smear_width = 1;
  /// kNoisy: additive white Gaussian noise at this utterance-level SNR.
  double snr_db = 20.0;
  /// Any kind but kClean: constant added to every frame after the kind's own
  /// transform (a log-spectral channel or level shift).  Left empty, it is
  /// drawn from N(0, offset_std^2) per dimension at generation time.
  std::vector<double> offset;
  double offset_std = 0.0;
};

/**
   Renders clean features [T x D] into the given condition:
     clean    identity
     channel  x * gain (per dimension)
     farfield y_t = attenuation * mean(x_{t-w+1..t}), start replicated
     noisy    x + n, n ~ N(0, s^2), s^2 = mean(x^2) / 10^(snr_db / 10)
   followed, for every kind but clean, by adding `offset` (when non-empty) to
   each frame.  `noise` is only drawn from for kNoisy.
*/
Mat ApplyDomainTransform(const Mat &features, const DomainSpec &spec, RandomStream *noise);

/// clean, lena-booth (channel), far-field, noisy.
std::vector<DomainSpec> DefaultDomains();

// ---- Generation config --------------------------------------------------------

/**
   Synthetic speaker model: frame t of an utterance of speaker s is

     x_t = P z_s + o_u + a_t

   with z_s ~ N(0, identity_scale^2 I) a latent identity, P a fixed random
   projection, o_u ~ N(0, session_std^2 I) a per-utterance session offset and
   a_t a stationary AR(1) process (coefficient ar_rho, std phonetic_std).
*/
struct CorpusConfig {
  std::uint64_t seed = 1;
  int num_speakers = 20;
  int utts_per_speaker = 10;
  int frames_per_utt = 100;
  int input_dim = 20;
  int identity_dim = 16;
  double identity_scale = 1.0;
  double session_std = 0.2;
  double phonetic_std = 1.0;
  double ar_rho = 0.7;
  std::vector<DomainSpec> domains = DefaultDomains();

  void Validate() const;
  std::string CanonicalText() const;
};

// ---- Manifest -----------------------------------------------------------------

enum class Split { kTrain, kEnroll, kTest };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct UtteranceRecord {
  std::string utt_id;
  int speaker = 0;
  int domain = 0;
  Split split = Split::kTrain;
  std::string relpath;
  int frames = 0;

  /// utt_id without the domain suffix; shared by all renderings of a
  /// recording.
  std::string Stem() const;
};

/// Per-speaker train/enroll/test counts for a 7:1:2 partition: enroll and
/// test are rounded to nearest with at least one each, the remainder goes to
/// train.  ContractError below 3 utterances.
struct SplitCounts {
  int train = 0;
  int enroll = 0;
  int test = 0;
};
SplitCounts ComputeSplitCounts(int utts_per_speaker);

/**
   Text manifest.  First line:
     # seed=<n> fingerprint=<hex> speakers=<n> domains=<name>,<name>,...
   then one record per line:
     utt_id <TAB> speaker <TAB> domain <TAB> split <TAB> relpath <TAB> frames
*/
struct CorpusManifest {
  std::uint64_t seed = 0;
  Fingerprint fingerprint{};
  int num_speakers = 0;
  std::vector<std::string> domain_names;
  std::vector<UtteranceRecord> utterances;

  int NumDomains() const { return static_cast<int>(domain_names.size()); }
  /// Accepts a domain name or a decimal id; throws LookupError.
  int DomainId(std::string_view name_or_id) const;

  void Write(const std::filesystem::path &path) const;
  static CorpusManifest Read(const std::filesystem::path &path);
};

/// Writes feats/<domain>/<stem>.xdaf, manifest.tsv and trials/<domain>.trials
/// under `out_dir`.  Output depends only on the config.
CorpusManifest GenerateCorpus(const CorpusConfig &cfg, const std::filesystem::path &out_dir);

/// Clean features of one recording, before any domain transform.
Mat GenerateCleanUtterance(const CorpusConfig &cfg, int speaker, int index);

// ---- Trials -------------------------------------------------------------------

struct TrialPair {
  std::string enroll_utt;
  std::string test_utt;
  bool is_target = false;

  friend bool operator==(const TrialPair &, const TrialPair &) = default;
};

/// Every enroll utterance of `domain` against every test utterance of
/// `domain`, sorted by (enroll_utt, test_utt).
std::vector<TrialPair> MakeTrials(const CorpusManifest &manifest, int domain);

/// Lines "enroll_utt test_utt {0|1}".
void WriteTrials(const std::filesystem::path &path, const std::vector<TrialPair> &trials);
std::vector<TrialPair> ReadTrials(const std::filesystem::path &path);

// ---- Feature files ------------------------------------------------------------

/// "XDAF" | u32 version (1) | u32 T | u32 D | T*D little-endian f32.
void WriteFeatures(const std::filesystem::path &path, const Mat &features);
Mat ReadFeatures(const std::filesystem::path &path);

// ---- In-memory corpus ---------------------------------------------------------

struct Utterance {
  UtteranceRecord record;
  Mat features;
};

class Corpus {
 public:
  /// Reads the manifest and every feature file, checking frame counts.
  static Corpus Load(const std::filesystem::path &dir);
  Corpus(CorpusManifest manifest, std::vector<Utterance> utterances);

  const CorpusManifest &Manifest() const { return manifest_; }
  const std::vector<Utterance> &Utterances() const { return utterances_; }
  const Utterance &Find(const std::string &utt_id) const;
  /// Utterances of one domain and split, in manifest order.
  std::vector<const Utterance *> Select(int domain, Split split) const;

 private:
  CorpusManifest manifest_;
  std::vector<Utterance> utterances_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace xdomain

#endif  // XDOMAIN_CORPUS_CORPUS_H_
