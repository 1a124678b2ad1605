// include/xdomain/eval/eval.h

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

#ifndef XDOMAIN_EVAL_EVAL_H_
#define XDOMAIN_EVAL_EVAL_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xdomain/corpus/corpus.h"
#include "xdomain/model/checkpoint.h"
#include "xdomain/model/config.h"
#include "xdomain/numkit/tensor.h"

namespace xdomain {

// ---- Embeddings ---------------------------------------------------------------

/**
   Utterance embedding before length normalisation.
     pretrain, finetune: the LDE output.
     adapt, domain h in 1..N: Phi2_h(Phi1_h(LDE output)).
     adapt, domain 0 (clean): the mean over h = 1..N of the above.
   Throws LookupError for a domain the model does not know.
*/
RowVec EmbedUtteranceRaw(const ModelConfig &cfg, const TensorMap &params, Stage stage, int domain,
                         const Mat &features);
/// EmbedUtteranceRaw scaled to unit L2 norm; ContractError on a zero vector.
RowVec EmbedUtterance(const ModelConfig &cfg, const TensorMap &params, Stage stage, int domain,
                      const Mat &features);

// ---- Scoring ------------------------------------------------------------------

/// Cosine similarity; ContractError if either vector is zero.
double CosineScore(const RowVec &a, const RowVec &b);

/// Mean of the embeddings, length-normalised.  ContractError on an empty set
/// or a zero mean.
RowVec EnrollSpeaker(std::span<const RowVec> embeddings);

struct ScoreRecord {
  TrialPair trial;
  double score = 0.0;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

/**
   Equal error rate over the operating points obtained by placing the
   threshold below all scores, at the midpoint of every pair of adjacent
   distinct scores, and above all scores.  With FAR(t) = P(nontarget >= t)
   and FRR(t) = P(target < t), the EER is the common value at the first
   (lowest) threshold where FAR == FRR, or otherwise the linear interpolation
   between the two operating points that bracket the crossing.  Throws
   ContractError unless both classes are present and all scores are finite.
*/
EerResult ComputeEer(std::span<const double> target_scores,
                     std::span<const double> nontarget_scores);
EerResult ComputeEer(std::span<const ScoreRecord> records);

/// 100 (baseline - value) / baseline; ContractError unless baseline > 0.
double RelativeDecrease(double baseline, double value);

// ---- Reports ------------------------------------------------------------------

struct DomainResult {
  std::string domain;
  double eer = 0.0;
  std::size_t trials = 0;
  std::size_t targets = 0;
};

/**
   Text file:
     checkpoint=<id> stage=<stage>
     domain=<name> eer=<fraction> trials=<n> targets=<n>
     ...
*/
struct EvalReport {
  std::string checkpoint_id;
  Stage stage = Stage::kPretrain;
  std::vector<DomainResult> domains;

  /// LookupError if absent.
  const DomainResult &Find(const std::string &domain) const;
  std::string ToText() const;
  static EvalReport FromText(const std::string &text);
  void Write(const std::filesystem::path &path) const;
  static EvalReport Read(const std::filesystem::path &path);
};

/// Scores every trial of one corpus domain.  Enrollment models come from
/// EnrollSpeaker over each enrollment utterance's embedding; utterances are
/// embedded at full length.
std::vector<ScoreRecord> ScoreDomain(const ModelConfig &cfg, const Checkpoint &ckpt,
                                     const Corpus &corpus, int domain);

/// EER of each requested domain.  `checkpoint_id` is recorded verbatim.
EvalReport Evaluate(const ModelConfig &cfg, const Checkpoint &ckpt, const Corpus &corpus,
                    std::span<const int> domains, const std::string &checkpoint_id);

/// Hex digest of a file's bytes, used as a checkpoint id.
std::string FileId(const std::filesystem::path &path);

struct NamedReport {
  std::string name;
  EvalReport report;
};

/**
   Table with one EER row per system (columns: each domain, then the mean over
   target domains) and an RD% row comparing every system after the first
   with the first.  All reports must cover the same domains; ContractError
   otherwise.  The first domain is treated as the clean source.
*/
std::string FormatReportTable(std::span<const NamedReport> systems);

/// Key-value lines
///   system=<name> domain=<name> eer=<fraction>
///   baseline=<name> system=<name> domain=<name> rd=<percent>
/// with "mean-target" as an extra domain.
std::string FormatReportKeyValues(std::span<const NamedReport> systems);

/// Mean EER over every domain but the first.
double MeanTargetEer(const EvalReport &report);

}  // namespace xdomain

#endif  // XDOMAIN_EVAL_EVAL_H_
