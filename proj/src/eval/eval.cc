// src/eval/eval.cc

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

#include "xdomain/eval/eval.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "xdomain/model/layers.h"
#include "xdomain/numkit/binary-io.h"
#include "xdomain/numkit/errors.h"

namespace xdomain {

namespace {

constexpr const char *kMeanTarget = "mean-target";

std::string Fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string Exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Value of "key=value" in a whitespace-separated line.
std::map<std::string, std::string> KeyValues(const std::string &line) {
  std::map<std::string, std::string> kv;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0)
      throw FormatError(FormatError::Kind::kMalformed, "report: bad token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

const std::string &Need(const std::map<std::string, std::string> &kv, const std::string &key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError(FormatError::Kind::kMalformed, "report: missing " + key);
  return it->second;
}

template <typename T>
T Parse(const std::string &s, const char *what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(FormatError::Kind::kMalformed, std::string("report: bad ") + what);
  return v;
}

/// Domains of every report, checked to agree with the first.
std::vector<std::string> CommonDomains(std::span<const NamedReport> systems) {
  if (systems.empty()) throw ContractError("report: no systems given");
  std::vector<std::string> names;
  for (const DomainResult &d : systems[0].report.domains) names.push_back(d.domain);
  for (const NamedReport &s : systems) {
    std::vector<std::string> other;
    for (const DomainResult &d : s.report.domains) other.push_back(d.domain);
    if (other != names)
      throw ContractError("report: domains of '" + s.name + "' do not match '" + systems[0].name +
                          "'");
  }
  return names;
}

/// EER per column (domains, then mean-target when there are targets).
std::vector<double> Row(const EvalReport &r) {
  std::vector<double> row;
  for (const DomainResult &d : r.domains) row.push_back(d.eer);
  if (r.domains.size() > 1) row.push_back(MeanTargetEer(r));
  return row;
}

}  // namespace

RowVec EmbedUtteranceRaw(const ModelConfig &cfg, const TensorMap &params, Stage stage, int domain,
                         const Mat &features) {
  if (domain < 0 || domain > cfg.subnet.num_domains)
    throw LookupError("embed: domain id " + std::to_string(domain) + " is unknown to the model");
  const Mat utts[1] = {features};
  const Mat emb = BackboneForward(cfg, params, utts, nullptr);
  if (stage != Stage::kAdapt) return emb.row(0);
  if (domain > 0) return SubnetForward(cfg, params, domain, emb, SubnetStage::kFull).row(0);
  RowVec sum = RowVec::Zero(cfg.FinalDim());
  for (int h = 1; h <= cfg.subnet.num_domains; ++h)
    sum += SubnetForward(cfg, params, h, emb, SubnetStage::kFull).row(0);
  return sum / cfg.subnet.num_domains;
}

RowVec EmbedUtterance(const ModelConfig &cfg, const TensorMap &params, Stage stage, int domain,
                      const Mat &features) {
  const RowVec raw = EmbedUtteranceRaw(cfg, params, stage, domain, features);
  const double norm = raw.norm();
  if (!(norm > 0.0)) throw ContractError("embed: zero embedding");
  return raw / norm;
}

double CosineScore(const RowVec &a, const RowVec &b) {
  if (a.size() != b.size()) throw StructuralError("cosine: length mismatch");
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw ContractError("cosine: zero vector");
  return a.dot(b) / (na * nb);
}

RowVec EnrollSpeaker(std::span<const RowVec> embeddings) {
  if (embeddings.empty()) throw ContractError("enroll: no embeddings");
  RowVec sum = RowVec::Zero(embeddings[0].size());
  for (const RowVec &e : embeddings) {
    if (e.size() != sum.size()) throw StructuralError("enroll: length mismatch");
    sum += e;
  }
  const double norm = sum.norm();
  if (!(norm > 0.0)) throw ContractError("enroll: embeddings average to zero");
  return sum / norm;
}

EerResult ComputeEer(std::span<const double> target_scores,
                     std::span<const double> nontarget_scores) {
  if (target_scores.empty() || nontarget_scores.empty())
    throw ContractError("EER: need both target and nontarget trials");
  struct Item {
    double score;
    bool target;
  };
  std::vector<Item> items;
  for (double s : target_scores) items.push_back({s, true});
  for (double s : nontarget_scores) items.push_back({s, false});
  for (const Item &it : items)
    if (!std::isfinite(it.score)) throw ContractError("EER: non-finite score");
  std::sort(items.begin(), items.end(), [](const Item &a, const Item &b) { return a.score < b.score; });

  const long long n_t = static_cast<long long>(target_scores.size());
  const long long n_n = static_cast<long long>(nontarget_scores.size());
  // Operating point i: threshold above the i lowest distinct values.
  long long below_t = 0, below_n = 0;
  double prev_far = 1.0, prev_frr = 0.0, prev_theta = items.front().score - 1.0;
  std::size_t i = 0;
  while (true) {
    const double far = static_cast<double>(n_n - below_n) / n_n;
    const double frr = static_cast<double>(below_t) / n_t;
    double theta;
    if (i == 0) {
      theta = prev_theta;
    } else if (i < items.size()) {
      theta = 0.5 * (items[i - 1].score + items[i].score);
    } else {
      theta = items.back().score + 1.0;
    }
    const long long lhs = (n_n - below_n) * n_t, rhs = below_t * n_n;
    if (lhs == rhs) return {frr, theta};
    if (lhs < rhs) {
      const double d_prev = prev_far - prev_frr, d_cur = far - frr;
      const double t = d_prev / (d_prev - d_cur);
      return {prev_far + t * (far - prev_far), prev_theta + t * (theta - prev_theta)};
    }
    prev_far = far;
    prev_frr = frr;
    prev_theta = theta;
    // Advance past the next distinct value.
    const double v = items[i].score;
    while (i < items.size() && items[i].score == v) {
      (items[i].target ? below_t : below_n) += 1;
      ++i;
    }
  }
}

EerResult ComputeEer(std::span<const ScoreRecord> records) {
  std::vector<double> target, nontarget;
  for (const ScoreRecord &r : records) (r.trial.is_target ? target : nontarget).push_back(r.score);
  return ComputeEer(target, nontarget);
}

double RelativeDecrease(double baseline, double value) {
  if (!(baseline > 0.0)) throw ContractError("RD: baseline EER must be positive");
  return 100.0 * (baseline - value) / baseline;
}

const DomainResult &EvalReport::Find(const std::string &domain) const {
  for (const DomainResult &d : domains)
    if (d.domain == domain) return d;
  throw LookupError("report: no domain '" + domain + "'");
}

std::string EvalReport::ToText() const {
  std::ostringstream os;
  os << "checkpoint=" << checkpoint_id << " stage=" << StageName(stage) << '\n';
  for (const DomainResult &d : domains)
    os << "domain=" << d.domain << " eer=" << Exact(d.eer) << " trials=" << d.trials
       << " targets=" << d.targets << '\n';
  return os.str();
}

EvalReport EvalReport::FromText(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(FormatError::Kind::kMalformed, "report: empty");
  EvalReport r;
  const auto head = KeyValues(line);
  r.checkpoint_id = Need(head, "checkpoint");
  r.stage = ParseStage(Need(head, "stage"));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto kv = KeyValues(line);
    DomainResult d;
    d.domain = Need(kv, "domain");
    d.eer = std::stod(Need(kv, "eer"));
    d.trials = Parse<std::size_t>(Need(kv, "trials"), "trial count");
    d.targets = Parse<std::size_t>(Need(kv, "targets"), "target count");
    if (!(d.eer >= 0.0 && d.eer <= 1.0))
      throw FormatError(FormatError::Kind::kMalformed, "report: EER outside [0, 1]");
    r.domains.push_back(std::move(d));
  }
  return r;
}

void EvalReport::Write(const std::filesystem::path &path) const { WriteFileBytes(path, ToText()); }

EvalReport EvalReport::Read(const std::filesystem::path &path) {
  return FromText(ReadFileBytes(path));
}

std::vector<ScoreRecord> ScoreDomain(const ModelConfig &cfg, const Checkpoint &ckpt,
                                     const Corpus &corpus, int domain) {
  const std::vector<TrialPair> trials = MakeTrials(corpus.Manifest(), domain);
  std::map<std::string, RowVec> cache;
  auto embed = [&](const std::string &utt_id) -> const RowVec & {
    auto it = cache.find(utt_id);
    if (it != cache.end()) return it->second;
    const Utterance &u = corpus.Find(utt_id);
    return cache[utt_id] =
               EmbedUtterance(cfg, ckpt.tensors, ckpt.meta.stage, domain, u.features);
  };
  std::vector<ScoreRecord> records;
  records.reserve(trials.size());
  for (const TrialPair &t : trials) {
    const RowVec enroll[1] = {embed(t.enroll_utt)};
    const RowVec model = EnrollSpeaker(enroll);
    records.push_back({t, CosineScore(model, embed(t.test_utt))});
  }
  return records;
}

EvalReport Evaluate(const ModelConfig &cfg, const Checkpoint &ckpt, const Corpus &corpus,
                    std::span<const int> domains, const std::string &checkpoint_id) {
  EvalReport report;
  report.checkpoint_id = checkpoint_id;
  report.stage = ckpt.meta.stage;
  for (int d : domains) {
    const std::vector<ScoreRecord> records = ScoreDomain(cfg, ckpt, corpus, d);
    DomainResult r;
    r.domain = corpus.Manifest().domain_names.at(d);
    r.eer = ComputeEer(records).eer;
    r.trials = records.size();
    for (const ScoreRecord &s : records) r.targets += s.trial.is_target ? 1 : 0;
    report.domains.push_back(std::move(r));
  }
  return report;
}

std::string FileId(const std::filesystem::path &path) { return ToHex(Digest(ReadFileBytes(path))); }

double MeanTargetEer(const EvalReport &report) {
  if (report.domains.size() < 2) throw ContractError("report: no target domains");
  double sum = 0.0;
  for (std::size_t i = 1; i < report.domains.size(); ++i) sum += report.domains[i].eer;
  return sum / static_cast<double>(report.domains.size() - 1);
}

std::string FormatReportTable(std::span<const NamedReport> systems) {
  std::vector<std::string> columns = CommonDomains(systems);
  if (columns.size() > 1) columns.push_back(kMeanTarget);
  std::size_t label_width = 8;
  for (const NamedReport &s : systems) label_width = std::max(label_width, s.name.size() + 8);
  auto cell = [](const std::string &text, std::size_t width) {
    return std::string(width > text.size() ? width - text.size() : 0, ' ') + text;
  };
  std::ostringstream os;
  os << std::string(label_width, ' ');
  std::vector<std::size_t> widths;
  for (const std::string &c : columns) {
    widths.push_back(std::max<std::size_t>(c.size(), 9) + 2);
    os << cell(c, widths.back());
  }
  os << '\n';
  const std::vector<double> base = Row(systems[0].report);
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const std::vector<double> row = Row(systems[s].report);
    os << systems[s].name << std::string(label_width - systems[s].name.size(), ' ');
    for (std::size_t c = 0; c < row.size(); ++c) os << cell(Fixed(100.0 * row[c], 3) + "%", widths[c]);
    os << '\n';
    if (s == 0) continue;
    const std::string label = "RD% vs " + systems[0].name;
    os << label << std::string(label_width > label.size() ? label_width - label.size() : 1, ' ');
    for (std::size_t c = 0; c < row.size(); ++c)
      os << cell(base[c] > 0.0 ? Fixed(RelativeDecrease(base[c], row[c]), 2) + "%" : "n/a",
                 widths[c]);
    os << '\n';
  }
  return os.str();
}

std::string FormatReportKeyValues(std::span<const NamedReport> systems) {
  std::vector<std::string> columns = CommonDomains(systems);
  if (columns.size() > 1) columns.push_back(kMeanTarget);
  std::ostringstream os;
  const std::vector<double> base = Row(systems[0].report);
  for (const NamedReport &s : systems) {
    const std::vector<double> row = Row(s.report);
    for (std::size_t c = 0; c < row.size(); ++c)
      os << "system=" << s.name << " domain=" << columns[c] << " eer=" << Exact(row[c]) << '\n';
  }
  for (std::size_t s = 1; s < systems.size(); ++s) {
    const std::vector<double> row = Row(systems[s].report);
    for (std::size_t c = 0; c < row.size(); ++c)
      os << "baseline=" << systems[0].name << " system=" << systems[s].name
         << " domain=" << columns[c] << " rd="
         << (base[c] > 0.0 ? Exact(RelativeDecrease(base[c], row[c])) : "undefined") << '\n';
  }
  return os.str();
}

}  // namespace xdomain
