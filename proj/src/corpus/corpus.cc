// src/corpus/corpus.cc

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

#include "xdomain/corpus/corpus.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "xdomain/numkit/binary-io.h"
#include "xdomain/numkit/errors.h"

namespace xdomain {

namespace {

constexpr char kFeatureMagic[4] = {'X', 'D', 'A', 'F'};
constexpr std::uint32_t kFeatureVersion = 1;

std::vector<std::string> SplitOn(const std::string &line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

template <typename T>
T ParseNumber(std::string_view s, std::string_view what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(FormatError::Kind::kMalformed,
                      std::string(what) + ": cannot parse '" + std::string(s) + "'");
  return v;
}

std::string StemOf(int speaker, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spk%03d-utt%02d", speaker, index);
  return buf;
}

/// Fills in channel gains that the config left to the generator.
DomainSpec ResolveDomain(const CorpusConfig &cfg, int domain) {
  DomainSpec spec = cfg.domains[domain];
  if (spec.kind != DomainKind::kClean && spec.offset.empty() && spec.offset_std > 0.0) {
    RandomStream rng(cfg.seed, "corpus.offset", static_cast<std::uint64_t>(domain));
    for (int j = 0; j < cfg.input_dim; ++j) spec.offset.push_back(spec.offset_std * rng.Gaussian());
  }
  if (spec.kind == DomainKind::kChannel && spec.channel_gain.empty()) {
    RandomStream rng(cfg.seed, "corpus.channel-gain", static_cast<std::uint64_t>(domain));
    const double log_spread = std::log(spec.gain_spread);
    for (int j = 0; j < cfg.input_dim; ++j)
      spec.channel_gain.push_back(std::exp(rng.Uniform(-log_spread, log_spread)));
  }
  return spec;
}

Mat Projection(const CorpusConfig &cfg) {
  RandomStream rng(cfg.seed, "corpus.projection");
  Mat p(cfg.input_dim, cfg.identity_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.identity_dim));
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = scale * rng.Gaussian();
  return p;
}

}  // namespace

std::string_view DomainKindName(DomainKind kind) {
  switch (kind) {
    case DomainKind::kClean: return "clean";
    case DomainKind::kChannel: return "channel";
    case DomainKind::kFarField: return "farfield";
    case DomainKind::kNoisy: return "noisy";
  }
  throw ContractError("unknown domain kind");
}

DomainKind ParseDomainKind(std::string_view name) {
  if (name == "clean") return DomainKind::kClean;
  if (name == "channel") return DomainKind::kChannel;
  if (name == "farfield") return DomainKind::kFarField;
  if (name == "noisy") return DomainKind::kNoisy;
  throw ContractError("unknown domain kind '" + std::string(name) + "'");
}

std::vector<DomainSpec> DefaultDomains() {
  std::vector<DomainSpec> domains(4);
  domains[1].name = "lena-booth";
  domains[1].kind = DomainKind::kChannel;
  domains[1].gain_spread = 2.5;
  domains[2].name = "far-field";
  domains[2].kind = DomainKind::kFarField;
  domains[2].attenuation = 0.6;
  domains[2].smear_width = 5;
  domains[3].name = "noisy";
  domains[3].kind = DomainKind::kNoisy;
  domains[3].snr_db = 0.0;
  for (int d = 1; d < 4; ++d) domains[d].offset_std = 3.0;
  return domains;
}

namespace {

Mat ApplyKindTransform(const Mat &features, const DomainSpec &spec, RandomStream *noise) {
  const Eigen::Index frames = features.rows(), dim = features.cols();
  switch (spec.kind) {
    case DomainKind::kClean:
      return features;
    case DomainKind::kChannel: {
      if (spec.channel_gain.size() != static_cast<std::size_t>(dim))
        throw StructuralError("domain transform: channel gain has wrong dimension");
      Mat out = features;
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (!(spec.channel_gain[j] > 0.0))
          throw ContractError("domain transform: channel gains must be positive");
        out.col(j) *= spec.channel_gain[j];
      }
      return out;
    }
    case DomainKind::kFarField: {
      if (spec.smear_width < 1 || spec.smear_width > frames)
        throw ContractError("domain transform: smear width must be in [1, T]");
      Mat out(frames, dim);
      for (Eigen::Index t = 0; t < frames; ++t) {
        RowVec acc = RowVec::Zero(dim);
        for (int j = 0; j < spec.smear_width; ++j) acc += features.row(std::max<Eigen::Index>(t - j, 0));
        out.row(t) = (spec.attenuation / spec.smear_width) * acc;
      }
      return out;
    }
    case DomainKind::kNoisy: {
      if (!std::isfinite(spec.snr_db)) throw ContractError("domain transform: SNR must be finite");
      if (!noise) throw ContractError("domain transform: noisy condition needs a noise stream");
      const double signal_power = features.squaredNorm() / static_cast<double>(features.size());
      const double noise_std = std::sqrt(signal_power / std::pow(10.0, spec.snr_db / 10.0));
      Mat out = features;
      for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += noise_std * noise->Gaussian();
      return out;
    }
  }
  throw ContractError("domain transform: unknown kind");
}

}  // namespace

Mat ApplyDomainTransform(const Mat &features, const DomainSpec &spec, RandomStream *noise) {
  if (!features.allFinite()) throw ContractError("domain transform: non-finite input");
  Mat out = ApplyKindTransform(features, spec, noise);
  if (spec.kind == DomainKind::kClean || spec.offset.empty()) return out;
  if (spec.offset.size() != static_cast<std::size_t>(features.cols()))
    throw StructuralError("domain transform: offset has wrong dimension");
  out.rowwise() += RowVec::Map(spec.offset.data(), features.cols());
  return out;
}

void CorpusConfig::Validate() const {
  if (num_speakers < 2) throw ContractError("corpus: need at least two speakers");
  if (utts_per_speaker < 3) throw ContractError("corpus: need at least 3 utterances per speaker");
  if (frames_per_utt < 1 || input_dim < 1 || identity_dim < 1)
    throw ContractError("corpus: sizes must be positive");
  if (!(identity_scale > 0.0) || !(session_std >= 0.0) || !(phonetic_std >= 0.0))
    throw ContractError("corpus: scales must be nonnegative");
  if (!(ar_rho > -1.0 && ar_rho < 1.0)) throw ContractError("corpus: ar_rho must be in (-1, 1)");
  if (domains.empty() || domains[0].kind != DomainKind::kClean)
    throw ContractError("corpus: the first domain must be clean");
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const DomainSpec &d = domains[i];
    if (d.name.empty() || d.name.find_first_of(" \t,./") != std::string::npos)
      throw ContractError("corpus: invalid domain name '" + d.name + "'");
    for (std::size_t j = 0; j < i; ++j)
      if (domains[j].name == d.name) throw ContractError("corpus: duplicate domain " + d.name);
    if (d.kind == DomainKind::kChannel && d.channel_gain.empty() && !(d.gain_spread >= 1.0))
      throw ContractError("corpus: gain_spread must be >= 1");
    if (d.kind == DomainKind::kChannel && !d.channel_gain.empty() &&
        d.channel_gain.size() != static_cast<std::size_t>(input_dim))
      throw ContractError("corpus: channel_gain must have input_dim entries");
    if (d.kind == DomainKind::kFarField && (d.smear_width < 1 || d.smear_width > frames_per_utt))
      throw ContractError("corpus: smear_width must be in [1, frames_per_utt]");
    if (d.kind == DomainKind::kNoisy && !std::isfinite(d.snr_db))
      throw ContractError("corpus: snr_db must be finite");
    if (!(d.offset_std >= 0.0)) throw ContractError("corpus: offset_std must be nonnegative");
    if (!d.offset.empty() && d.offset.size() != static_cast<std::size_t>(input_dim))
      throw ContractError("corpus: offset must have input_dim entries");
  }
}

std::string CorpusConfig::CanonicalText() const {
  std::ostringstream os;
  os.precision(17);
  os << "seed=" << seed << "\nspeakers=" << num_speakers << "\nutts=" << utts_per_speaker
     << "\nframes=" << frames_per_utt << "\ninput_dim=" << input_dim
     << "\nidentity_dim=" << identity_dim << "\nidentity_scale=" << identity_scale
     << "\nsession_std=" << session_std << "\nphonetic_std=" << phonetic_std
     << "\nar_rho=" << ar_rho << '\n';
  for (const DomainSpec &d : domains) {
    os << "domain=" << d.name << ',' << DomainKindName(d.kind) << ",gains=";
    for (double g : d.channel_gain) os << g << ';';
    os << ",spread=" << d.gain_spread << ",att=" << d.attenuation << ",smear=" << d.smear_width
       << ",snr=" << d.snr_db << ",offset=";
    for (double o : d.offset) os << o << ';';
    os << ",offset_std=" << d.offset_std << '\n';
  }
  return os.str();
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kEnroll: return "enroll";
    case Split::kTest: return "test";
  }
  throw ContractError("unknown split");
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "enroll") return Split::kEnroll;
  if (name == "test") return Split::kTest;
  throw ContractError("unknown split '" + std::string(name) + "'");
}

std::string UtteranceRecord::Stem() const { return utt_id.substr(0, utt_id.rfind('.')); }

SplitCounts ComputeSplitCounts(int utts_per_speaker) {
  SplitCounts c;
  if (utts_per_speaker < 3) throw ContractError("corpus: need at least 3 utterances per speaker");
  c.enroll = std::max(1, (utts_per_speaker + 5) / 10);
  c.test = std::max(1, (2 * utts_per_speaker + 5) / 10);
  c.train = utts_per_speaker - c.enroll - c.test;
  return c;
}

int CorpusManifest::DomainId(std::string_view name_or_id) const {
  for (int d = 0; d < NumDomains(); ++d)
    if (domain_names[d] == name_or_id) return d;
  int id = -1;
  auto [ptr, ec] = std::from_chars(name_or_id.data(), name_or_id.data() + name_or_id.size(), id);
  if (ec == std::errc() && ptr == name_or_id.data() + name_or_id.size() && id >= 0 &&
      id < NumDomains())
    return id;
  throw LookupError("unknown domain '" + std::string(name_or_id) + "'");
}

void CorpusManifest::Write(const std::filesystem::path &path) const {
  std::ostringstream os;
  os << "# seed=" << seed << " fingerprint=" << ToHex(fingerprint) << " speakers=" << num_speakers
     << " domains=";
  for (std::size_t i = 0; i < domain_names.size(); ++i) os << (i ? "," : "") << domain_names[i];
  os << '\n';
  for (const UtteranceRecord &r : utterances)
    os << r.utt_id << '\t' << r.speaker << '\t' << r.domain << '\t' << SplitName(r.split) << '\t'
       << r.relpath << '\t' << r.frames << '\n';
  WriteFileBytes(path, os.str());
}

CorpusManifest CorpusManifest::Read(const std::filesystem::path &path) {
  std::istringstream in(ReadFileBytes(path));
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# "))
    throw FormatError(FormatError::Kind::kMalformed, "manifest: missing header line");
  CorpusManifest m;
  bool have_seed = false, have_fp = false, have_spk = false, have_dom = false;
  for (const std::string &tok : SplitOn(line.substr(2), ' ')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
    if (key == "seed") {
      m.seed = ParseNumber<std::uint64_t>(value, "manifest seed");
      have_seed = true;
    } else if (key == "fingerprint") {
      m.fingerprint = FingerprintFromHex(value);
      have_fp = true;
    } else if (key == "speakers") {
      m.num_speakers = ParseNumber<int>(value, "manifest speakers");
      have_spk = true;
    } else if (key == "domains") {
      m.domain_names = SplitOn(value, ',');
      have_dom = true;
    }
  }
  if (!(have_seed && have_fp && have_spk && have_dom))
    throw FormatError(FormatError::Kind::kMalformed, "manifest: incomplete header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = SplitOn(line, '\t');
    if (f.size() != 6)
      throw FormatError(FormatError::Kind::kMalformed, "manifest: expected 6 fields in '" + line + "'");
    UtteranceRecord r;
    r.utt_id = f[0];
    r.speaker = ParseNumber<int>(f[1], "manifest speaker");
    r.domain = ParseNumber<int>(f[2], "manifest domain");
    r.split = ParseSplit(f[3]);
    r.relpath = f[4];
    r.frames = ParseNumber<int>(f[5], "manifest frames");
    if (r.speaker < 0 || r.speaker >= m.num_speakers || r.domain < 0 || r.domain >= m.NumDomains())
      throw FormatError(FormatError::Kind::kMalformed, "manifest: record out of range: " + line);
    m.utterances.push_back(std::move(r));
  }
  return m;
}

Mat GenerateCleanUtterance(const CorpusConfig &cfg, int speaker, int index) {
  const Mat projection = Projection(cfg);
  RandomStream spk_rng(cfg.seed, "corpus.speaker", static_cast<std::uint64_t>(speaker));
  Vec identity(cfg.identity_dim);
  for (Eigen::Index i = 0; i < identity.size(); ++i) identity(i) = cfg.identity_scale * spk_rng.Gaussian();
  const RowVec center = (projection * identity).transpose();

  RandomStream rng(cfg.seed, "corpus.utterance",
                   static_cast<std::uint64_t>(speaker) * cfg.utts_per_speaker + index);
  RowVec session(cfg.input_dim);
  for (Eigen::Index j = 0; j < session.size(); ++j) session(j) = cfg.session_std * rng.Gaussian();

  const double innovation = std::sqrt(1.0 - cfg.ar_rho * cfg.ar_rho) * cfg.phonetic_std;
  Mat x(cfg.frames_per_utt, cfg.input_dim);
  RowVec state(cfg.input_dim);
  for (Eigen::Index j = 0; j < state.size(); ++j) state(j) = cfg.phonetic_std * rng.Gaussian();
  for (int t = 0; t < cfg.frames_per_utt; ++t) {
    if (t > 0)
      for (Eigen::Index j = 0; j < state.size(); ++j)
        state(j) = cfg.ar_rho * state(j) + innovation * rng.Gaussian();
    x.row(t) = center + session + state;
  }
  return x;
}

CorpusManifest GenerateCorpus(const CorpusConfig &cfg, const std::filesystem::path &out_dir) {
  cfg.Validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "trials", ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  const int n_domains = static_cast<int>(cfg.domains.size());
  std::vector<DomainSpec> specs;
  for (int d = 0; d < n_domains; ++d) {
    specs.push_back(ResolveDomain(cfg, d));
    fs::create_directories(out_dir / "feats" / specs[d].name, ec);
    if (ec) throw IoError("cannot create feature directory: " + ec.message());
  }

  CorpusManifest manifest;
  manifest.seed = cfg.seed;
  manifest.fingerprint = Digest(cfg.CanonicalText());
  manifest.num_speakers = cfg.num_speakers;
  for (const DomainSpec &s : specs) manifest.domain_names.push_back(s.name);

  const SplitCounts counts = ComputeSplitCounts(cfg.utts_per_speaker);
  std::vector<std::vector<UtteranceRecord>> per_domain(n_domains);
  for (int spk = 0; spk < cfg.num_speakers; ++spk) {
    std::vector<int> order(cfg.utts_per_speaker);
    for (int u = 0; u < cfg.utts_per_speaker; ++u) order[u] = u;
    RandomStream split_rng(cfg.seed, "corpus.split", static_cast<std::uint64_t>(spk));
    std::shuffle(order.begin(), order.end(), split_rng.Engine());
    std::vector<Split> split_of(cfg.utts_per_speaker);
    for (int i = 0; i < cfg.utts_per_speaker; ++i)
      split_of[order[i]] = i < counts.train                  ? Split::kTrain
                           : i < counts.train + counts.enroll ? Split::kEnroll
                                                              : Split::kTest;

    for (int u = 0; u < cfg.utts_per_speaker; ++u) {
      const Mat clean = GenerateCleanUtterance(cfg, spk, u);
      const std::string stem = StemOf(spk, u);
      for (int d = 0; d < n_domains; ++d) {
        const std::uint64_t counter =
            (static_cast<std::uint64_t>(spk) * cfg.utts_per_speaker + u) * n_domains + d;
        RandomStream noise(cfg.seed, "corpus.domain-noise", counter);
        const Mat feats = ApplyDomainTransform(clean, specs[d], &noise);
        UtteranceRecord r;
        r.utt_id = stem + "." + specs[d].name;
        r.speaker = spk;
        r.domain = d;
        r.split = split_of[u];
        r.relpath = "feats/" + specs[d].name + "/" + stem + ".xdaf";
        r.frames = cfg.frames_per_utt;
        WriteFeatures(out_dir / r.relpath, feats);
        per_domain[d].push_back(std::move(r));
      }
    }
  }
  for (auto &records : per_domain)
    for (auto &r : records) manifest.utterances.push_back(std::move(r));
  manifest.Write(out_dir / "manifest.tsv");
  for (int d = 0; d < n_domains; ++d)
    if (counts.enroll > 0 && counts.test > 0)
      WriteTrials(out_dir / "trials" / (specs[d].name + ".trials"), MakeTrials(manifest, d));
  return manifest;
}

std::vector<TrialPair> MakeTrials(const CorpusManifest &manifest, int domain) {
  if (domain < 0 || domain >= manifest.NumDomains())
    throw LookupError("MakeTrials: unknown domain id " + std::to_string(domain));
  std::vector<const UtteranceRecord *> enroll, test;
  for (const UtteranceRecord &r : manifest.utterances) {
    if (r.domain != domain) continue;
    if (r.split == Split::kEnroll) enroll.push_back(&r);
    if (r.split == Split::kTest) test.push_back(&r);
  }
  if (enroll.empty() || test.empty())
    throw ContractError("MakeTrials: domain " + manifest.domain_names[domain] +
                        " has an empty enroll or test split");
  std::vector<TrialPair> trials;
  trials.reserve(enroll.size() * test.size());
  for (const UtteranceRecord *e : enroll)
    for (const UtteranceRecord *t : test)
      trials.push_back({e->utt_id, t->utt_id, e->speaker == t->speaker});
  std::sort(trials.begin(), trials.end(), [](const TrialPair &a, const TrialPair &b) {
    return std::tie(a.enroll_utt, a.test_utt) < std::tie(b.enroll_utt, b.test_utt);
  });
  return trials;
}

void WriteTrials(const std::filesystem::path &path, const std::vector<TrialPair> &trials) {
  std::ostringstream os;
  for (const TrialPair &t : trials)
    os << t.enroll_utt << ' ' << t.test_utt << ' ' << (t.is_target ? 1 : 0) << '\n';
  WriteFileBytes(path, os.str());
}

std::vector<TrialPair> ReadTrials(const std::filesystem::path &path) {
  std::istringstream in(ReadFileBytes(path));
  std::vector<TrialPair> trials;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = SplitOn(line, ' ');
    if (f.size() != 3 || (f[2] != "0" && f[2] != "1"))
      throw FormatError(FormatError::Kind::kMalformed, "trials: bad line '" + line + "'");
    trials.push_back({f[0], f[1], f[2] == "1"});
  }
  return trials;
}

void WriteFeatures(const std::filesystem::path &path, const Mat &features) {
  if (!features.allFinite()) throw NumericError("WriteFeatures: non-finite values");
  ByteWriter w;
  w.Raw(kFeatureMagic, 4);
  w.Le<std::uint32_t>(kFeatureVersion);
  w.Le<std::uint32_t>(static_cast<std::uint32_t>(features.rows()));
  w.Le<std::uint32_t>(static_cast<std::uint32_t>(features.cols()));
  for (Eigen::Index i = 0; i < features.size(); ++i) w.F32(features.data()[i]);
  WriteFileBytes(path, w.Bytes());
}

Mat ReadFeatures(const std::filesystem::path &path) {
  ByteReader r(ReadFileBytes(path), "features");
  char magic[4];
  r.Raw(magic, 4);
  if (std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw FormatError(FormatError::Kind::kBadMagic, "features: bad magic in '" + path.string() + "'");
  const auto version = r.Le<std::uint32_t>();
  if (version != kFeatureVersion)
    throw FormatError(FormatError::Kind::kBadVersion,
                      "features: unsupported version " + std::to_string(version));
  const auto frames = r.Le<std::uint32_t>();
  const auto dim = r.Le<std::uint32_t>();
  if (static_cast<std::uint64_t>(frames) * dim * 4 != r.Remaining())
    throw FormatError(FormatError::Kind::kTruncated,
                      "features: declared " + std::to_string(frames) + "x" + std::to_string(dim) +
                          " does not match payload in '" + path.string() + "'");
  Mat x(frames, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = r.F32();
  return x;
}

Corpus::Corpus(CorpusManifest manifest, std::vector<Utterance> utterances)
    : manifest_(std::move(manifest)), utterances_(std::move(utterances)) {
  for (std::size_t i = 0; i < utterances_.size(); ++i)
    if (!index_.emplace(utterances_[i].record.utt_id, i).second)
      throw ContractError("corpus: duplicate utterance id " + utterances_[i].record.utt_id);
}

Corpus Corpus::Load(const std::filesystem::path &dir) {
  CorpusManifest manifest = CorpusManifest::Read(dir / "manifest.tsv");
  std::vector<Utterance> utts;
  utts.reserve(manifest.utterances.size());
  for (const UtteranceRecord &r : manifest.utterances) {
    Mat feats = ReadFeatures(dir / r.relpath);
    if (feats.rows() != r.frames)
      throw FormatError(FormatError::Kind::kMalformed,
                        "corpus: " + r.utt_id + " has " + std::to_string(feats.rows()) +
                            " frames, manifest says " + std::to_string(r.frames));
    utts.push_back({r, std::move(feats)});
  }
  return Corpus(std::move(manifest), std::move(utts));
}

const Utterance &Corpus::Find(const std::string &utt_id) const {
  auto it = index_.find(utt_id);
  if (it == index_.end()) throw LookupError("corpus: unknown utterance " + utt_id);
  return utterances_[it->second];
}

std::vector<const Utterance *> Corpus::Select(int domain, Split split) const {
  std::vector<const Utterance *> out;
  for (const Utterance &u : utterances_)
    if (u.record.domain == domain && u.record.split == split) out.push_back(&u);
  return out;
}

}  // namespace xdomain
