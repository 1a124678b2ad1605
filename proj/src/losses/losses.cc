// src/losses/losses.cc

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

#include "xdomain/losses/losses.h"

#include <algorithm>
#include <cmath>

#include "xdomain/numkit/errors.h"

namespace xdomain {

namespace {

double Sign(double x) { return (x > 0.0) - (x < 0.0); }

Mat SquaredDistances(const Mat &a, const Mat &b) {
  Mat d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return d;
}

}  // namespace

double DiscrepancyLoss(std::span<const Mat> outputs, std::vector<Mat> *grads) {
  const std::size_t n_domains = outputs.size();
  if (n_domains < 2) throw ContractError("DiscrepancyLoss: need at least two domains");
  const Eigen::Index rows = outputs[0].rows(), cols = outputs[0].cols();
  for (const Mat &m : outputs)
    if (m.rows() != rows || m.cols() != cols)
      throw StructuralError("DiscrepancyLoss: per-domain outputs differ in shape");
  if (rows * cols == 0) throw ContractError("DiscrepancyLoss: empty outputs");

  const double coef = 2.0 / static_cast<double>(n_domains * (n_domains - 1));
  const double per_entry = 1.0 / static_cast<double>(rows * cols);
  if (grads) grads->assign(n_domains, Mat::Zero(rows, cols));
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n_domains; ++i)
    for (std::size_t j = i + 1; j < n_domains; ++j) {
      const Mat diff = outputs[i] - outputs[j];
      total += diff.cwiseAbs().sum() * per_entry;
      if (grads) {
        const Mat g = diff.unaryExpr(&Sign) * (coef * per_entry);
        (*grads)[i] += g;
        (*grads)[j] -= g;
      }
    }
  return coef * total;
}

double MedianHeuristicBandwidth(const Mat &src, const Mat &tgt) {
  Mat pooled(src.rows() + tgt.rows(), src.cols());
  pooled << src, tgt;
  std::vector<double> dist;
  for (Eigen::Index i = 0; i < pooled.rows(); ++i)
    for (Eigen::Index j = i + 1; j < pooled.rows(); ++j)
      dist.push_back((pooled.row(i) - pooled.row(j)).norm());
  if (dist.empty()) return 1.0;
  std::sort(dist.begin(), dist.end());
  const std::size_t mid = dist.size() / 2;
  const double median = dist.size() % 2 ? dist[mid] : 0.5 * (dist[mid - 1] + dist[mid]);
  return median > 0.0 ? median : 1.0;
}

double MmdPair(const Mat &src, const Mat &tgt, const MmdKernel &kernel, Mat *d_src, Mat *d_tgt) {
  if (src.cols() != tgt.cols()) throw StructuralError("MmdPair: source and target dims differ");
  const Eigen::Index n = src.rows(), m = tgt.rows();

  if (kernel.kind == MmdKernel::Kind::kLinear) {
    if (n < 1 || m < 1) throw ContractError("MmdPair: empty sample set");
    const RowVec diff = src.colwise().mean() - tgt.colwise().mean();
    if (d_src) *d_src = (2.0 / static_cast<double>(n)) * diff.replicate(n, 1);
    if (d_tgt) *d_tgt = (-2.0 / static_cast<double>(m)) * diff.replicate(m, 1);
    return diff.squaredNorm();
  }

  if (!(kernel.bandwidth > 0.0)) throw ContractError("MmdPair: bandwidth must be positive");
  if (n < 2 || m < 2) throw ContractError("MmdPair: unbiased RBF estimate needs >= 2 samples per side");
  const double inv_2h2 = 1.0 / (2.0 * kernel.bandwidth * kernel.bandwidth);
  const Mat kxx = (-inv_2h2 * SquaredDistances(src, src).array()).exp().matrix();
  const Mat kyy = (-inv_2h2 * SquaredDistances(tgt, tgt).array()).exp().matrix();
  const Mat kxy = (-inv_2h2 * SquaredDistances(src, tgt).array()).exp().matrix();

  const double cxx = 1.0 / static_cast<double>(n * (n - 1));
  const double cyy = 1.0 / static_cast<double>(m * (m - 1));
  const double cxy = 2.0 / static_cast<double>(n * m);
  const double value = cxx * (kxx.sum() - kxx.trace()) + cyy * (kyy.sum() - kyy.trace()) -
                       cxy * kxy.sum();

  // d k(a, b) / d a = -k(a, b) (a - b) / h^2.
  const double inv_h2 = 2.0 * inv_2h2;
  if (d_src) {
    d_src->setZero(n, src.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) d_src->row(i) -= 2.0 * cxx * inv_h2 * kxx(i, j) * (src.row(i) - src.row(j));
      for (Eigen::Index j = 0; j < m; ++j)
        d_src->row(i) += cxy * inv_h2 * kxy(i, j) * (src.row(i) - tgt.row(j));
    }
  }
  if (d_tgt) {
    d_tgt->setZero(m, tgt.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j)
        if (j != i) d_tgt->row(i) -= 2.0 * cyy * inv_h2 * kyy(i, j) * (tgt.row(i) - tgt.row(j));
      for (Eigen::Index j = 0; j < n; ++j)
        d_tgt->row(i) += cxy * inv_h2 * kxy(j, i) * (tgt.row(i) - src.row(j));
    }
  }
  return value;
}

double MmdLoss(std::span<const Mat> sources, std::span<const Mat> targets,
               const MmdKernel &kernel, std::vector<Mat> *d_sources,
               std::vector<Mat> *d_targets) {
  if (sources.size() != targets.size())
    throw StructuralError("MmdLoss: one source set per target domain is required");
  if (d_sources) d_sources->resize(sources.size());
  if (d_targets) d_targets->resize(targets.size());
  double total = 0.0;
  for (std::size_t h = 0; h < sources.size(); ++h) {
    MmdKernel k = kernel;
    if (k.kind == MmdKernel::Kind::kRbf && k.median_heuristic)
      k.bandwidth = MedianHeuristicBandwidth(sources[h], targets[h]);
    total += MmdPair(sources[h], targets[h], k, d_sources ? &(*d_sources)[h] : nullptr,
                     d_targets ? &(*d_targets)[h] : nullptr);
  }
  return total;
}

double CrossEntropy(const Mat &logits, std::span<const int> labels, Mat *d_logits) {
  const Eigen::Index n = logits.rows(), classes = logits.cols();
  if (static_cast<std::size_t>(n) != labels.size())
    throw StructuralError("CrossEntropy: one label per row is required");
  if (n == 0) throw ContractError("CrossEntropy: empty batch");
  for (int y : labels)
    if (y < 0 || y >= classes)
      throw ContractError("CrossEntropy: label " + std::to_string(y) + " outside [0, " +
                          std::to_string(classes) + ")");
  if (d_logits) d_logits->resize(n, classes);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double max = logits.row(i).maxCoeff();
    const RowVec shifted = logits.row(i).array() - max;
    const double log_z = std::log(shifted.array().exp().sum());
    total += log_z - shifted(labels[i]);
    if (d_logits) {
      d_logits->row(i) = (shifted.array() - log_z).exp();
      (*d_logits)(i, labels[i]) -= 1.0;
    }
  }
  if (d_logits) *d_logits /= static_cast<double>(n);
  return total / static_cast<double>(n);
}

}  // namespace xdomain
