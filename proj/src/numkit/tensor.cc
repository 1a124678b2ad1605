// src/numkit/tensor.cc

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

#include "xdomain/numkit/tensor.h"

#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

#include "xdomain/numkit/errors.h"

namespace xdomain {

Tensor::Tensor(std::vector<std::size_t> dims, double fill) : dims_(std::move(dims)) {
  std::size_t n = 1;
  for (std::size_t d : dims_) {
    if (d == 0) throw ContractError("Tensor: zero-sized dimension");
    n *= d;
  }
  if (dims_.empty()) throw ContractError("Tensor: rank must be at least 1");
  data_.assign(n, fill);
}

Tensor Tensor::FromMatrix(const Mat &m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  t.AsMatrix() = m;
  return t;
}

Tensor Tensor::FromVector(std::span<const double> v) {
  Tensor t({v.size()});
  std::copy(v.begin(), v.end(), t.data_.begin());
  return t;
}

std::size_t Tensor::NumRows() const { return dims_.size() == 1 ? 1 : dims_[0]; }

std::size_t Tensor::NumCols() const {
  if (dims_.empty()) return 0;
  return dims_.size() == 1 ? dims_[0] : data_.size() / dims_[0];
}

MatMap Tensor::AsMatrix() {
  return MatMap(data_.data(), static_cast<Eigen::Index>(NumRows()),
                static_cast<Eigen::Index>(NumCols()));
}

ConstMatMap Tensor::AsMatrix() const {
  return ConstMatMap(data_.data(), static_cast<Eigen::Index>(NumRows()),
                     static_cast<Eigen::Index>(NumCols()));
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void Tensor::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

std::string Tensor::ShapeString() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "x" : "") << dims_[i];
  os << ']';
  return os.str();
}

const Tensor &GetTensor(const TensorMap &params, const std::string &name) {
  auto it = params.find(name);
  if (it == params.end()) throw LookupError("no tensor named '" + name + "'");
  return it->second;
}

Tensor &GetTensor(TensorMap *params, const std::string &name) {
  auto it = params->find(name);
  if (it == params->end()) throw LookupError("no tensor named '" + name + "'");
  return it->second;
}

Tensor &GradSlot(TensorMap *grads, const std::string &name, const Tensor &like) {
  auto [it, inserted] = grads->try_emplace(name);
  if (inserted) it->second = Tensor(like.Dims(), 0.0);
  return it->second;
}

void RoundToFloat(TensorMap *tensors) {
  for (auto &[name, t] : *tensors)
    for (double &x : t.Data()) x = static_cast<double>(static_cast<float>(x));
}

bool BitEqual(const TensorMap &a, const TensorMap &b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !ia->second.SameShape(ib->second)) return false;
    if (std::memcmp(ia->second.Data().data(), ib->second.Data().data(),
                    ia->second.Size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

}  // namespace xdomain
