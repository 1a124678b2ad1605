// include/xdomain/numkit/tensor.h

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

#ifndef XDOMAIN_NUMKIT_TENSOR_H_
#define XDOMAIN_NUMKIT_TENSOR_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace xdomain {

/// Row-major dense matrix used for all activations and batch data.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

/**
   A named parameter or data tensor: a list of positive dimensions and
   row-major 64-bit storage.  Rank-1 tensors view as a 1 x n matrix.
*/
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);

  static Tensor FromMatrix(const Mat &m);
  static Tensor FromVector(std::span<const double> v);

  const std::vector<std::size_t> &Dims() const { return dims_; }
  std::size_t Rank() const { return dims_.size(); }
  std::size_t Size() const { return data_.size(); }
  std::size_t NumRows() const;
  std::size_t NumCols() const;

  std::span<double> Data() { return data_; }
  std::span<const double> Data() const { return data_; }
  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  MatMap AsMatrix();
  ConstMatMap AsMatrix() const;

  bool SameShape(const Tensor &other) const { return dims_ == other.dims_; }
  bool AllFinite() const;
  void SetZero();

  /// "[3x4]" style shape string for error messages.
  std::string ShapeString() const;

  friend bool operator==(const Tensor &a, const Tensor &b) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

using TensorMap = std::map<std::string, Tensor>;

/// Returns params.at(name) or throws LookupError naming the tensor.
const Tensor &GetTensor(const TensorMap &params, const std::string &name);
Tensor &GetTensor(TensorMap *params, const std::string &name);

/// Returns the gradient slot for `name`, creating a zero tensor shaped like
/// `like` on first use.
Tensor &GradSlot(TensorMap *grads, const std::string &name, const Tensor &like);

/// Rounds every value to the nearest 32-bit float; this is the storage
/// precision of all files written by the library.
void RoundToFloat(TensorMap *tensors);

/// Bitwise equality of two tensor maps (same keys, shapes and values).
bool BitEqual(const TensorMap &a, const TensorMap &b);

}  // namespace xdomain

#endif  // XDOMAIN_NUMKIT_TENSOR_H_
