#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cpr/error.hpp"

namespace cpr {

// Dense row-major array of 64-bit floats; the single numeric currency.
// 1-D tensors act as row vectors (rows()==1), scalars have shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor full(std::vector<int> shape, double value);
  static Tensor scalar(double value);
  static Tensor vec(std::vector<double> values);
  static Tensor matrix(int rows, int cols, std::vector<double> values);

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  int rows() const;
  int cols() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double* row_ptr(int r) { return data_.data() + static_cast<std::size_t>(r) * cols(); }
  const double* row_ptr(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols(); }

  void fill(double value);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// Ties break toward the lowest index in all argmax/argmin helpers.
int argmax(const double* v, int n);
int argmin(const double* v, int n);
int argmax(const Tensor& v);
int argmin(const Tensor& v);
double max_value(const Tensor& v);

}  // namespace cpr
