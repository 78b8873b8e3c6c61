#include "cpr/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace cpr {

namespace {

std::size_t checked_count(const std::vector<int>& shape) {
  if (shape.empty()) throw ConfigError("tensor shape must have at least one dimension");
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ConfigError("tensor dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(checked_count(shape_), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values) : shape_(std::move(shape)) {
  if (checked_count(shape_) != values.size()) {
    throw ConfigError("tensor data length does not match shape");
  }
  data_ = std::move(values);
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::vec(std::vector<double> values) {
  int n = static_cast<int>(values.size());
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

int Tensor::rows() const {
  if (ndim() == 1) return 1;
  if (ndim() == 2) return shape_[0];
  throw ConfigError("rows() requires a 1-D or 2-D tensor, got " + shape_str());
}

int Tensor::cols() const {
  if (ndim() == 1) return shape_[0];
  if (ndim() == 2) return shape_[1];
  throw ConfigError("cols() requires a 1-D or 2-D tensor, got " + shape_str());
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << ",";
    os << shape_[i];
  }
  os << ")";
  return os.str();
}

int argmax(const double* v, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

int argmin(const double* v, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

int argmax(const Tensor& v) { return argmax(v.data(), static_cast<int>(v.size())); }
int argmin(const Tensor& v) { return argmin(v.data(), static_cast<int>(v.size())); }

double max_value(const Tensor& v) { return v[argmax(v)]; }

}  // namespace cpr
