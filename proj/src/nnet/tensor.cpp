#include "seqdisc/nnet/tensor.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "seqdisc/error.hpp"

namespace seqdisc::nn {

namespace {
std::atomic<bool> g_checked{false};

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_)) {
    throw StructuralError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape product " + std::to_string(product(shape_)));
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void set_checked_mode(bool on) { g_checked.store(on); }
bool checked_mode() { return g_checked.load(std::memory_order_relaxed); }

void require_finite(const Tensor& t, std::string_view what) {
  if (!t.all_finite()) throw NumericError("non-finite value in " + std::string(what));
}

}  // namespace seqdisc::nn
