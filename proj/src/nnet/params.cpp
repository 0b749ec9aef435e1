#include "seqdisc/nnet/params.hpp"

#include <bit>
#include <cstring>

#include "seqdisc/error.hpp"
#include "seqdisc/random.hpp"

namespace seqdisc::nn {

std::size_t ParamStore::add(std::string name, Tensor init) {
  if (index_.count(name)) throw ParameterError("duplicate parameter name '" + name + "'");
  const std::size_t idx = params_.size();
  index_.emplace(name, idx);
  Param p;
  p.name = std::move(name);
  p.grad = Tensor(init.shape(), 0.0);
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return idx;
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ParameterError("no parameter named '" + name + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

double ParamStore::grad_norm_sq() const {
  double s = 0.0;
  for (const auto& p : params_) {
    for (double g : p.grad.values()) s += g * g;
  }
  return s;
}

std::uint64_t ParamStore::hash() const {
  std::uint64_t h = fnv1a64("");
  for (const auto& p : params_) {
    h = fnv1a64(p.name, h);
    for (std::size_t d : p.value.shape()) {
      h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&d), sizeof d), h);
    }
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(p.value.data()), p.value.size() * sizeof(double)),
                h);
  }
  return h;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.size() != size()) throw StructuralError("parameter store layouts differ");
  for (std::size_t i = 0; i < size(); ++i) {
    if (params_[i].name != other.params_[i].name || !params_[i].value.same_shape(other.params_[i].value)) {
      throw StructuralError("parameter store layouts differ at '" + params_[i].name + "'");
    }
    params_[i].value = other.params_[i].value;
  }
}

}  // namespace seqdisc::nn
