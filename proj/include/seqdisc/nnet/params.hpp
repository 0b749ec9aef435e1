#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seqdisc/nnet/tensor.hpp"

namespace seqdisc::nn {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  // Adam moments; empty until the first optimizer step.
  Tensor m;
  Tensor v;
};

/// Named parameters with gradient accumulators and optimizer state.
/// Insertion order is the canonical order for hashing and checkpoints.
class ParamStore {
 public:
  /// Registers a parameter and returns its index. Names must be unique.
  std::size_t add(std::string name, Tensor init);

  std::size_t size() const { return params_.size(); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  Param& operator[](std::size_t i) { return params_.at(i); }
  const Param& operator[](std::size_t i) const { return params_.at(i); }
  Param& get(const std::string& name) { return params_[index_of(name)]; }
  const Param& get(const std::string& name) const { return params_[index_of(name)]; }

  std::vector<Param>::iterator begin() { return params_.begin(); }
  std::vector<Param>::iterator end() { return params_.end(); }
  std::vector<Param>::const_iterator begin() const { return params_.begin(); }
  std::vector<Param>::const_iterator end() const { return params_.end(); }

  void zero_grad();
  std::size_t num_values() const;
  /// Squared L2 norm of all gradients.
  double grad_norm_sq() const;

  std::uint64_t adam_steps() const { return adam_steps_; }
  void set_adam_steps(std::uint64_t t) { adam_steps_ = t; }

  /// Hash over names, shapes and the bit patterns of the values.
  std::uint64_t hash() const;

  /// Copies values (not gradients or moments) from a store with identical
  /// layout.
  void copy_values_from(const ParamStore& other);

 private:
  std::vector<Param> params_;
  std::map<std::string, std::size_t> index_;
  std::uint64_t adam_steps_ = 0;
};

}  // namespace seqdisc::nn
