#pragma once

// Dense double-precision inner loops used by the network substrate and the
// score statistics. Each kernel has a scalar reference implementation and an
// AVX2 variant; the variant is picked once at runtime from CPU features.
//
// Reductions use a fixed 4-lane strided order: lane j accumulates elements
// i = j (mod 4), lanes are combined as (l0 + l1) + (l2 + l3), then the tail
// is added sequentially. Both variants follow it, so their results are
// bit-identical.

#include <cstddef>
#include <string_view>

namespace seqdisc::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += x
  void (*add)(const double* x, double* y, std::size_t n);
  // y += a * b (elementwise)
  void (*hadamard_acc)(const double* a, const double* b, double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  // number of x[i] > threshold
  std::size_t (*count_greater)(const double* x, std::size_t n, double threshold);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void add(const double* x, double* y, std::size_t n);
void hadamard_acc(const double* a, const double* b, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
std::size_t count_greater(const double* x, std::size_t n, double threshold);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void add(const double* x, double* y, std::size_t n);
void hadamard_acc(const double* a, const double* b, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
std::size_t count_greater(const double* x, std::size_t n, double threshold);
}  // namespace avx2

bool isa_available(Isa isa);

/// Table for a specific ISA; throws ParameterError if unavailable.
const KernelTable& table(Isa isa);

/// Active table. Defaults to the best available ISA; the environment
/// variable SEQDISC_KERNELS=scalar forces the reference path.
const KernelTable& active();
Isa active_isa();
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void add(const double* x, double* y, std::size_t n) { active().add(x, y, n); }
inline void hadamard_acc(const double* a, const double* b, double* y, std::size_t n) {
  active().hadamard_acc(a, b, y, n);
}
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline std::size_t count_greater(const double* x, std::size_t n, double threshold) {
  return active().count_greater(x, n, threshold);
}

}  // namespace seqdisc::kernels
