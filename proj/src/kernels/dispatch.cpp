#include <atomic>
#include <cstdlib>
#include <cstring>

#include "seqdisc/error.hpp"
#include "seqdisc/kernels.hpp"

namespace seqdisc::kernels {

namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::add, &scalar::hadamard_acc,
                                   &scalar::sum, &scalar::count_greater};

#if defined(SEQDISC_HAVE_AVX2)
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::add, &avx2::hadamard_acc,
                                 &avx2::sum, &avx2::count_greater};
#endif

Isa detect() {
  const char* forced = std::getenv("SEQDISC_KERNELS");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return Isa::kScalar;
  return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&table(detect())};
  return slot;
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(SEQDISC_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_available(isa)) throw ParameterError("kernel ISA not available on this CPU");
#if defined(SEQDISC_HAVE_AVX2)
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& active() { return *active_slot().load(std::memory_order_relaxed); }

Isa active_isa() { return &active() == &kScalarTable ? Isa::kScalar : Isa::kAvx2; }

void set_active_isa(Isa isa) { active_slot().store(&table(isa), std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

}  // namespace seqdisc::kernels
