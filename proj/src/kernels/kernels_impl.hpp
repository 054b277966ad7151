#pragma once

#include "kilnloop/kernels.hpp"

namespace kilnloop::kernels::detail {

// Defined only when the AVX2 translation unit is built; the caller checks
// CPU support before using it.
const KernelTable& avx2_table_unchecked();

}  // namespace kilnloop::kernels::detail
