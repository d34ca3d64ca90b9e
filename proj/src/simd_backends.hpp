#pragma once

#include "banf/simd.hpp"

namespace banf::simd {

extern const Ops kScalarOps;

#if defined(BANF_HAVE_AVX2_LANE)
extern const Ops kAvx2Ops;
#endif

} // namespace banf::simd
