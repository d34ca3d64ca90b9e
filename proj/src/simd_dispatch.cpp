#include <cstdlib>
#include <string>

#include "banf/errors.hpp"
#include "simd_backends.hpp"

namespace banf::simd {
namespace {

bool cpu_has_avx2() {
#if defined(BANF_HAVE_AVX2_LANE) && defined(__x86_64__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Lane select_lane() {
    const char* env = std::getenv("BANF_KERNELS");
    std::string want = env ? env : "auto";
    if (want == "scalar") return Lane::Scalar;
    if (want == "avx2") {
        if (!lane_available(Lane::Avx2))
            throw ConfigError("BANF_KERNELS=avx2 but this host has no AVX2 support");
        return Lane::Avx2;
    }
    if (want != "auto" && !want.empty())
        throw ConfigError("BANF_KERNELS must be one of auto|scalar|avx2, got '" + want + "'");
    return cpu_has_avx2() ? Lane::Avx2 : Lane::Scalar;
}

} // namespace

bool lane_available(Lane lane) {
    switch (lane) {
    case Lane::Scalar: return true;
    case Lane::Avx2: return cpu_has_avx2();
    }
    return false;
}

const Ops& ops_for(Lane lane) {
    switch (lane) {
    case Lane::Scalar: return kScalarOps;
    case Lane::Avx2:
#if defined(BANF_HAVE_AVX2_LANE)
        if (cpu_has_avx2()) return kAvx2Ops;
#endif
        throw ConfigError("AVX2 lane not available on this host");
    }
    throw ConfigError("unknown simd lane");
}

Lane active_lane() {
    static const Lane lane = select_lane();
    return lane;
}

const Ops& ops() {
    static const Ops& table = ops_for(active_lane());
    return table;
}

std::string lane_name(Lane lane) {
    switch (lane) {
    case Lane::Scalar: return "scalar";
    case Lane::Avx2: return "avx2";
    }
    return "?";
}

} // namespace banf::simd
