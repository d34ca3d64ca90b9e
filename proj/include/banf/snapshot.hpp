#pragma once

#include <cstdint>
#include <string>

#include "banf/field.hpp"
#include "banf/param_store.hpp"

namespace banf {

/// Parameter snapshot file: 8-byte little-endian header length, a JSON header
/// (format marker, arch descriptor, seed, tensor names + shapes), then the
/// tensor payloads as little-endian 64-bit floats in header order.
struct FieldSnapshot {
    FieldArch arch;
    ParamStore params;
    std::uint64_t seed = 0;
};

void save_field_snapshot(const std::string& path, const FieldArch& arch, const ParamStore& params,
                         std::uint64_t seed);

FieldSnapshot load_field_snapshot(const std::string& path);

} // namespace banf
