#include "banf/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "banf/errors.hpp"
#include "banf/simd.hpp"

namespace banf {

using nlohmann::json;

namespace {

void put_u64_le(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64_le(std::ostream& os, const double* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 8));
    } else {
        for (std::size_t i = 0; i < n; ++i) put_u64_le(os, std::bit_cast<std::uint64_t>(data[i]));
    }
}

void get_f64_le(std::istream& is, double* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 8));
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<double>(get_u64_le(is));
    }
}

} // namespace

void save_field_snapshot(const std::string& path, const FieldArch& arch, const ParamStore& params,
                         std::uint64_t seed) {
    json header;
    header["format"] = "banf-field";
    header["version"] = 1;
    header["arch"] = json::parse(arch.to_json_string());
    header["seed"] = seed;
    json tensors = json::array();
    for (const auto& [name, t] : params.entries())
        tensors.push_back({{"name", name}, {"shape", t.shape}});
    header["tensors"] = tensors;
    const std::string head = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write '" + path + "'");
    put_u64_le(os, head.size());
    os.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto& [name, t] : params.entries()) put_f64_le(os, t.data.data(), t.numel());
    if (!os) throw IoError("short write to '" + path + "'");
}

FieldSnapshot load_field_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read '" + path + "'");
    const std::uint64_t head_len = get_u64_le(is);
    if (!is || head_len == 0 || head_len > (1u << 26))
        throw IoError("'" + path + "' is not a parameter snapshot");
    std::string head(head_len, '\0');
    is.read(head.data(), static_cast<std::streamsize>(head_len));
    if (!is) throw IoError("truncated snapshot header in '" + path + "'");

    json header;
    try {
        header = json::parse(head);
    } catch (const json::exception& e) {
        throw IoError("bad snapshot header in '" + path + "': " + e.what());
    }
    if (header.value("format", "") != "banf-field")
        throw IoError("'" + path + "' is not a banf field snapshot");

    FieldSnapshot snap;
    snap.arch = FieldArch::from_json_string(header.at("arch").dump());
    snap.seed = header.value("seed", std::uint64_t(0));
    for (const json& tj : header.at("tensors")) {
        const std::string name = tj.at("name").get<std::string>();
        const auto shape = tj.at("shape").get<std::vector<std::size_t>>();
        Tensor t = Tensor::zeros(shape);
        get_f64_le(is, t.data.data(), t.numel());
        if (!is) throw IoError("truncated tensor '" + name + "' in '" + path + "'");
        if (!simd::ops().all_finite(t.data.data(), t.numel()))
            throw NumericError("snapshot tensor '" + name + "' holds non-finite values");
        snap.params.add(name, std::move(t));
    }
    return snap;
}

} // namespace banf
