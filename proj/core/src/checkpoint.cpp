// Copyright 2026 The maed-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "maed/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <string>

namespace maed::checkpoint {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'E', 'D', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    out.write(bytes, sizeof bytes);
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof bytes);
    if (!in) throw CheckpointError("truncated checkpoint " + path.string());
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(bytes[i]) << (8 * i));
    return value;
}

}  // namespace

void save(const std::filesystem::path& path, const nn::ParamList& params, CheckpointDtype dtype) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, tensor] : params) {
        if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw CheckpointError("name too long: " + name);
        put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint8_t>(out, dtype == CheckpointDtype::kF32 ? 0 : 1);
        put<std::uint8_t>(out, static_cast<std::uint8_t>(tensor.rank()));
        for (std::size_t e : tensor.shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(e));
        for (double v : tensor.data()) {
            if (dtype == CheckpointDtype::kF32) put(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
            else put(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

nn::ParamList read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw CheckpointError(path.string() + " is not a checkpoint (bad magic)");
    }
    const auto version = get<std::uint32_t>(in, path);
    if (version != kVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto count = get<std::uint32_t>(in, path);
    nn::ParamList out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = get<std::uint16_t>(in, path);
        std::string name(len, '\0');
        in.read(name.data(), len);
        const auto dtype = get<std::uint8_t>(in, path);
        if (dtype > 1) throw CheckpointError("entry '" + name + "' has unknown dtype tag " + std::to_string(dtype));
        const auto rank = get<std::uint8_t>(in, path);
        Shape shape(rank);
        for (auto& e : shape) e = get<std::uint32_t>(in, path);
        std::vector<double> values(numel(shape));
        for (double& v : values) {
            v = dtype == 0 ? static_cast<double>(std::bit_cast<float>(get<std::uint32_t>(in, path)))
                           : std::bit_cast<double>(get<std::uint64_t>(in, path));
        }
        out.push_back({std::move(name), Tensor::from(std::move(shape), std::move(values))});
    }
    return out;
}

void load_into(const std::filesystem::path& path, const nn::ParamList& params) {
    const nn::ParamList stored = read(path);
    std::map<std::string, const Tensor*> by_name;
    for (const auto& e : stored) by_name[e.name] = &e.tensor;

    std::string report;
    for (const auto& [name, tensor] : params) {
        const auto it = by_name.find(name);
        if (it == by_name.end()) {
            report += "  missing   " + name + " " + to_string(tensor.shape()) + "\n";
        } else if (it->second->shape() != tensor.shape()) {
            report += "  shape     " + name + " expected " + to_string(tensor.shape()) + " found " +
                      to_string(it->second->shape()) + "\n";
        }
    }
    for (const auto& e : stored) {
        const bool known = std::any_of(params.begin(), params.end(), [&](const auto& p) { return p.name == e.name; });
        if (!known) report += "  unexpected " + e.name + " " + to_string(e.tensor.shape()) + "\n";
    }
    if (!report.empty()) {
        throw CheckpointError("checkpoint " + path.string() + " does not match the model:\n" + report);
    }
    for (const auto& [name, tensor] : params) {
        const auto src = by_name.at(name)->data();
        Tensor dst = tensor;
        std::copy(src.begin(), src.end(), dst.mutable_data().begin());
    }
}

}  // namespace maed::checkpoint
