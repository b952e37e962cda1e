#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "maebound/network.hpp"
#include "maebound/sample.hpp"

namespace maebound {

// Binary containers, all little-endian.
//
// Network ("MAEB"):
//   char[4] magic, u32 version, u32 k, u32 d, u32 q, u32 widths[k-1],
//   f64 sharpness, u32 flags (bit 0: biases present),
//   f64 W_1..W_k row-major, then f64 b_1..b_k when biases are present.
//
// Dataset ("MAED"):
//   char[4] magic, u32 version, u32 d, u32 q, u32 provenance, u64 count,
//   then per pair: f64 x[d], f64 y[q], f64 scale.

inline constexpr std::uint32_t kContainerVersion = 1;

std::string encode_network(const Network& net);
Network decode_network(std::string_view bytes);

std::string encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::string_view bytes);

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Whole-file read; throws an I/O error with the path on failure.
std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace maebound
