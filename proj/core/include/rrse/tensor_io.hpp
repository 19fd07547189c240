#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "rrse/tensor.hpp"

namespace rrse {

// RRSE tensor file layout (all integers little-endian):
//   "RRSE" | version u8 = 1 | dtype u8 (0 = f32, 1 = u8) | ndim u8 |
//   ndim x u32 extents | row-major payload
enum class DType : std::uint8_t { f32 = 0, u8 = 1 };

inline constexpr std::uint8_t kTensorFormatVersion = 1;

using AnyTensor = std::variant<Tensor, LabelMap>;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
std::vector<std::uint8_t> encode_tensor(const LabelMap& t);
AnyTensor decode_tensor(std::span<const std::uint8_t> bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
void save_tensor(const std::filesystem::path& path, const LabelMap& t);
AnyTensor load_any_tensor(const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);
LabelMap load_label_map(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace rrse
