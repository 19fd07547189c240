#include "rrse/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace rrse {
namespace {

constexpr char kMagic[4] = {'R', 'R', 'S', 'E'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> encode_header(DType dtype, const Shape& shape) {
  if (shape.empty() || shape.size() > std::numeric_limits<std::uint8_t>::max()) {
    throw Error("cannot encode tensor of rank " + std::to_string(shape.size()));
  }
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kTensorFormatVersion);
  out.push_back(static_cast<std::uint8_t>(dtype));
  out.push_back(static_cast<std::uint8_t>(shape.size()));
  for (std::size_t extent : shape) {
    if (extent > std::numeric_limits<std::uint32_t>::max()) throw Error("extent exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(extent));
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.shape().empty()) throw Error("cannot encode a null tensor");
  std::vector<std::uint8_t> out = encode_header(DType::f32, t.shape());
  out.reserve(out.size() + 4 * t.size());
  for (float v : t.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::vector<std::uint8_t> encode_tensor(const LabelMap& t) {
  if (t.shape().empty()) throw Error("cannot encode a null tensor");
  std::vector<std::uint8_t> out = encode_header(DType::u8, t.shape());
  out.insert(out.end(), t.values().begin(), t.values().end());
  return out;
}

AnyTensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 7 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error("not an RRSE tensor (bad magic)");
  }
  if (bytes[4] != kTensorFormatVersion) {
    throw Error("unsupported RRSE tensor version " + std::to_string(bytes[4]));
  }
  const std::uint8_t dtype = bytes[5];
  const std::size_t ndim = bytes[6];
  if (ndim == 0) throw Error("RRSE tensor has zero dimensions");
  std::size_t offset = 7;
  if (bytes.size() < offset + 4 * ndim) throw Error("truncated RRSE header");
  Shape shape(ndim);
  for (std::size_t i = 0; i < ndim; ++i, offset += 4) shape[i] = get_u32(bytes, offset);
  const std::size_t count = shape_numel(shape);

  switch (static_cast<DType>(dtype)) {
    case DType::f32: {
      if (bytes.size() != offset + 4 * count) throw Error("RRSE f32 payload size mismatch");
      std::vector<float> data(count);
      for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<float>(get_u32(bytes, offset + 4 * i));
      }
      return Tensor(std::move(shape), std::move(data));
    }
    case DType::u8: {
      if (bytes.size() != offset + count) throw Error("RRSE u8 payload size mismatch");
      std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                                     bytes.end());
      return LabelMap(std::move(shape), std::move(data));
    }
  }
  throw Error("unknown RRSE dtype " + std::to_string(dtype));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_file_bytes(path, encode_tensor(t));
}

void save_tensor(const std::filesystem::path& path, const LabelMap& t) {
  write_file_bytes(path, encode_tensor(t));
}

AnyTensor load_any_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

Tensor load_tensor(const std::filesystem::path& path) {
  AnyTensor any = load_any_tensor(path);
  if (auto* t = std::get_if<Tensor>(&any)) return std::move(*t);
  throw Error(path.string() + ": expected an f32 tensor");
}

LabelMap load_label_map(const std::filesystem::path& path) {
  AnyTensor any = load_any_tensor(path);
  if (auto* t = std::get_if<LabelMap>(&any)) return std::move(*t);
  throw Error(path.string() + ": expected a u8 label map");
}

}  // namespace rrse
