#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "irae/model.hpp"

namespace irae {

/*
 * Checkpoint layout, all integers little-endian:
 *
 *   offset  size  field
 *        0     4  magic "IRAE"
 *        4     4  u32 format version (1)
 *        8     4  u32 K (flow steps per level)
 *       12     4  u32 L (levels)
 *       16     4  u32 hidden width
 *       20     4  u32 input channels
 *       24     1  u8 precision (0 = f32, 1 = f64)
 *       25     1  u8 ActNorms initialized (0/1)
 *       26     2  reserved, zero
 *       28     8  u64 seed
 *       36     8  u64 parameter count
 *       44   w*n  parameters in IraeModel::parameters() order: IEEE-754
 *                  binary32 (w = 4) for f32 models, binary64 (w = 8) for f64
 */
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderSize = 44;

// Bytes per stored parameter value.
std::size_t checkpoint_value_size(Precision precision);

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(const IraeModel<T>& model);

// Reads only the config block.
IraeConfig read_checkpoint_config(std::span<const std::uint8_t> bytes);

// The model's config comes from the bytes, whatever the caller expected.
template <typename T>
IraeModel<T> deserialize_checkpoint(std::span<const std::uint8_t> bytes);

template <typename T>
void save_checkpoint(const IraeModel<T>& model, const std::filesystem::path& path);

IraeConfig read_checkpoint_config(const std::filesystem::path& path);

template <typename T>
IraeModel<T> load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace irae
