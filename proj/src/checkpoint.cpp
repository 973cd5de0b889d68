#include "irae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace irae {

namespace {

constexpr std::uint8_t kMagic[4] = {'I', 'R', 'A', 'E'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset)
{
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[offset + i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t offset)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
    return v;
}

struct Header {
    IraeConfig config;
    bool initialized;
    std::uint64_t count;
};

Header parse_header(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("not an IRAE checkpoint (bad magic bytes)");
    }
    if (bytes.size() < kCheckpointHeaderSize) {
        throw FormatError("truncated checkpoint: header needs " + std::to_string(kCheckpointHeaderSize) +
                          " bytes, file has " + std::to_string(bytes.size()));
    }
    const auto version = get_u32(bytes, 4);
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    }
    Header h;
    h.config.flow_steps = get_u32(bytes, 8);
    h.config.levels = get_u32(bytes, 12);
    h.config.hidden_width = get_u32(bytes, 16);
    h.config.in_channels = get_u32(bytes, 20);
    if (bytes[24] > 1) throw FormatError("checkpoint has unknown precision code " + std::to_string(bytes[24]));
    h.config.precision = static_cast<Precision>(bytes[24]);
    if (bytes[25] > 1) throw FormatError("checkpoint has invalid initialized flag");
    h.initialized = bytes[25] == 1;
    h.config.seed = get_u64(bytes, 28);
    h.count = get_u64(bytes, 36);
    try {
        h.config.validate();
    } catch (const Error& e) {
        throw FormatError(std::string("checkpoint config rejected: ") + e.what());
    }
    if (h.count != param_count(h.config)) {
        throw FormatError("checkpoint parameter count " + std::to_string(h.count) + " does not match its config (" +
                          std::to_string(param_count(h.config)) + ")");
    }
    const std::uint64_t expected = kCheckpointHeaderSize + checkpoint_value_size(h.config.precision) * h.count;
    if (bytes.size() < expected) {
        throw FormatError("truncated checkpoint: expected " + std::to_string(expected) + " bytes, got " +
                          std::to_string(bytes.size()));
    }
    if (bytes.size() > expected) {
        throw FormatError("checkpoint has " + std::to_string(bytes.size() - expected) + " trailing bytes");
    }
    return h;
}

}  // namespace

std::size_t checkpoint_value_size(Precision precision) { return precision == Precision::f64 ? 8 : 4; }

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(const IraeModel<T>& model)
{
    const auto& c = model.config();
    const auto params = model.parameters();
    std::uint64_t count = 0;
    for (const auto& p : params) count += p.numel();

    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.reserve(kCheckpointHeaderSize + checkpoint_value_size(c.precision) * count);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(c.flow_steps));
    put_u32(out, static_cast<std::uint32_t>(c.levels));
    put_u32(out, static_cast<std::uint32_t>(c.hidden_width));
    put_u32(out, static_cast<std::uint32_t>(c.in_channels));
    out.push_back(static_cast<std::uint8_t>(c.precision));
    out.push_back(model.initialized() ? 1 : 0);
    out.push_back(0);
    out.push_back(0);
    put_u64(out, c.seed);
    put_u64(out, count);
    for (const auto& p : params) {
        for (T v : p.data()) {
            if (c.precision == Precision::f64) {
                put_u64(out, std::bit_cast<std::uint64_t>(static_cast<double>(v)));
            } else {
                put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
            }
        }
    }
    return out;
}

IraeConfig read_checkpoint_config(std::span<const std::uint8_t> bytes)
{
    return parse_header(bytes).config;
}

template <typename T>
IraeModel<T> deserialize_checkpoint(std::span<const std::uint8_t> bytes)
{
    const auto header = parse_header(bytes);
    IraeModel<T> model(header.config);
    std::size_t offset = kCheckpointHeaderSize;
    for (auto& p : model.parameters()) {
        for (auto& v : p.mutable_data()) {
            if (header.config.precision == Precision::f64) {
                v = static_cast<T>(std::bit_cast<double>(get_u64(bytes, offset)));
                offset += 8;
            } else {
                v = static_cast<T>(std::bit_cast<float>(get_u32(bytes, offset)));
                offset += 4;
            }
        }
    }
    if (header.initialized) model.mark_initialized();
    return model;
}

template <typename T>
void save_checkpoint(const IraeModel<T>& model, const std::filesystem::path& path)
{
    write_file_bytes(path, serialize_checkpoint(model));
}

IraeConfig read_checkpoint_config(const std::filesystem::path& path)
{
    const auto bytes = read_file_bytes(path);
    return read_checkpoint_config(std::span<const std::uint8_t>(bytes));
}

template <typename T>
IraeModel<T> load_checkpoint(const std::filesystem::path& path)
{
    const auto bytes = read_file_bytes(path);
    try {
        return deserialize_checkpoint<T>(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string() + " for reading");
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

template std::vector<std::uint8_t> serialize_checkpoint(const IraeModel<float>&);
template std::vector<std::uint8_t> serialize_checkpoint(const IraeModel<double>&);
template IraeModel<float> deserialize_checkpoint(std::span<const std::uint8_t>);
template IraeModel<double> deserialize_checkpoint(std::span<const std::uint8_t>);
template void save_checkpoint(const IraeModel<float>&, const std::filesystem::path&);
template void save_checkpoint(const IraeModel<double>&, const std::filesystem::path&);
template IraeModel<float> load_checkpoint(const std::filesystem::path&);
template IraeModel<double> load_checkpoint(const std::filesystem::path&);

}  // namespace irae
