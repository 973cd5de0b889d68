#include "irae/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace irae {

Image clipped(const Image& image)
{
    Image out = image;
    for (auto& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

template <typename T>
Tensor<T> to_batch(std::span<const Image> images)
{
    if (images.empty()) throw Error("to_batch: no images");
    const Image& first = images.front();
    std::vector<T> data;
    data.reserve(images.size() * first.size());
    for (const auto& img : images) {
        if (!img.same_shape(first)) throw ShapeError("to_batch: images differ in shape");
        for (double v : img.data) data.push_back(static_cast<T>(v));
    }
    return Tensor<T>({images.size(), first.channels, first.height, first.width}, std::move(data));
}

template <typename T>
std::vector<Image> from_batch(const Tensor<T>& batch)
{
    if (batch.rank() != 4) throw ShapeError("from_batch: expected [N,C,H,W], got " + shape_string(batch.shape()));
    const auto& s = batch.shape();
    std::vector<Image> out;
    auto d = batch.data();
    const std::size_t per = s[1] * s[2] * s[3];
    for (std::size_t n = 0; n < s[0]; ++n) {
        Image img(s[1], s[2], s[3]);
        for (std::size_t i = 0; i < per; ++i) img.data[i] = static_cast<double>(d[n * per + i]);
        out.push_back(std::move(img));
    }
    return out;
}

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

    std::size_t next_number(const char* what)
    {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw FormatError(std::string("malformed PNM header: expected ") + what);
        }
        std::size_t value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (value > (1u << 30)) throw FormatError(std::string("PNM ") + what + " is too large");
            ++pos_;
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset()
    {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw FormatError("malformed PNM header: missing whitespace before raster");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments()
    {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const unsigned char> bytes_;
    std::size_t pos_ = 2;
};

std::string describe_magic(std::span<const unsigned char> bytes)
{
    std::ostringstream os;
    const std::size_t n = std::min<std::size_t>(bytes.size(), 2);
    if (n == 0) return "<empty file>";
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char b = bytes[i];
        if (std::isprint(b)) {
            os << static_cast<char>(b);
        } else {
            static const char* hex = "0123456789abcdef";
            os << "\\x" << hex[b >> 4] << hex[b & 15];
        }
    }
    return os.str();
}

}  // namespace

Image decode_pnm(std::span<const unsigned char> bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw FormatError("not a binary PGM/PPM file: magic bytes '" + describe_magic(bytes) + "'");
    }
    const std::size_t channels = bytes[1] == '5' ? 1 : 3;
    HeaderReader reader(bytes);
    const std::size_t width = reader.next_number("width");
    const std::size_t height = reader.next_number("height");
    const std::size_t maxval = reader.next_number("maxval");
    if (width == 0 || height == 0) throw FormatError("PNM image has zero size");
    if (maxval != 255) throw FormatError("only 8-bit PNM (maxval 255) is supported, got maxval " + std::to_string(maxval));
    const std::size_t offset = reader.raster_offset();
    const std::size_t needed = width * height * channels;
    if (bytes.size() < offset + needed) {
        throw FormatError("short PNM payload: expected " + std::to_string(needed) + " bytes, got " +
                          std::to_string(bytes.size() - std::min(bytes.size(), offset)));
    }
    Image img(channels, height, width);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
            for (std::size_t c = 0; c < channels; ++c) {
                img.at(c, y, x) = static_cast<double>(bytes[offset + (y * width + x) * channels + c]) / 255.0;
            }
    return img;
}

std::vector<unsigned char> encode_pnm(const Image& image)
{
    if (image.channels != 1 && image.channels != 3) {
        throw FormatError("PNM export needs 1 or 3 channels, got " + std::to_string(image.channels));
    }
    const std::string header = std::string(image.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(image.width) +
                               " " + std::to_string(image.height) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.reserve(header.size() + image.size());
    for (std::size_t y = 0; y < image.height; ++y)
        for (std::size_t x = 0; x < image.width; ++x)
            for (std::size_t c = 0; c < image.channels; ++c) {
                const double v = std::clamp(image.at(c, y, x), 0.0, 1.0);
                out.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
            }
    return out;
}

Image load_image(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open image " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_pnm(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_image(const Image& image, const std::filesystem::path& path)
{
    const auto bytes = encode_pnm(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

template Tensor<float> to_batch(std::span<const Image>);
template Tensor<double> to_batch(std::span<const Image>);
template std::vector<Image> from_batch(const Tensor<float>&);
template std::vector<Image> from_batch(const Tensor<double>&);

}  // namespace irae
