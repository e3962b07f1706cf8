#include "spseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "spseg/errors.hpp"

namespace spseg {
namespace {

/// Decoded raster before interpretation: interleaved samples in [0, maxval].
struct RawRaster {
    int width = 0;
    int height = 0;
    int channels = 0;
    int maxval = 0;
    std::vector<std::uint16_t> samples;
};

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("cannot read " + path.string());
    return bytes;
}

bool has_png_extension(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png";
}

// ---- Netpbm ----------------------------------------------------------------

class PnmHeaderReader {
public:
    PnmHeaderReader(const std::vector<unsigned char>& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

    int next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw FormatError("malformed PNM header");
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_++] - '0');
            if (value > 1'000'000'000L) throw FormatError("PNM header value out of range");
        }
        return static_cast<int>(value);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw FormatError("malformed PNM header");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
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

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_;
};

RawRaster decode_pnm(const std::vector<unsigned char>& bytes) {
    const char kind = static_cast<char>(bytes[1]);
    RawRaster r;
    r.channels = kind == '6' ? 3 : 1;
    PnmHeaderReader header(bytes, 2);
    r.width = header.next_int();
    r.height = header.next_int();
    r.maxval = header.next_int();
    const std::size_t start = header.raster_start();
    if (r.width < 1 || r.height < 1) throw FormatError("PNM image has zero size");
    if (r.maxval < 1 || r.maxval > 65535) throw FormatError("PNM maxval out of range");

    const std::size_t count = static_cast<std::size_t>(r.width) * r.height * r.channels;
    const std::size_t bytes_per_sample = r.maxval < 256 ? 1 : 2;
    if (bytes.size() < start + count * bytes_per_sample) throw FormatError("truncated PNM raster");

    r.samples.resize(count);
    const unsigned char* p = bytes.data() + start;
    for (std::size_t i = 0; i < count; ++i) {
        std::uint16_t v = bytes_per_sample == 1 ? p[i] : static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
        if (v > r.maxval) throw FormatError("PNM sample exceeds maxval");
        r.samples[i] = v;
    }
    return r;
}

void write_pnm(const std::filesystem::path& path, char kind, int width, int height, int maxval,
               const std::vector<std::uint16_t>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << 'P' << kind << '\n' << width << ' ' << height << '\n' << maxval << '\n';
    std::vector<unsigned char> raster;
    raster.reserve(samples.size() * (maxval < 256 ? 1 : 2));
    for (auto v : samples) {
        if (maxval >= 256) raster.push_back(static_cast<unsigned char>(v >> 8));
        raster.push_back(static_cast<unsigned char>(v & 0xFF));
    }
    out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!out) throw IoError("cannot write " + path.string());
}

// ---- PNG -------------------------------------------------------------------

struct PngMemorySource {
    const std::vector<unsigned char>* bytes;
    std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
    auto* src = static_cast<PngMemorySource*>(png_get_io_ptr(png));
    if (src->pos + length > src->bytes->size()) png_error(png, "truncated PNG stream");
    std::copy_n(src->bytes->data() + src->pos, length, out);
    src->pos += length;
}

void png_silent_warning(png_structp, png_const_charp) {}

class PngReader {
public:
    PngReader() {
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_silent_warning);
        if (png_) info_ = png_create_info_struct(png_);
        if (!png_ || !info_) throw Error("libpng initialization failed");
    }
    ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;

    png_structp png() const { return png_; }
    png_infop info() const { return info_; }

private:
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

// All objects with destructors live outside the setjmp frame.
bool decode_png_into(PngReader& reader, PngMemorySource& src, RawRaster& out,
                     std::vector<unsigned char>& buffer, std::vector<png_bytep>& rows) {
    png_structp png = reader.png();
    png_infop info = reader.info();
    if (setjmp(png_jmpbuf(png))) return false;

    png_set_read_fn(png, &src, png_read_from_memory);
    png_read_info(png, info);
    const int color_type = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    const int out_depth = png_get_bit_depth(png, info);
    out.maxval = out_depth == 16 ? 65535 : 255;

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * out.height);
    rows.resize(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + rowbytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return true;
}

RawRaster decode_png(const std::vector<unsigned char>& bytes) {
    PngReader reader;
    PngMemorySource src{&bytes, 0};
    RawRaster r;
    std::vector<unsigned char> buffer;
    std::vector<png_bytep> rows;
    if (!decode_png_into(reader, src, r, buffer, rows)) throw FormatError("malformed PNG stream");
    if (r.channels != 1 && r.channels != 3) throw FormatError("unsupported PNG channel layout");

    const std::size_t count = static_cast<std::size_t>(r.width) * r.height * r.channels;
    r.samples.resize(count);
    if (r.maxval == 255) {
        std::copy_n(buffer.data(), count, r.samples.begin());
    } else {
        for (std::size_t i = 0; i < count; ++i)
            r.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    }
    return r;
}

class PngWriter {
public:
    explicit PngWriter(const std::filesystem::path& path) {
        fp_ = std::fopen(path.string().c_str(), "wb");
        if (!fp_) throw IoError("cannot open " + path.string() + " for writing");
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_silent_warning);
        if (png_) info_ = png_create_info_struct(png_);
        if (!png_ || !info_) throw Error("libpng initialization failed");
    }
    ~PngWriter() {
        png_destroy_write_struct(&png_, &info_);
        if (fp_) std::fclose(fp_);
    }
    PngWriter(const PngWriter&) = delete;
    PngWriter& operator=(const PngWriter&) = delete;

    FILE* file() const { return fp_; }
    png_structp png() const { return png_; }
    png_infop info() const { return info_; }

    bool close() {
        const bool ok = std::fclose(fp_) == 0;
        fp_ = nullptr;
        return ok;
    }

private:
    FILE* fp_ = nullptr;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

bool encode_png_into(PngWriter& writer, int width, int height, int depth, int color_type,
                     std::vector<png_bytep>& rows) {
    png_structp png = writer.png();
    png_infop info = writer.info();
    if (setjmp(png_jmpbuf(png))) return false;
    png_init_io(png, writer.file());
    png_set_IHDR(png, info, width, height, depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    return true;
}

void write_png(const std::filesystem::path& path, int width, int height, int channels, int maxval,
               const std::vector<std::uint16_t>& samples) {
    const int depth = maxval < 256 ? 8 : 16;
    const int bytes_per_sample = depth / 8;
    const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * bytes_per_sample;
    std::vector<unsigned char> buffer(rowbytes * height);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (bytes_per_sample == 1) {
            buffer[i] = static_cast<unsigned char>(samples[i]);
        } else {
            buffer[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
            buffer[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xFF);
        }
    }
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = buffer.data() + rowbytes * y;

    PngWriter writer(path);
    const int color_type = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    if (!encode_png_into(writer, width, height, depth, color_type, rows) || !writer.close())
        throw IoError("cannot write " + path.string());
}

// ---- dispatch --------------------------------------------------------------

RawRaster read_raster(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin())) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) return decode_pnm(bytes);
    throw FormatError("unsupported image encoding: " + path.string());
}

void write_raster(const std::filesystem::path& path, int width, int height, int channels, int maxval,
                  const std::vector<std::uint16_t>& samples) {
    if (has_png_extension(path)) {
        write_png(path, width, height, channels, maxval, samples);
    } else {
        write_pnm(path, channels == 3 ? '6' : '5', width, height, maxval, samples);
    }
}

std::uint16_t to_byte(double v) {
    return static_cast<std::uint16_t>(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
    const RawRaster raw = read_raster(path);
    RasterImage img(raw.width, raw.height);
    const double maxval = raw.maxval;
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            const std::size_t src = raw.channels == 3 ? 3 * i + c : i;
            img.data[3 * i + c] = raw.samples[src] / maxval;
        }
    }
    return img;
}

void save_image(const RasterImage& img, const std::filesystem::path& path) {
    std::vector<std::uint16_t> samples(img.data.size());
    std::transform(img.data.begin(), img.data.end(), samples.begin(), to_byte);
    write_raster(path, img.width, img.height, 3, 255, samples);
}

BinaryMask load_mask(const std::filesystem::path& path) {
    const RawRaster raw = read_raster(path);
    BinaryMask mask(raw.width, raw.height);
    const double threshold = raw.maxval / 2.0;
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
        double v = 0.0;
        for (int c = 0; c < raw.channels; ++c) v += raw.samples[raw.channels * i + c];
        mask.data[i] = v / raw.channels > threshold ? 1 : 0;
    }
    return mask;
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    std::vector<std::uint16_t> samples(mask.data.size());
    std::transform(mask.data.begin(), mask.data.end(), samples.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint16_t>(v ? 255 : 0); });
    write_raster(path, mask.width, mask.height, 1, 255, samples);
}

void save_label_map(const LabelMap& lm, const std::filesystem::path& path) {
    if (lm.num_labels > 65536) throw OverflowError("label map has more than 65536 labels");
    std::vector<std::uint16_t> samples(lm.data.size());
    for (std::size_t i = 0; i < lm.data.size(); ++i) {
        const auto id = lm.data[i];
        if (id < 0 || id > 65535) throw OverflowError("label id does not fit in 16 bits");
        samples[i] = static_cast<std::uint16_t>(id);
    }
    write_raster(path, lm.width, lm.height, 1, 65535, samples);
}

LabelMap load_label_map(const std::filesystem::path& path) {
    const RawRaster raw = read_raster(path);
    if (raw.channels != 1) throw FormatError("label map must be single-channel: " + path.string());
    LabelMap lm(raw.width, raw.height);
    std::copy(raw.samples.begin(), raw.samples.end(), lm.data.begin());
    compact_labels(lm);
    return lm;
}

}  // namespace spseg
