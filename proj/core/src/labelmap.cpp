#include "flame/labelmap.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "flame/error.hpp"

namespace flame {

ClassSet::ClassSet(int num_classes) : num_classes_(num_classes) {
  if (num_classes < 1 || num_classes > 255) {
    throw std::invalid_argument("num_classes must be in [1, 255], got " +
                                std::to_string(num_classes));
  }
}

LabelMap::LabelMap(int width, int height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 1 || height < 1) {
    throw Error("degenerate dimensions " + std::to_string(width) + "x" +
                std::to_string(height));
  }
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error("label map has " + std::to_string(values_.size()) + " values, expected " +
                std::to_string(static_cast<std::size_t>(width) * height));
  }
}

LabelMap::LabelMap(int width, int height, std::vector<std::uint8_t> values,
                   const ClassSet& classes)
    : LabelMap(width, height, std::move(values)) {
  validate_labels(*this, classes);
}

LabelMap LabelMap::filled(int width, int height, std::uint8_t value) {
  return LabelMap(width, height,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                static_cast<std::size_t>(std::max(height, 0)),
                                            value));
}

void validate_labels(const LabelMap& map, const ClassSet& classes) {
  const auto values = map.values();
  const auto bad = std::find_if(values.begin(), values.end(),
                                [&](std::uint8_t v) { return !classes.admits(v); });
  if (bad == values.end()) return;
  const auto offset = static_cast<std::size_t>(bad - values.begin());
  const auto w = static_cast<std::size_t>(map.width());
  std::ostringstream msg;
  msg << "class index out of range at (" << offset % w << "," << offset / w << "): value "
      << static_cast<int>(*bad) << " with " << classes.num_classes() << " classes";
  throw Error(msg.str());
}

namespace {

constexpr std::array<unsigned char, 8> kPngMagic = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

class PgmHeaderParser {
 public:
  explicit PgmHeaderParser(std::span<const std::byte> bytes) : bytes_(bytes) {}

  // Reads a decimal field, skipping whitespace and '#' comments before it.
  long field(const char* name) {
    skip_separators();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && is_digit(peek())) {
      value = value * 10 + (peek() - '0');
      if (value > std::numeric_limits<int>::max()) {
        throw Error(std::string("malformed PGM header: ") + name + " too large");
      }
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(std::string("malformed PGM header: missing ") + name);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the payload.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !is_space(peek())) {
      throw Error("malformed PGM header: no separator before payload");
    }
    return pos_ + 1;
  }

 private:
  char peek() const { return static_cast<char>(bytes_[pos_]); }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }

  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (is_space(peek())) {
        ++pos_;
      } else if (peek() == '#') {
        while (pos_ < bytes_.size() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 2;  // past "P5"
};

LabelMap decode_pgm(std::span<const std::byte> bytes, const ClassSet& classes) {
  PgmHeaderParser header(bytes);
  const long width = header.field("width");
  const long height = header.field("height");
  const long maxval = header.field("maxval");
  if (maxval != 255) {
    throw Error("unsupported bit depth: PGM maxval " + std::to_string(maxval) +
                ", expected 255");
  }
  const std::size_t offset = header.payload_offset();
  if (width < 1 || height < 1) {
    throw Error("degenerate dimensions " + std::to_string(width) + "x" + std::to_string(height));
  }
  const auto expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t available = bytes.size() - std::min(offset, bytes.size());
  if (available != expected) {
    throw Error("PGM payload has " + std::to_string(available) + " bytes, expected " +
                std::to_string(expected));
  }
  std::vector<std::uint8_t> values(expected);
  std::memcpy(values.data(), bytes.data() + offset, expected);
  return LabelMap(static_cast<int>(width), static_cast<int>(height), std::move(values), classes);
}

struct PngSource {
  std::span<const std::byte> bytes;
  std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->bytes.size() - src->pos < length) {
    png_error(png, "truncated PNG data");
  }
  std::memcpy(out, src->bytes.data() + src->pos, length);
  src->pos += length;
}

void png_raise(png_structp png, png_const_charp message) {
  auto* error = static_cast<std::string*>(png_get_error_ptr(png));
  *error = message;
  png_longjmp(png, 1);
}

void png_ignore_warning(png_structp, png_const_charp) {}

LabelMap decode_png(std::span<const std::byte> bytes, const ClassSet& classes) {
  std::string error;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_raise, png_ignore_warning);
  if (png == nullptr) throw Error("failed to initialise PNG decoder");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("failed to initialise PNG decoder");
  }

  PngSource source{bytes};
  std::vector<std::uint8_t> values;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  // Nothing with a non-trivial destructor may be created between setjmp and
  // the last libpng call below.
  std::vector<png_bytep> rows;
  int bit_depth = 0;
  int color_type = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("malformed PNG: " + error);
  }
  png_set_read_fn(png, &source, png_read_from_span);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);
  if (bit_depth != 8 || color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("unsupported bit depth: PNG must be 8-bit single-channel grayscale (bit depth " +
                std::to_string(bit_depth) + ", color type " + std::to_string(color_type) + ")");
  }
  if (width > static_cast<png_uint_32>(std::numeric_limits<int>::max()) ||
      height > static_cast<png_uint_32>(std::numeric_limits<int>::max())) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("PNG dimensions too large");
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  values.resize(static_cast<std::size_t>(width) * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = values.data() + static_cast<std::size_t>(y) * width;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  return LabelMap(static_cast<int>(width), static_cast<int>(height), std::move(values), classes);
}

}  // namespace

LabelMap decode_labelmap(std::span<const std::byte> bytes, const ClassSet& classes) {
  if (bytes.size() >= 2 && bytes[0] == std::byte{'P'} && bytes[1] == std::byte{'5'}) {
    return decode_pgm(bytes, classes);
  }
  if (bytes.size() >= kPngMagic.size() &&
      std::memcmp(bytes.data(), kPngMagic.data(), kPngMagic.size()) == 0) {
    return decode_png(bytes, classes);
  }
  throw Error("malformed header: not a binary PGM (P5) or PNG file");
}

LabelMap read_labelmap(const std::filesystem::path& path, const ClassSet& classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open label map " + path.string());
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return decode_labelmap(std::as_bytes(std::span(data.data(), data.size())), classes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string encode_pgm(const LabelMap& map) {
  if (map.empty()) throw Error("degenerate dimensions 0x0");
  std::string out = "P5\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) +
                    "\n255\n";
  const auto values = map.values();
  out.append(reinterpret_cast<const char*>(values.data()), values.size());
  return out;
}

void write_labelmap(const LabelMap& map, const std::filesystem::path& path) {
  const std::string bytes = encode_pgm(map);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write label map " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing label map " + path.string());
}

}  // namespace flame
