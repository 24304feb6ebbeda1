// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/image_io.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <cstring>
#include <jpeglib.h>

#include <csetjmp>
#include <fstream>
#include <string>

#include "pdbl/error.hpp"

namespace pdbl::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
  return f;
}

enum class Codec { kPng, kJpeg };

Codec sniff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  unsigned char head[8] = {};
  in.read(reinterpret_cast<char*>(head), 8);
  if (in.gcount() >= 8 && png_sig_cmp(head, 0, 8) == 0) return Codec::kPng;
  if (in.gcount() >= 2 && head[0] == 0xFF && head[1] == 0xD8) return Codec::kJpeg;
  throw FormatError("'" + path.string() + "' is neither PNG nor JPEG");
}

// ---------------------------------------------------------------------------
// PNG. libpng reports errors by longjmp; every call that can fail goes through
// a small wrapper with no C++ objects in scope across setjmp.

struct PngError {
  char message[256] = {};
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* err = static_cast<PngError*>(png_get_error_ptr(png));
  std::snprintf(err->message, sizeof(err->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

class PngReader final : public RowReader {
 public:
  explicit PngReader(const std::filesystem::path& path) : path_(path), file_(open_file(path, "rb")) {
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err_, png_error_fn, png_warning_fn);
    if (!png_) throw FormatError("png_create_read_struct failed");
    info_ = png_create_info_struct(png_);
    if (!info_) throw FormatError("png_create_info_struct failed");
    if (!read_header()) fail();
    if (interlaced_) {
      // Interlaced PNGs cannot be streamed row by row; decode them up front.
      buffer_.resize(static_cast<std::size_t>(width_) * height_ * 3);
      std::vector<png_bytep> rows(height_);
      for (int y = 0; y < height_; ++y) rows[y] = buffer_.data() + static_cast<std::size_t>(y) * width_ * 3;
      if (!read_all(rows.data())) fail();
    }
  }

  ~PngReader() override { png_destroy_read_struct(&png_, &info_, nullptr); }

  int width() const override { return width_; }
  int height() const override { return height_; }

  void read_row(std::span<std::uint8_t> out) override {
    if (next_ >= height_) throw FormatError("read past last row of '" + path_.string() + "'");
    if (out.size() != static_cast<std::size_t>(width_) * 3) throw InvalidArgument("row buffer size mismatch");
    if (interlaced_) {
      std::memcpy(out.data(), buffer_.data() + static_cast<std::size_t>(next_) * width_ * 3, out.size());
    } else if (!read_one(out.data())) {
      fail();
    }
    ++next_;
  }

 private:
  bool read_header() {
    if (setjmp(png_jmpbuf(png_))) return false;
    png_init_io(png_, file_.get());
    png_read_info(png_, info_);
    png_uint_32 w = 0, h = 0;
    int depth = 0, color = 0, interlace = 0;
    png_get_IHDR(png_, info_, &w, &h, &depth, &color, &interlace, nullptr, nullptr);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png_);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png_);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png_);
    if (depth == 16) png_set_strip_16(png_);
    if (png_get_valid(png_, info_, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png_);
    png_set_strip_alpha(png_);
    const int passes = png_set_interlace_handling(png_);
    png_read_update_info(png_, info_);
    width_ = static_cast<int>(w);
    height_ = static_cast<int>(h);
    interlaced_ = passes > 1;
    return png_get_rowbytes(png_, info_) == static_cast<png_size_t>(w) * 3;
  }

  bool read_one(png_bytep row) {
    if (setjmp(png_jmpbuf(png_))) return false;
    png_read_row(png_, row, nullptr);
    return true;
  }

  bool read_all(png_bytepp rows) {
    if (setjmp(png_jmpbuf(png_))) return false;
    png_read_image(png_, rows);
    return true;
  }

  [[noreturn]] void fail() {
    throw FormatError("PNG decode failed for '" + path_.string() + "': " +
                      (err_.message[0] ? err_.message : "unsupported pixel layout"));
  }

  std::filesystem::path path_;
  FilePtr file_;
  PngError err_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
  int width_ = 0;
  int height_ = 0;
  int next_ = 0;
  bool interlaced_ = false;
  std::vector<std::uint8_t> buffer_;
};

// ---------------------------------------------------------------------------
// JPEG

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = {};
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

class JpegReader final : public RowReader {
 public:
  explicit JpegReader(const std::filesystem::path& path) : path_(path), file_(open_file(path, "rb")) {
    cinfo_.err = jpeg_std_error(&err_.mgr);
    err_.mgr.error_exit = jpeg_error_exit;
    jpeg_create_decompress(&cinfo_);
    if (!start()) fail();
  }

  ~JpegReader() override { jpeg_destroy_decompress(&cinfo_); }

  int width() const override { return static_cast<int>(cinfo_.output_width); }
  int height() const override { return static_cast<int>(cinfo_.output_height); }

  void read_row(std::span<std::uint8_t> out) override {
    if (cinfo_.output_scanline >= cinfo_.output_height) {
      throw FormatError("read past last row of '" + path_.string() + "'");
    }
    if (out.size() != static_cast<std::size_t>(width()) * 3) throw InvalidArgument("row buffer size mismatch");
    if (!scan(out.data())) fail();
  }

 private:
  bool start() {
    if (setjmp(err_.jump)) return false;
    jpeg_stdio_src(&cinfo_, file_.get());
    jpeg_read_header(&cinfo_, TRUE);
    cinfo_.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo_);
    return cinfo_.output_components == 3;
  }

  bool scan(std::uint8_t* row) {
    if (setjmp(err_.jump)) return false;
    JSAMPROW rows[1] = {row};
    jpeg_read_scanlines(&cinfo_, rows, 1);
    return true;
  }

  [[noreturn]] void fail() {
    throw FormatError("JPEG decode failed for '" + path_.string() + "': " +
                      (err_.message[0] ? err_.message : "unsupported pixel layout"));
  }

  std::filesystem::path path_;
  FilePtr file_;
  JpegError err_;
  jpeg_decompress_struct cinfo_{};
};

class MemoryReader final : public RowReader {
 public:
  explicit MemoryReader(const Rgb8Image& img) : img_(img) {}
  int width() const override { return img_.width; }
  int height() const override { return img_.height; }
  void read_row(std::span<std::uint8_t> out) override {
    if (next_ >= img_.height) throw FormatError("read past last row of in-memory raster");
    const std::size_t stride = static_cast<std::size_t>(img_.width) * 3;
    if (out.size() != stride) throw InvalidArgument("row buffer size mismatch");
    std::memcpy(out.data(), img_.data.data() + next_ * stride, stride);
    ++next_;
  }

 private:
  const Rgb8Image& img_;
  int next_ = 0;
};

}  // namespace

std::unique_ptr<RowReader> open_rows(const std::filesystem::path& path) {
  if (sniff(path) == Codec::kPng) return std::make_unique<PngReader>(path);
  return std::make_unique<JpegReader>(path);
}

std::unique_ptr<RowReader> rows_of(const Rgb8Image& img) { return std::make_unique<MemoryReader>(img); }

Rgb8Image read_rgb(const std::filesystem::path& path) {
  auto reader = open_rows(path);
  Rgb8Image img{reader->width(), reader->height(), {}};
  const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
  img.data.resize(stride * img.height);
  for (int y = 0; y < img.height; ++y) {
    reader->read_row(std::span(img.data).subspan(y * stride, stride));
  }
  return img;
}

Image load_image(const std::filesystem::path& path) { return to_float(read_rgb(path)); }

// ---------------------------------------------------------------------------
// PNG writer

struct PngRowWriter::State {
  std::filesystem::path path;
  FilePtr file;
  PngError err;
  png_structp png = nullptr;
  png_infop info = nullptr;
  int width = 0;
  int height = 0;
  int rows_written = 0;
  int bytes_per_pixel = 3;
  bool finished = false;

  ~State() { png_destroy_write_struct(&png, &info); }

  [[noreturn]] void fail() {
    throw IoError("PNG encode failed for '" + path.string() + "': " + err.message);
  }
};

namespace {

bool png_write_header(png_structp png, png_infop info, std::FILE* f, int w, int h, int color,
                      const png_color* palette, int n_palette, const png_byte* trans, int n_trans) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, color,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (palette) png_set_PLTE(png, info, palette, n_palette);
  if (trans && n_trans > 0) png_set_tRNS(png, info, trans, n_trans, nullptr);
  png_write_info(png, info);
  return true;
}

bool png_write_one(png_structp png, png_const_bytep row) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_write_row(png, row);
  return true;
}

bool png_write_tail(png_structp png, png_infop info) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_write_end(png, info);
  return true;
}

}  // namespace

PngRowWriter::PngRowWriter(const std::filesystem::path& path, int width, int height)
    : PngRowWriter(path, width, height, std::span<const PaletteEntry>{}) {}

PngRowWriter::PngRowWriter(const std::filesystem::path& path, int width, int height,
                           std::span<const PaletteEntry> palette)
    : state_(std::make_unique<State>()) {
  if (width < 1 || height < 1) throw InvalidArgument("PNG dimensions must be positive");
  if (palette.size() > 256) throw InvalidArgument("PNG palette holds at most 256 entries");
  auto& s = *state_;
  s.path = path;
  s.width = width;
  s.height = height;
  s.file = open_file(path, "wb");
  s.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &s.err, png_error_fn, png_warning_fn);
  if (!s.png) throw IoError("png_create_write_struct failed");
  s.info = png_create_info_struct(s.png);
  if (!s.info) throw IoError("png_create_info_struct failed");

  std::vector<png_color> colors;
  std::vector<png_byte> trans;
  for (const auto& e : palette) {
    colors.push_back({e.r, e.g, e.b});
    trans.push_back(e.a);
  }
  while (!trans.empty() && trans.back() == 255) trans.pop_back();
  const bool indexed = !palette.empty();
  s.bytes_per_pixel = indexed ? 1 : 3;
  if (!png_write_header(s.png, s.info, s.file.get(), width, height,
                        indexed ? PNG_COLOR_TYPE_PALETTE : PNG_COLOR_TYPE_RGB,
                        indexed ? colors.data() : nullptr, static_cast<int>(colors.size()),
                        trans.empty() ? nullptr : trans.data(), static_cast<int>(trans.size()))) {
    s.fail();
  }
}

PngRowWriter::~PngRowWriter() = default;

void PngRowWriter::write_row(std::span<const std::uint8_t> row) {
  auto& s = *state_;
  if (s.rows_written >= s.height) throw InvalidArgument("PNG writer received too many rows");
  if (row.size() != static_cast<std::size_t>(s.width) * s.bytes_per_pixel) {
    throw InvalidArgument("PNG row size mismatch");
  }
  if (!png_write_one(s.png, row.data())) s.fail();
  ++s.rows_written;
}

void PngRowWriter::finish() {
  auto& s = *state_;
  if (s.finished) return;
  if (s.rows_written != s.height) throw InvalidArgument("PNG writer finished before all rows were written");
  if (!png_write_tail(s.png, s.info)) s.fail();
  s.finished = true;
  if (std::fflush(s.file.get()) != 0) throw IoError("flush failed for '" + s.path.string() + "'");
}

void write_png(const std::filesystem::path& path, const Rgb8Image& img) {
  PngRowWriter writer(path, img.width, img.height);
  const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
  for (int y = 0; y < img.height; ++y) {
    writer.write_row(std::span(img.data).subspan(y * stride, stride));
  }
  writer.finish();
}

namespace {

bool jpeg_encode(jpeg_compress_struct* cinfo, JpegError* err, std::FILE* f, const Rgb8Image* img,
                 int quality) {
  if (setjmp(err->jump)) return false;
  jpeg_stdio_dest(cinfo, f);
  cinfo->image_width = static_cast<JDIMENSION>(img->width);
  cinfo->image_height = static_cast<JDIMENSION>(img->height);
  cinfo->input_components = 3;
  cinfo->in_color_space = JCS_RGB;
  jpeg_set_defaults(cinfo);
  jpeg_set_quality(cinfo, quality, TRUE);
  jpeg_start_compress(cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(img->width) * 3;
  while (cinfo->next_scanline < cinfo->image_height) {
    JSAMPROW row[1] = {const_cast<JSAMPLE*>(img->data.data() + cinfo->next_scanline * stride)};
    jpeg_write_scanlines(cinfo, row, 1);
  }
  jpeg_finish_compress(cinfo);
  return true;
}

}  // namespace

void write_jpeg(const std::filesystem::path& path, const Rgb8Image& img, int quality) {
  if (img.width < 1 || img.height < 1) throw InvalidArgument("JPEG dimensions must be positive");
  auto file = open_file(path, "wb");
  JpegError err;
  jpeg_compress_struct cinfo{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  jpeg_create_compress(&cinfo);
  const bool ok = jpeg_encode(&cinfo, &err, file.get(), &img, quality);
  jpeg_destroy_compress(&cinfo);
  if (!ok) throw IoError("JPEG encode failed for '" + path.string() + "': " + err.message);
}

namespace {

bool png_read_indexed(png_structp png, png_infop info, std::FILE* f, png_uint_32* w, png_uint_32* h,
                      int* color, int* depth) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, f);
  png_read_info(png, info);
  png_get_IHDR(png, info, w, h, depth, color, nullptr, nullptr, nullptr);
  return true;
}

bool png_read_rows(png_structp png, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  return true;
}

}  // namespace

std::vector<std::uint8_t> read_png_indices(const std::filesystem::path& path, int& width, int& height) {
  auto file = open_file(path, "rb");
  PngError err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};
  if (!png || !info) throw FormatError("libpng initialisation failed");
  png_uint_32 w = 0, h = 0;
  int color = 0, depth = 0;
  if (!png_read_indexed(png, info, file.get(), &w, &h, &color, &depth)) {
    throw FormatError("PNG decode failed for '" + path.string() + "': " + err.message);
  }
  if (color != PNG_COLOR_TYPE_PALETTE || depth != 8) {
    throw FormatError("'" + path.string() + "' is not an 8-bit palette PNG");
  }
  width = static_cast<int>(w);
  height = static_cast<int>(h);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.data() + static_cast<std::size_t>(y) * w;
  if (!png_read_rows(png, rows.data())) {
    throw FormatError("PNG decode failed for '" + path.string() + "': " + err.message);
  }
  return out;
}

}  // namespace pdbl::io
