#include "coocnet/error.hpp"
#include "coocnet/imaging.hpp"

// jpeglib.h expects size_t and FILE to be declared first.
#include <cstddef>
#include <cstdio>
#include <cstdlib>

#include <jpeglib.h>

#include <csetjmp>
#include <memory>
#include <string>

namespace coocnet::imaging {

namespace {

// libjpeg reports fatal errors through error_exit, which must not return.
// All state touched between setjmp and a possible longjmp lives on the heap
// behind a pointer that is never reassigned, so nothing is left indeterminate.
struct ErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = {};
};

[[noreturn]] void on_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<ErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Corrupt-data warnings (truncation, bad Huffman codes) are promoted to errors.
void on_emit_message(j_common_ptr cinfo, int msg_level) {
  if (msg_level < 0) on_error_exit(cinfo);
}

struct DecodeState {
  jpeg_decompress_struct cinfo{};
  ErrorManager err;
  bool created = false;
  std::vector<std::uint8_t> pixels;
  ~DecodeState() {
    if (created) jpeg_destroy_decompress(&cinfo);
  }
};

struct EncodeState {
  jpeg_compress_struct cinfo{};
  ErrorManager err;
  bool created = false;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  ~EncodeState() {
    if (created) jpeg_destroy_compress(&cinfo);
    std::free(buffer);
  }
};

void install_error_handlers(ErrorManager& err, jpeg_error_mgr*& slot) {
  slot = jpeg_std_error(&err.pub);
  err.pub.error_exit = on_error_exit;
  err.pub.emit_message = on_emit_message;
}

}  // namespace

PixelImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  const auto state = std::make_unique<DecodeState>();
  install_error_handlers(state->err, state->cinfo.err);
  if (setjmp(state->err.jump)) {
    throw Error(Errc::CorruptImage, std::string("jpeg: ") + state->err.message);
  }
  jpeg_create_decompress(&state->cinfo);
  state->created = true;
  jpeg_mem_src(&state->cinfo, const_cast<unsigned char*>(bytes.data()),
               static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&state->cinfo, TRUE);

  const J_COLOR_SPACE source = state->cinfo.jpeg_color_space;
  if (source != JCS_GRAYSCALE && source != JCS_YCbCr && source != JCS_RGB) {
    throw Error(Errc::UnsupportedFormat, "jpeg color space is not gray, YCbCr or RGB");
  }
  state->cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&state->cinfo);

  const auto width = state->cinfo.output_width;
  const auto height = state->cinfo.output_height;
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  state->pixels.resize(stride * height);
  while (state->cinfo.output_scanline < height) {
    JSAMPROW row = state->pixels.data() + stride * state->cinfo.output_scanline;
    jpeg_read_scanlines(&state->cinfo, &row, 1);
  }
  jpeg_finish_decompress(&state->cinfo);
  return PixelImage(static_cast<int>(width), static_cast<int>(height), std::move(state->pixels));
}

std::vector<std::uint8_t> encode_jpeg(const PixelImage& img, int quality) {
  if (quality < 1 || quality > 100) {
    throw Error(Errc::InvalidConfig, "jpeg quality must be in [1, 100], got " + std::to_string(quality));
  }
  if (img.empty()) throw Error(Errc::EncodeFailure, "cannot encode an empty image");

  const auto state = std::make_unique<EncodeState>();
  install_error_handlers(state->err, state->cinfo.err);
  if (setjmp(state->err.jump)) {
    throw Error(Errc::EncodeFailure, std::string("jpeg: ") + state->err.message);
  }
  jpeg_create_compress(&state->cinfo);
  state->created = true;
  jpeg_mem_dest(&state->cinfo, &state->buffer, &state->size);

  auto& cinfo = state->cinfo;
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  cinfo.dct_method = JDCT_ISLOW;
  cinfo.optimize_coding = FALSE;
  // Luma 2x2, chroma 1x1: 4:2:0.
  cinfo.comp_info[0].h_samp_factor = 2;
  cinfo.comp_info[0].v_samp_factor = 2;
  cinfo.comp_info[1].h_samp_factor = 1;
  cinfo.comp_info[1].v_samp_factor = 1;
  cinfo.comp_info[2].h_samp_factor = 1;
  cinfo.comp_info[2].v_samp_factor = 1;

  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(img.width()) * 3;
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(img.data().data() + stride * cinfo.next_scanline);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  return std::vector<std::uint8_t>(state->buffer, state->buffer + state->size);
}

std::string jpeg_codec_identity() {
  std::string id = "libjpeg";
#ifdef LIBJPEG_TURBO_VERSION
#define COOCNET_STR2(x) #x
#define COOCNET_STR(x) COOCNET_STR2(x)
  id += "-turbo " COOCNET_STR(LIBJPEG_TURBO_VERSION);
#undef COOCNET_STR
#undef COOCNET_STR2
#endif
  id += " (api " + std::to_string(JPEG_LIB_VERSION) +
        "); baseline; 4:2:0; Annex K tables with libjpeg quality scaling; islow DCT";
  return id;
}

}  // namespace coocnet::imaging
