#include "pcqa/view_dump.hpp"

#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <png.h>
#include <vector>

#include "pcqa/error.hpp"

namespace pcqa {

void write_png(const RgbImage& image, const std::string& path) {
  if (image.rows <= 0 || image.cols <= 0) throw InputError("cannot write an empty image");

  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw InputError("cannot write '" + path + "'");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw InternalError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw InputError("libpng failed writing '" + path + "'");
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols),
               static_cast<png_uint_32>(image.rows), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(image.rows));
  for (int r = 0; r < image.rows; ++r) {
    row_ptrs[static_cast<std::size_t>(r)] = reinterpret_cast<png_bytep>(
        const_cast<Rgb8*>(&image.px[static_cast<std::size_t>(r) * image.cols]));
  }
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_pgm(const MaskImage& mask, const std::string& path) {
  if (mask.rows <= 0 || mask.cols <= 0) throw InputError("cannot write an empty mask");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << "P5\n" << mask.cols << " " << mask.rows << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(mask.cols));
  for (int r = 0; r < mask.rows; ++r) {
    for (int c = 0; c < mask.cols; ++c) {
      row[static_cast<std::size_t>(c)] = mask.at(r, c) ? 255 : 0;
    }
    out.write(reinterpret_cast<const char*>(row.data()), mask.cols);
  }
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace pcqa
