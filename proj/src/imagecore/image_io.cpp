#include "gateseed/imagecore/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "gateseed/common/errors.hpp"

namespace gateseed::imagecore {
namespace {

std::string lower_extension(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
int read_pnm_int(std::istream& in, const std::string& path) {
    char ch = 0;
    while (in.get(ch)) {
        if (ch == '#') {
            std::string discard;
            std::getline(in, discard);
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            break;
        }
    }
    if (!in || !std::isdigit(static_cast<unsigned char>(ch))) throw IoError(path, "malformed PNM header");
    int value = ch - '0';
    while (in.get(ch) && std::isdigit(static_cast<unsigned char>(ch))) value = value * 10 + (ch - '0');
    return value;
}

}  // namespace

Image read_png(const std::string& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw IoError(path, std::string("cannot read PNG: ") + png.message);
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw IoError(path, "cannot decode PNG: " + msg);
    }
    return Image(static_cast<int>(png.width), static_cast<int>(png.height), channels, std::move(buffer));
}

void write_png(const std::string& path, const Image& img) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width());
    png.height = static_cast<png_uint_32>(img.height());
    png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, img.data().data(), 0, nullptr))
        throw IoError(path, std::string("cannot write PNG: ") + png.message);
}

Image read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw IoError(path, "not a binary PGM/PPM file");
    const int channels = magic[1] == '5' ? 1 : 3;
    const int width = read_pnm_int(in, path);
    const int height = read_pnm_int(in, path);
    const int maxval = read_pnm_int(in, path);
    if (maxval != 255) throw IoError(path, "only maxval 255 is supported");
    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * channels);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (in.gcount() != static_cast<std::streamsize>(data.size())) throw IoError(path, "truncated pixel data");
    return Image(width, height, channels, std::move(data));
}

void write_pnm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << (img.channels() == 1 ? "P5" : "P6") << '\n'
        << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()),
              static_cast<std::streamsize>(img.data().size()));
    if (!out) throw IoError(path, "write failed");
}

Image read_image(const std::string& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
    throw IoError(path, "unsupported image extension '" + ext + "'");
}

void write_image(const std::string& path, const Image& img) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") return write_png(path, img);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return write_pnm(path, img);
    throw IoError(path, "unsupported image extension '" + ext + "'");
}

}  // namespace gateseed::imagecore
