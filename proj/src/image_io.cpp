#include "dswater/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "dswater/error.hpp"

namespace dswater {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(Errc::io_failure, "write to '" + path.string() + "' failed");
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!token.empty()) break;
    } else {
      token.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return token;
}

struct Header {
  std::size_t width = 0;
  std::size_t height = 0;
};

Header read_header(std::istream& in, const std::string& magic, const std::filesystem::path& path) {
  const auto bad = [&](const std::string& why) {
    return Error(Errc::malformed_header, "'" + path.string() + "': " + why);
  };
  if (next_token(in) != magic) throw bad("expected magic " + magic);
  Header h;
  try {
    h.width = std::stoul(next_token(in));
    h.height = std::stoul(next_token(in));
    if (std::stoul(next_token(in)) != 255) throw bad("only maxval 255 is supported");
  } catch (const std::logic_error&) {
    throw bad("unreadable dimensions");
  }
  if (h.width == 0 || h.height == 0) throw bad("zero dimension");
  return h;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::uint8_t unit_to_byte(double v) noexcept {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(255.0 * v));
}

void write_pgm(const std::filesystem::path& path, const Grid<std::uint8_t>& image) {
  auto out = open_for_write(path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.values().data()),
            static_cast<std::streamsize>(image.size()));
  finish(out, path);
}

void write_ppm(const std::filesystem::path& path, const Grid<Rgb>& image) {
  auto out = open_for_write(path);
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.size() * 3);
  for (const Rgb& px : image.values()) {
    bytes.push_back(px.r);
    bytes.push_back(px.g);
    bytes.push_back(px.b);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  finish(out, path);
}

Grid<std::uint8_t> read_pgm(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const Header h = read_header(in, "P5", path);
  std::vector<std::uint8_t> data(h.width * h.height);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) {
    throw Error(Errc::payload_size, "'" + path.string() + "': truncated pixel data");
  }
  return Grid<std::uint8_t>(h.width, h.height, std::move(data));
}

Grid<Rgb> read_ppm(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const Header h = read_header(in, "P6", path);
  std::vector<std::uint8_t> bytes(h.width * h.height * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw Error(Errc::payload_size, "'" + path.string() + "': truncated pixel data");
  }
  Grid<Rgb> image(h.width, h.height);
  for (std::size_t i = 0; i < image.size(); ++i) {
    image[i] = Rgb{bytes[3 * i], bytes[3 * i + 1], bytes[3 * i + 2]};
  }
  return image;
}

}  // namespace dswater
