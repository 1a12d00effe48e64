#include "synthpipe/io/spf_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "synthpipe/core/errors.hpp"

namespace synthpipe {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'F', '1'};

void put_u32(std::ofstream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_spf(const std::filesystem::path& path, const MatF& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot create frame file: " + path.string());
  os.write(kMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(img.rows()));
  put_u32(os, static_cast<std::uint32_t>(img.cols()));
  put_u32(os, 0);
  os.write(reinterpret_cast<const char*>(img.data()),
           static_cast<std::streamsize>(img.size() * sizeof(float)));
  if (!os) throw IoError("short write: " + path.string());
}

MatF read_spf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open frame file: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("bad SPF1 magic: " + path.string());
  }
  const std::uint32_t h = get_u32(is);
  const std::uint32_t w = get_u32(is);
  get_u32(is);  // reserved
  if (!is || h == 0 || w == 0 || h > (1u << 20) || w > (1u << 20)) {
    throw ParseError("bad SPF1 header: " + path.string());
  }
  MatF img(static_cast<int>(h), static_cast<int>(w));
  is.read(reinterpret_cast<char*>(img.data()),
          static_cast<std::streamsize>(img.size() * sizeof(float)));
  if (!is) throw ParseError("truncated SPF1 payload: " + path.string());
  return img;
}

}  // namespace synthpipe
