#include "synthpipe/io/blob.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "synthpipe/core/errors.hpp"

namespace synthpipe {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ofstream& os, T v) {
  unsigned char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::ifstream& is) {
  unsigned char b[sizeof(T)];
  is.read(reinterpret_cast<char*>(b), sizeof(T));
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
  return v;
}

std::size_t shape_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

const TensorBlob::Entry& TensorBlob::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw ParseError("checkpoint tensor missing: " + name);
  return it->second;
}

void TensorBlob::put(const std::string& name, std::vector<int> shape,
                     std::vector<float> values) {
  if (shape_count(shape) != values.size()) {
    throw ShapeError("tensor '" + name + "': shape does not match value count");
  }
  tensors[name] = Entry{std::move(shape), std::move(values)};
}

void save_blob(const std::filesystem::path& path, const TensorBlob& blob) {
  nlohmann::json header;
  header["meta"] = blob.meta;
  nlohmann::json index = nlohmann::json::object();
  for (const auto& [name, entry] : blob.tensors) index[name] = entry.shape;
  header["tensors"] = index;
  const std::string header_str = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot create checkpoint: " + path.string());
  os.write(kMagic, 4);
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint64_t>(os, header_str.size());
  os.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const auto& [name, entry] : blob.tensors) {
    os.write(reinterpret_cast<const char*>(entry.values.data()),
             static_cast<std::streamsize>(entry.values.size() * sizeof(float)));
  }
  if (!os) throw IoError("short checkpoint write: " + path.string());
}

TensorBlob load_blob(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("bad checkpoint magic: " + path.string());
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version in " + path.string());
  }
  const auto header_len = get_le<std::uint64_t>(is);
  if (!is || header_len > (1ull << 30)) throw ParseError("bad checkpoint header length");
  std::string header_str(header_len, '\0');
  is.read(header_str.data(), static_cast<std::streamsize>(header_len));
  nlohmann::json header = nlohmann::json::parse(header_str, nullptr, false);
  if (header.is_discarded()) throw ParseError("bad checkpoint header JSON");

  TensorBlob blob;
  blob.meta = header.value("meta", nlohmann::json::object());
  for (const auto& [name, shape_json] : header.at("tensors").items()) {
    TensorBlob::Entry entry;
    entry.shape = shape_json.get<std::vector<int>>();
    entry.values.resize(shape_count(entry.shape));
    is.read(reinterpret_cast<char*>(entry.values.data()),
            static_cast<std::streamsize>(entry.values.size() * sizeof(float)));
    if (!is) throw ParseError("truncated checkpoint payload: " + path.string());
    blob.tensors.emplace(name, std::move(entry));
  }
  return blob;
}

}  // namespace synthpipe
