#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace synthpipe {

/// Ordered map of named float32 tensors plus a JSON metadata object.
/// Backs every on-disk checkpoint (GAN, classifier, backbone).
struct TensorBlob {
  struct Entry {
    std::vector<int> shape;
    std::vector<float> values;
  };

  nlohmann::json meta;
  std::map<std::string, Entry> tensors;

  bool has(const std::string& name) const { return tensors.count(name) > 0; }
  const Entry& at(const std::string& name) const;
  void put(const std::string& name, std::vector<int> shape, std::vector<float> values);
};

void save_blob(const std::filesystem::path& path, const TensorBlob& blob);
TensorBlob load_blob(const std::filesystem::path& path);

}  // namespace synthpipe
