#include "qmeta/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace qmeta::nn {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}

void put_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& ckpt) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  std::string blob;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const auto& [name, m] : ckpt.params) {
    const std::size_t offset = blob.size();
    for (double v : m.values()) put_le(blob, v);
    tensors.push_back({{"name", name},
                       {"shape", {m.rows(), m.cols()}},
                       {"offset", offset},
                       {"byte_len", blob.size() - offset}});
  }
  nlohmann::ordered_json manifest;
  manifest["global_step"] = ckpt.global_step;
  manifest["config_hash"] = ckpt.config_hash;
  manifest["blob"] = with_suffix(stem, ".bin").filename().string();
  manifest["metadata"] = ckpt.metadata;
  manifest["tensors"] = std::move(tensors);

  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + with_suffix(stem, ".bin").string());
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream js(with_suffix(stem, ".json"));
  if (!js) throw std::runtime_error("cannot write " + with_suffix(stem, ".json").string());
  js << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& stem) {
  std::ifstream js(with_suffix(stem, ".json"));
  if (!js) throw std::runtime_error("checkpoint manifest not found: " + with_suffix(stem, ".json").string());
  const auto manifest = nlohmann::json::parse(js);
  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("checkpoint blob not found: " + with_suffix(stem, ".bin").string());
  const std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

  Checkpoint ckpt;
  ckpt.global_step = manifest.at("global_step").get<long>();
  ckpt.config_hash = manifest.at("config_hash").get<std::string>();
  if (manifest.contains("metadata")) ckpt.metadata = manifest["metadata"].get<std::map<std::string, std::string>>();
  for (const auto& t : manifest.at("tensors")) {
    const auto rows = t.at("shape").at(0).get<std::size_t>();
    const auto cols = t.at("shape").at(1).get<std::size_t>();
    const auto offset = t.at("offset").get<std::size_t>();
    const auto len = t.at("byte_len").get<std::size_t>();
    if (len != rows * cols * 8 || offset + len > blob.size())
      throw std::runtime_error("checkpoint tensor " + t.at("name").get<std::string>() + " is out of bounds");
    Matrix m(rows, cols);
    const auto* p = reinterpret_cast<const unsigned char*>(blob.data()) + offset;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = get_le(p + 8 * i);
    ckpt.params.add(t.at("name").get<std::string>(), std::move(m));
  }
  return ckpt;
}

bool checkpoint_exists(const std::filesystem::path& stem) {
  return std::filesystem::exists(with_suffix(stem, ".json")) && std::filesystem::exists(with_suffix(stem, ".bin"));
}

}  // namespace qmeta::nn
