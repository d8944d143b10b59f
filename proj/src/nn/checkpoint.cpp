#include "trajnav/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_map>

namespace trajnav::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'T', 'R', 'A', 'J', 'N', 'A', 'V', '\0'};

template <typename V>
void put(std::ostream& os, V value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(V));
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename V>
V get(std::istream& is, const std::string& what) {
  V value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(V))) {
    throw CheckpointError("checkpoint truncated while reading " + what);
  }
  return value;
}

std::string get_string(std::istream& is, const std::string& what) {
  const auto n = get<std::uint32_t>(is, what);
  if (n > (1u << 20)) throw CheckpointError("checkpoint: implausible " + what + " length");
  std::string s(n, '\0');
  if (!is.read(s.data(), n)) throw CheckpointError("checkpoint truncated while reading " + what);
  return s;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const ParameterList<float>& params,
                      std::uint64_t config_hash) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kCheckpointFormat);
  put_string(os, kSubstrateVersion);
  put<std::uint64_t>(os, config_hash);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_string(os, p.name);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.tensor.rank()));
    for (std::size_t d : p.tensor.shape()) put<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(p.tensor.data().data()),
             static_cast<std::streamsize>(p.tensor.numel() * sizeof(float)));
  }
  if (!os) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file: " + path.string());
  }
  Checkpoint ckpt;
  ckpt.format = get<std::uint32_t>(is, "format");
  if (ckpt.format != kCheckpointFormat) {
    throw CheckpointError("unsupported checkpoint format " + std::to_string(ckpt.format));
  }
  ckpt.substrate = get_string(is, "substrate version");
  ckpt.config_hash = get<std::uint64_t>(is, "config hash");
  const auto count = get<std::uint32_t>(is, "tensor count");
  ckpt.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    StoredTensor t;
    t.name = get_string(is, "tensor name");
    const auto rank = get<std::uint32_t>(is, "rank");
    if (rank > 8) throw CheckpointError("checkpoint: tensor '" + t.name + "' has rank " + std::to_string(rank));
    for (std::uint32_t r = 0; r < rank; ++r) t.shape.push_back(get<std::uint64_t>(is, "dimension"));
    t.values.resize(numel_of(t.shape));
    if (!is.read(reinterpret_cast<char*>(t.values.data()),
                 static_cast<std::streamsize>(t.values.size() * sizeof(float)))) {
      throw CheckpointError("checkpoint truncated in tensor '" + t.name + "'");
    }
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void load_into(const Checkpoint& ckpt, const ParameterList<float>& params, bool strict) {
  std::unordered_map<std::string, const StoredTensor*> by_name;
  for (const auto& t : ckpt.tensors) by_name.emplace(t.name, &t);
  if (strict && by_name.size() != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(by_name.size()) +
                          " tensors, model has " + std::to_string(params.size()));
  }
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw CheckpointError("checkpoint lacks parameter '" + p.name + "'");
    if (it->second->shape != p.tensor.shape()) {
      throw CheckpointError("checkpoint parameter '" + p.name + "' has shape " +
                            to_string(it->second->shape) + ", model expects " +
                            to_string(p.tensor.shape()));
    }
    Tensor<float> target = p.tensor;
    std::copy(it->second->values.begin(), it->second->values.end(), target.mutable_data().begin());
  }
}

}  // namespace trajnav::nn
