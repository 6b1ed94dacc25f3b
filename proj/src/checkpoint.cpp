#include "bcnn/checkpoint.hpp"

#include "bcnn/errors.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace bcnn {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'B', 'C', 'N', 'N'};

class Writer {
public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw IntegrityError("checkpoint truncated at byte " + std::to_string(pos_));
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t narrow(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError(std::string("checkpoint: ") + what + " does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(v);
}

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint) {
  const ModelConfig& config = checkpoint.config;
  validate(config);
  if (config.input_channels != 1) {
    throw ConfigError("checkpoint format stores single-channel models only");
  }
  Writer w;
  w.raw(kMagic.data(), kMagic.size());
  w.u32(checkpoint.version);
  w.u32(config.input_size);
  w.u32(narrow(config.channels.size(), "channel list"));
  for (std::uint32_t c : config.channels) {
    w.u32(c);
  }
  w.u32(config.classes);
  w.u32(config.seed);
  w.u32(narrow(checkpoint.params.size(), "tensor count"));
  for (const auto& entry : checkpoint.params) {
    w.u32(narrow(entry.name.size(), "tensor name"));
    w.raw(entry.name.data(), entry.name.size());
    w.u32(narrow(entry.value.rank(), "rank"));
    for (std::size_t e : entry.value.shape()) {
      w.u32(narrow(e, "extent"));
    }
    for (float v : entry.value.data()) {
      w.f32(v);
    }
  }
  w.u32(checkpoint.train_seed);
  w.u32(checkpoint.epoch);
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() ||
      !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("not a checkpoint: bad magic bytes");
  }
  Reader r(bytes.subspan(kMagic.size()));
  Checkpoint ck;
  ck.version = r.u32();
  if (ck.version != kCheckpointVersion) {
    throw VersionError("checkpoint version " + std::to_string(ck.version) +
                       " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  ck.config.input_size = r.u32();
  const std::uint32_t stages = r.u32();
  if (stages > 64) {
    throw IntegrityError("checkpoint declares " + std::to_string(stages) + " stages");
  }
  ck.config.channels.resize(stages);
  for (auto& c : ck.config.channels) {
    c = r.u32();
  }
  ck.config.classes = r.u32();
  ck.config.seed = r.u32();
  ck.config.input_channels = 1;

  std::vector<ParameterSpec> layout;
  try {
    layout = parameter_layout(ck.config);
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("checkpoint config is invalid: ") + e.what());
  }

  const std::uint32_t count = r.u32();
  if (count != layout.size()) {
    throw IntegrityError("checkpoint holds " + std::to_string(count) +
                         " tensors; its config implies " + std::to_string(layout.size()));
  }
  for (const auto& spec : layout) {
    const std::uint32_t name_len = r.u32();
    const auto name_bytes = r.raw(name_len);
    std::string name(name_bytes.begin(), name_bytes.end());
    const std::uint32_t rank = r.u32();
    if (rank < 1 || rank > 4) {
      throw IntegrityError("tensor '" + name + "' has invalid rank " + std::to_string(rank));
    }
    Shape shape(rank);
    for (auto& e : shape) {
      e = r.u32();
    }
    if (name != spec.name || shape != spec.shape) {
      throw IntegrityError("tensor '" + name + "' " + shape_to_string(shape) +
                           " does not match expected '" + spec.name + "' " +
                           shape_to_string(spec.shape));
    }
    std::vector<float> data(shape_elements(shape));
    for (float& v : data) {
      v = r.f32();
    }
    ck.params.add(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (r.remaining() == 8) {
    ck.train_seed = r.u32();
    ck.epoch = r.u32();
  } else if (r.remaining() != 0) {
    throw IntegrityError("checkpoint has " + std::to_string(r.remaining()) +
                         " unexpected trailing bytes");
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write checkpoint " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("short write to " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

} // namespace bcnn
