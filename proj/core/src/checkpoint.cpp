#include "asmlp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <boost/crc.hpp>

namespace asmlp {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O writes host floats directly and assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'A', 'S', 'M', 'L', 'P', 'C', 'K', '1'};

class Writer {
 public:
  template <class U>
  void put(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
  }
  void put_raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <class U>
  U get() {
    need(sizeof(U));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += sizeof(U);
    return static_cast<U>(v);
  }
  void get_raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint: truncated file");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Checkpoint::put(std::string name, AnyTensor value) {
  for (auto& t : tensors) {
    if (t.name == name) {
      t.value = std::move(value);
      return;
    }
  }
  tensors.push_back(NamedTensor{std::move(name), std::move(value)});
}

const AnyTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.value;
  }
  return nullptr;
}

template <std::floating_point T>
Tensor<T> Checkpoint::get(const std::string& name) const {
  const AnyTensor* t = find(name);
  if (!t) throw CheckpointError("checkpoint: missing tensor '" + name + "'");
  return std::visit([](const auto& v) { return v.template cast<T>(); }, *t);
}

double Checkpoint::scalar(const std::string& name) const {
  const Tensor<double> t = get<double>(name);
  if (t.numel() != 1) throw CheckpointError("checkpoint: '" + name + "' is not a scalar");
  return t[0];
}

template Tensor<float> Checkpoint::get(const std::string&) const;
template Tensor<double> Checkpoint::get(const std::string&) const;

std::uint64_t crc64(std::span<const std::uint8_t> bytes) {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL, true,
                     true>
      crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.put_raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(ckpt.version);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& nt : ckpt.tensors) {
    if (nt.name.size() > 0xFFFF) throw CheckpointError("checkpoint: name too long: " + nt.name);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(nt.name.size()));
    w.put_raw(nt.name.data(), nt.name.size());
    std::visit(
        [&](const auto& t) {
          using T = typename std::decay_t<decltype(t)>::value_type;
          if (t.is_meta() || t.empty()) {
            throw CheckpointError("checkpoint: tensor '" + nt.name + "' has no data");
          }
          if (t.rank() > 255) throw CheckpointError("checkpoint: rank too large");
          w.put<std::uint8_t>(std::is_same_v<T, float> ? 1 : 2);
          w.put<std::uint8_t>(static_cast<std::uint8_t>(t.rank()));
          for (std::size_t d : t.dims()) {
            if (d > 0xFFFFFFFFull) throw CheckpointError("checkpoint: dimension too large");
            w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
          }
          w.put_raw(t.raw(), t.numel() * sizeof(T));
        },
        nt.value);
  }
  const std::uint64_t crc = crc64(w.bytes());
  w.put<std::uint64_t>(crc);
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) + 16 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("checkpoint: bad magic bytes");
  }
  const auto body = bytes.first(bytes.size() - 8);
  Reader tail(bytes.subspan(bytes.size() - 8));
  if (crc64(body) != tail.get<std::uint64_t>()) throw CheckpointError("checkpoint: CRC mismatch");

  Reader r(body);
  char magic[8];
  r.get_raw(magic, sizeof(magic));
  Checkpoint ckpt;
  ckpt.version = r.get<std::uint32_t>();
  if (ckpt.version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(ckpt.version));
  }
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name(r.get<std::uint16_t>(), '\0');
    r.get_raw(name.data(), name.size());
    const auto dtype = r.get<std::uint8_t>();
    const auto rank = r.get<std::uint8_t>();
    Shape dims(rank);
    for (auto& d : dims) d = r.get<std::uint32_t>();
    auto read = [&]<class T>(std::type_identity<T>) {
      Tensor<T> t(dims);
      r.get_raw(t.raw(), t.numel() * sizeof(T));
      return t;
    };
    if (dtype == 1) {
      ckpt.tensors.push_back({std::move(name), read(std::type_identity<float>{})});
    } else if (dtype == 2) {
      ckpt.tensors.push_back({std::move(name), read(std::type_identity<double>{})});
    } else {
      throw CheckpointError("checkpoint: unknown dtype code " + std::to_string(dtype));
    }
  }
  if (r.pos() != body.size()) throw CheckpointError("checkpoint: trailing bytes before checksum");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace asmlp
