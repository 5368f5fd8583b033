#include "dtrbench/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dtrbench/random.hpp"

namespace dtrbench::nn {
namespace {

constexpr char kMagic[8] = {'D', 'T', 'R', 'N', 'N', 'C', 'K', '\0'};
constexpr std::uint64_t kMaxLayerWidth = 1u << 20;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void raw(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_params(const DenseNet& net) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(net.layer_sizes().size()));
  for (std::size_t s : net.layer_sizes()) put_u64(out, s);
  for (const DenseLayer& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) put_f64(out, l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) put_f64(out, l.bias(r));
  }
  put_u64(out, fnv1a64(out));
  return out;
}

DenseNet decode_params(const std::string& bytes,
                       const std::optional<std::vector<std::size_t>>& expected_sizes) {
  if (bytes.size() < sizeof(kMagic) + 8 + 8) throw FormatError("checkpoint too short");
  std::uint64_t stored_sum = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    stored_sum |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[bytes.size() - 8 + i]))
                  << (8 * i);
  }
  if (fnv1a64(std::string_view(bytes.data(), bytes.size() - 8)) != stored_sum) {
    throw FormatError("checkpoint checksum mismatch (file corrupted)");
  }

  Reader in(bytes);
  char magic[8];
  in.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw FormatError("not a dtrbench checkpoint");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t n_sizes = in.u32();
  if (n_sizes < 2 || n_sizes > 64) throw FormatError("implausible layer count in checkpoint");
  std::vector<std::size_t> sizes(n_sizes);
  for (auto& s : sizes) {
    const std::uint64_t v = in.u64();
    if (v == 0 || v > kMaxLayerWidth) throw FormatError("implausible layer width in checkpoint");
    s = static_cast<std::size_t>(v);
  }
  if (expected_sizes && *expected_sizes != sizes) {
    std::ostringstream msg;
    msg << "checkpoint layer sizes [";
    for (std::size_t i = 0; i < sizes.size(); ++i) msg << (i ? "," : "") << sizes[i];
    msg << "] do not match expected [";
    for (std::size_t i = 0; i < expected_sizes->size(); ++i)
      msg << (i ? "," : "") << (*expected_sizes)[i];
    msg << "]";
    throw CheckpointMismatch(msg.str());
  }

  DenseNet net(sizes);
  auto& layers = net.mutable_layers();
  for (DenseLayer& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = in.f64();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = in.f64();
  }
  if (in.position() + 8 != bytes.size()) throw FormatError("checkpoint has trailing bytes");
  if (!net.all_finite()) throw FormatError("checkpoint contains non-finite parameters");
  return net;
}

void save_params(const DenseNet& net, const std::filesystem::path& path) {
  const std::string bytes = encode_params(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

DenseNet load_params(const std::filesystem::path& path,
                     const std::optional<std::vector<std::size_t>>& expected_sizes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_params(ss.str(), expected_sizes);
}

}  // namespace dtrbench::nn
