#include "odebc/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "odebc/errors.hpp"

namespace odebc {

namespace {

constexpr char kMagic[] = {'O', 'D', 'B', 'C', '1'};
constexpr std::size_t kMagicSize = sizeof(kMagic);
constexpr std::uint32_t kMaxRank = 8;

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts are not supported");

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const std::size_t pos = out.size();
  out.resize(pos + sizeof(T));
  std::memcpy(out.data() + pos, &v, sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (in.size() - pos < sizeof(T)) throw IoError("tensor file is truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  std::vector<std::uint8_t> out(kMagic, kMagic + kMagicSize);
  const auto& dims = t.shape().dims;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put<std::uint32_t>(out, d);
  for (double v : t.values()) put<double>(out, v);
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagicSize || !std::equal(kMagic, kMagic + kMagicSize, bytes.begin()))
    throw IoError("not an ODBC1 tensor file (bad magic)");
  std::size_t pos = kMagicSize;
  const auto rank = get<std::uint32_t>(bytes, pos);
  if (rank == 0 || rank > kMaxRank) throw IoError("tensor file has invalid rank " + std::to_string(rank));
  std::vector<std::uint32_t> dims(rank);
  std::size_t n = 1;
  for (auto& d : dims) {
    d = get<std::uint32_t>(bytes, pos);
    n *= d;
  }
  if ((bytes.size() - pos) / sizeof(double) < n) throw IoError("tensor file is truncated");
  if (bytes.size() - pos != n * sizeof(double)) throw IoError("tensor file has trailing bytes");
  std::vector<double> values(n);
  if (n) std::memcpy(values.data(), bytes.data() + pos, n * sizeof(double));
  return Tensor(Shape(std::move(dims)), std::move(values));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const Tensor& t, double lo, double hi) {
  require(hi > lo, "pgm: hi must exceed lo");
  const auto& sh = t.shape();
  const std::size_t H = sh.height(), W = sh.width(), C = sh.channels();
  std::ostringstream os;
  os << "P5\n" << W << ' ' << H << "\n255\n";
  std::string body(H * W, '\0');
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c) {
      const double v = (t[(r * W + c) * C] - lo) / (hi - lo) * 255.0;
      const double q = std::isfinite(v) ? std::clamp(std::round(v), 0.0, 255.0) : 0.0;
      body[r * W + c] = static_cast<char>(static_cast<unsigned char>(q));
    }
  write_text(path, os.str() + body);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace odebc
