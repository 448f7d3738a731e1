#ifndef DTTPLUS_DATASET_HPP
#define DTTPLUS_DATASET_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dttplus {

// Residual dataset: n x n signed 16-bit blocks with a mode label each.
// Binary layout: magic "DTTP", version u16, n u16, count u32, mode table
// (u16 count, then length-prefixed labels), per-block mode index u16, then
// count * n^2 little-endian i16 samples.
struct ResidualDataset {
  int n = 0;
  std::vector<std::string> mode_names;
  std::vector<int> mode_of_block;
  std::vector<Eigen::Matrix<std::int16_t, Eigen::Dynamic, Eigen::Dynamic>> blocks;
  std::string source_tag;
};

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = (unsigned char)((std::uint64_t(std::make_unsigned_t<T>(v)) >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) throw std::runtime_error("truncated dataset file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(buf[i]) << (8 * i);
  return T(std::make_unsigned_t<T>(v));
}

}  // namespace detail

inline void save_dataset(const ResidualDataset& d, const std::string& path) {
  if (d.blocks.empty()) throw std::invalid_argument("refusing to save empty dataset");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write("DTTP", 4);
  detail::put<std::uint16_t>(os, 1);  // version
  detail::put<std::uint16_t>(os, std::uint16_t(d.n));
  detail::put<std::uint32_t>(os, std::uint32_t(d.blocks.size()));
  detail::put<std::uint16_t>(os, std::uint16_t(d.mode_names.size()));
  for (const auto& m : d.mode_names) {
    detail::put<std::uint16_t>(os, std::uint16_t(m.size()));
    os.write(m.data(), std::streamsize(m.size()));
  }
  for (std::size_t b = 0; b < d.blocks.size(); ++b)
    detail::put<std::uint16_t>(os, std::uint16_t(d.mode_of_block[b]));
  for (const auto& blk : d.blocks)
    for (int c = 0; c < d.n; ++c)
      for (int r = 0; r < d.n; ++r) detail::put<std::int16_t>(os, blk(r, c));
  if (!os) throw std::runtime_error("write failure on " + path);
}

inline ResidualDataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "DTTP", 4) != 0)
    throw std::runtime_error("bad magic in " + path);
  const auto version = detail::get<std::uint16_t>(is);
  if (version != 1) throw std::runtime_error("unsupported dataset version");
  ResidualDataset d;
  d.n = detail::get<std::uint16_t>(is);
  const auto count = detail::get<std::uint32_t>(is);
  if (count == 0) throw std::runtime_error("empty dataset");
  const auto n_modes = detail::get<std::uint16_t>(is);
  for (int m = 0; m < n_modes; ++m) {
    const auto len = detail::get<std::uint16_t>(is);
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw std::runtime_error("truncated dataset file");
    d.mode_names.push_back(std::move(s));
  }
  d.mode_of_block.resize(count);
  for (std::uint32_t b = 0; b < count; ++b) {
    const auto m = detail::get<std::uint16_t>(is);
    if (m >= n_modes) throw std::runtime_error("mode index out of range");
    d.mode_of_block[b] = m;
  }
  d.blocks.resize(count);
  for (auto& blk : d.blocks) {
    blk.resize(d.n, d.n);
    for (int c = 0; c < d.n; ++c)
      for (int r = 0; r < d.n; ++r) blk(r, c) = detail::get<std::int16_t>(is);
  }
  d.source_tag = path;
  return d;
}

struct SynthModel {
  double rho_r = 0.9;          // correlation along rows
  double rho_c = 0.9;          // correlation along columns
  double boundary_decay = 0.4; // variance at the predicted boundary; 1 = stationary
  double sigma = 22.0;
  int n = 8;
  int count = 1000;
  std::uint64_t seed = 0;
};

namespace detail {

// Box-Muller on the raw mt19937_64 stream, so the generated samples do not
// depend on the standard library's distribution internals.
class Gauss {
 public:
  explicit Gauss(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    have_ = true;
    return r * std::cos(t);
  }

 private:
  double uniform() { return double(rng_() >> 11) / 9007199254740992.0; }
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_ = false;
};

}  // namespace detail

// Separable AR(1) Gaussian residual fields with a variance ramp away from the
// predicted boundary (first row/column have lower variance).
inline ResidualDataset synth_residuals(const SynthModel& m,
                                       const std::string& mode_name = "synthetic") {
  if (m.n < 2 || m.count < 1) throw std::invalid_argument("bad synth model size");
  const int n = m.n;
  auto ar1_chol = [n](double rho) {
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C(i, j) = std::pow(rho, std::abs(i - j));
    return Eigen::MatrixXd(C.llt().matrixL());
  };
  const Eigen::MatrixXd Br = ar1_chol(m.rho_r);
  const Eigen::MatrixXd Bc = ar1_chol(m.rho_c);
  Eigen::VectorXd ramp(n);
  for (int i = 0; i < n; ++i)
    ramp(i) = std::sqrt(m.boundary_decay + (1.0 - m.boundary_decay) * i / double(n - 1));

  detail::Gauss g(m.seed);
  ResidualDataset d;
  d.n = n;
  d.mode_names = {mode_name};
  d.source_tag = "synthetic";
  d.blocks.reserve(m.count);
  for (int b = 0; b < m.count; ++b) {
    Eigen::MatrixXd Z(n, n);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) Z(r, c) = g();
    Eigen::MatrixXd X = Bc * Z * Br.transpose();
    X = (ramp * ramp.transpose()).cwiseProduct(X) * m.sigma;
    Eigen::Matrix<std::int16_t, Eigen::Dynamic, Eigen::Dynamic> blk(n, n);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) {
        const double v = std::nearbyint(X(r, c));
        blk(r, c) = std::int16_t(std::clamp(v, -32768.0, 32767.0));
      }
    d.blocks.push_back(std::move(blk));
    d.mode_of_block.push_back(0);
  }
  return d;
}

inline std::vector<Eigen::MatrixXd> blocks_as_double(const ResidualDataset& d,
                                                     int mode = -1) {
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t b = 0; b < d.blocks.size(); ++b)
    if (mode < 0 || d.mode_of_block[b] == mode)
      out.push_back(d.blocks[b].cast<double>());
  return out;
}

// Concatenation keeping mode labels; sizes must agree.
inline ResidualDataset merge_datasets(const std::vector<ResidualDataset>& parts) {
  if (parts.empty()) throw std::invalid_argument("nothing to merge");
  ResidualDataset out;
  out.n = parts[0].n;
  out.source_tag = "merged";
  for (const auto& p : parts) {
    if (p.n != out.n) throw std::invalid_argument("block size mismatch in merge");
    const int base = int(out.mode_names.size());
    for (const auto& m : p.mode_names) out.mode_names.push_back(m);
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      out.blocks.push_back(p.blocks[b]);
      out.mode_of_block.push_back(base + p.mode_of_block[b]);
    }
  }
  return out;
}

}  // namespace dttplus

#endif  // DTTPLUS_DATASET_HPP
