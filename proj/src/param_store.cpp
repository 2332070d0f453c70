#include "ide/param_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace ide {

namespace {

constexpr char kMagic[8] = {'I', 'D', 'E', 'P', 'A', 'R', 'M', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_doubles(std::ostream& out, const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(m(r, c));
      write_u64(out, bits);
    }
  }
}

Matrix read_doubles(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      m(r, c) = std::bit_cast<double>(read_u64(in));
    }
  }
  return m;
}

}  // namespace

NodePtr ParamStore::create(const std::string& name, Matrix init) {
  if (params_.count(name)) {
    throw ContractError("ParamStore: duplicate parameter '" + name + "'");
  }
  auto node = constant(std::move(init));
  params_.emplace(name, node);
  return node;
}

NodePtr ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw ContractError("ParamStore: unknown parameter '" + name + "'");
  }
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [_, p] : params_) p->zero_grad();
}

void ParamStore::sgd_step(double lr) {
  for (auto& [_, p] : params_) p->value -= lr * p->grad;
}

void ParamStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, seed_);
  write_u64(out, params_.size());
  for (const auto& [name, p] : params_) {
    write_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(out, static_cast<std::uint64_t>(p->value.rows()));
    write_u64(out, static_cast<std::uint64_t>(p->value.cols()));
    write_doubles(out, p->value);
  }
  if (!out) throw CheckpointError("write failed: " + path);
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw CheckpointError("bad checkpoint magic: " + path);
  }
  ParamStore store(read_u64(in));
  std::uint64_t count = read_u64(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t name_len = read_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    auto rows = static_cast<Eigen::Index>(read_u64(in));
    auto cols = static_cast<Eigen::Index>(read_u64(in));
    store.create(name, read_doubles(in, rows, cols));
    if (!in) throw CheckpointError("truncated checkpoint: " + path);
  }
  return store;
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols,
                      Eigen::Index fan_in, Eigen::Index fan_out,
                      std::mt19937_64& rng) {
  double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

}  // namespace ide
