#include "renyivmc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "renyivmc/ansatz_factory.hpp"

namespace rvmc {

namespace {

constexpr char kMagic[8] = {'R', 'V', 'M', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_double_le(std::ostream& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b, 8);
}

double read_double_le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const DensityAnsatz& ansatz,
                     const ParameterVector& params, const nlohmann::json& seed_lineage) {
  ansatz.check_params(params);
  nlohmann::json header;
  header["ansatz"] = ansatz_to_json(ansatz);
  header["parameter_count"] = params.size();
  header["seed_lineage"] = seed_lineage;
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(header_str.size()));
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (double x : params) write_double_le(out, x);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path.string());
  }
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t header_len = read_u32(in);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), header_len);
  const nlohmann::json header = nlohmann::json::parse(header_str);

  Checkpoint ckpt;
  ckpt.ansatz = make_ansatz(header.at("ansatz"));
  ckpt.seed_lineage = header.value("seed_lineage", nlohmann::json::object());
  const std::size_t count = header.at("parameter_count").get<std::size_t>();
  if (count != ckpt.ansatz->parameter_count()) {
    throw std::runtime_error("checkpoint parameter count does not match its ansatz");
  }
  ckpt.params.resize(count);
  for (std::size_t i = 0; i < count; ++i) ckpt.params[i] = read_double_le(in);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
  return ckpt;
}

}  // namespace rvmc
