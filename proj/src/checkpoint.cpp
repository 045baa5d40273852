#include "clir/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "clir/error.hpp"

namespace clir {

namespace {

constexpr char kMagic[] = "CLIRCKPT v1";

void put_f64_le(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

double get_f64_le(std::istream& in) {
  char buf[8];
  in.read(buf, 8);
  if (in.gcount() != 8) throw ParseError("checkpoint: truncated value block");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string read_text_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(std::string("checkpoint: missing ") + what);
  return line;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << kMagic << '\n';
  out << model.config().to_json() << '\n';
  for (const auto& [name, p] : model.params()) {
    out << name << ' ' << 2 << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
    for (Eigen::Index r = 0; r < p.value.rows(); ++r)
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) put_f64_le(out, p.value(r, c));
  }
  if (!out) throw IoError("failed while writing " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  if (read_text_line(in, "magic line") != kMagic)
    throw ParseError("checkpoint: bad magic, expected " + std::string(kMagic));
  Model model(ModelConfig::from_json(read_text_line(in, "config line")));

  // parameters must appear in lexicographic name order, one block each
  for (auto& [expected, p] : model.params()) {
    std::string header;
    if (!std::getline(in, header))
      throw ParseError("checkpoint: missing parameter " + expected);
    std::istringstream hs(header);
    std::string name;
    int ndim = 0;
    if (!(hs >> name >> ndim))
      throw ParseError("checkpoint: malformed parameter header: " + header);
    if (name != expected)
      throw ParseError("checkpoint: expected parameter " + expected + ", found " + name);
    if (ndim != 2)
      throw ParseError("checkpoint: parameter " + name + " must have 2 dimensions");
    Eigen::Index rows = 0, cols = 0;
    if (!(hs >> rows >> cols))
      throw ParseError("checkpoint: malformed dimensions for " + name);
    std::string rest;
    if (hs >> rest)
      throw ParseError("checkpoint: trailing tokens in header for " + name);
    if (p.value.rows() != rows || p.value.cols() != cols) {
      std::ostringstream msg;
      msg << "checkpoint: shape mismatch for " << name << ": expected "
          << p.value.rows() << "x" << p.value.cols() << ", found " << rows << "x" << cols;
      throw ParseError(msg.str());
    }
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) p.value(r, c) = get_f64_le(in);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw ParseError("checkpoint: trailing data after last parameter");
  return model;
}

}  // namespace clir
