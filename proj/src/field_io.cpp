#include "mpe/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "json.hpp"

namespace mpe {

namespace {

static_assert(sizeof(double) == 8);

std::filesystem::path with_ext(const std::filesystem::path& base,
                               const char* ext) {
  auto p = base;
  p += ext;
  return p;
}

void put_le(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
    throw std::runtime_error("field binary truncated");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_field(const std::filesystem::path& base, const Field& f) {
  const auto& g = f.grid();
  const bool complex = f.kind() == ScalarKind::Complex;
  nlohmann::json meta = {{"dim", g.dim()},
                         {"n", g.n()},
                         {"length", g.length()},
                         {"origin", g.origin()},
                         {"components", f.components()},
                         {"scalar_kind", complex ? "complex" : "real"}};
  std::ofstream js(with_ext(base, ".json"));
  if (!js) throw std::runtime_error("cannot write " + with_ext(base, ".json").string());
  js << std::setw(2) << meta << '\n';

  std::ofstream bin(with_ext(base, ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + with_ext(base, ".bin").string());
  for (const auto& z : f.values()) {
    put_le(bin, z.real());
    if (complex) put_le(bin, z.imag());
  }
}

Field read_field(const std::filesystem::path& base) {
  std::ifstream js(with_ext(base, ".json"));
  if (!js) throw std::runtime_error("cannot read " + with_ext(base, ".json").string());
  const auto meta = nlohmann::json::parse(js);
  const int dim = meta.at("dim").get<int>();
  const int n = meta.at("n").get<int>();
  const double length = meta.at("length").get<double>();
  const double origin = meta.value("origin", 0.0);
  const int components = meta.value("components", 1);
  const auto kind_str = meta.at("scalar_kind").get<std::string>();
  if (kind_str != "real" && kind_str != "complex") {
    throw std::runtime_error("unknown scalar_kind '" + kind_str + "'");
  }
  const auto kind = kind_str == "complex" ? ScalarKind::Complex : ScalarKind::Real;
  auto grid = make_grid(dim, n, length, origin);
  Field f(grid, kind, components);

  std::ifstream bin(with_ext(base, ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + with_ext(base, ".bin").string());
  for (auto& z : f.values()) {
    const double re = get_le(bin);
    const double im = kind == ScalarKind::Complex ? get_le(bin) : 0.0;
    z = Complex(re, im);
  }
  if (bin.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("field binary has trailing data");
  }
  return f;
}

void write_field_csv(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  const auto& g = f.grid();
  const bool complex = f.kind() == ScalarKind::Complex;
  os << "x";
  if (g.dim() == 2) os << ",y";
  for (int c = 0; c < f.components(); ++c) {
    const std::string suffix =
        f.components() == 1 ? "" : "_" + std::to_string(c);
    if (complex) {
      os << ",value" << suffix << "_re,value" << suffix << "_im";
    } else {
      os << ",value" << suffix;
    }
  }
  os << '\n' << std::setprecision(17);
  const int n = g.n();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.dim() == 1) {
      os << g.coordinate(static_cast<int>(k));
    } else {
      os << g.coordinate(static_cast<int>(k / n)) << ','
         << g.coordinate(static_cast<int>(k % n));
    }
    for (int c = 0; c < f.components(); ++c) {
      const auto z = f.component(c)[k];
      os << ',' << z.real();
      if (complex) os << ',' << z.imag();
    }
    os << '\n';
  }
}

}  // namespace mpe
