#include "supcar/gridio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace supcar {

namespace {

constexpr const char* kMagic = "# supcar-lab grid";

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw GridParseError(line, "not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

// 17 significant digits
struct Num {
  char buf[32];
  std::size_t len;
  explicit Num(double v) : len(static_cast<std::size_t>(std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17).ptr - buf)) {}
  friend std::ostream& operator<<(std::ostream& os, const Num& n) { return os.write(n.buf, n.len); }
};

}  // namespace

GridParseError::GridParseError(std::size_t l, const std::string& msg)
    : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}

void write_grid_csv(const FieldGrid& g, std::ostream& out) {
  g.validate();
  out << kMagic << " d=" << g.d << " n=" << g.n << " h=" << Num(g.h) << " seed=" << g.provenance.seed << "\n";
  if (g.d == 1) {
    out << "x,value\n";
    for (int i = 0; i < g.n; ++i) out << Num(g.coord(i)) << "," << Num(g.values[i]) << "\n";
    return;
  }
  out << "x,y,value\n";
  for (int i = 0; i < g.n; ++i) {
    const Num x(g.coord(i));
    for (int j = 0; j < g.n; ++j)
      out << x << "," << Num(g.coord(j)) << "," << Num(g.values[static_cast<std::size_t>(i) * g.n + j]) << "\n";
  }
}

void write_grid_csv(const FieldGrid& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_grid_csv(g, out);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

FieldGrid read_grid_csv(std::istream& in) {
  std::string line;
  std::size_t ln = 1;
  if (!std::getline(in, line)) throw GridParseError(1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind(kMagic, 0) != 0) throw GridParseError(1, "missing '# supcar-lab grid' header");
  FieldGrid g;
  bool have_d = false, have_n = false, have_h = false, have_seed = false;
  std::istringstream hs(line.substr(std::string(kMagic).size()));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw GridParseError(1, "malformed header field '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      std::size_t used = 0;
      if (key == "d") {
        g.d = std::stoi(val, &used);
        have_d = true;
      } else if (key == "n") {
        g.n = std::stoi(val, &used);
        have_n = true;
      } else if (key == "h") {
        g.h = parse_double(val, 1);
        used = val.size();
        have_h = true;
      } else if (key == "seed") {
        g.provenance.seed = std::stoull(val, &used);
        have_seed = true;
      } else {
        throw GridParseError(1, "unknown header field '" + key + "'");
      }
      if (used != val.size()) throw GridParseError(1, "malformed value in '" + tok + "'");
    } catch (const std::logic_error&) {
      throw GridParseError(1, "malformed value in '" + tok + "'");
    }
  }
  if (!(have_d && have_n && have_h && have_seed)) throw GridParseError(1, "header needs d, n, h and seed");
  if (g.d != 1 && g.d != 2) throw GridParseError(1, "d must be 1 or 2");
  if (g.n < 1 || !(g.h > 0.0)) throw GridParseError(1, "n and h must be positive");

  ++ln;
  if (!std::getline(in, line)) throw GridParseError(ln, "missing column line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string cols = g.d == 1 ? "x,value" : "x,y,value";
  if (line != cols) throw GridParseError(ln, "expected columns '" + cols + "'");

  const std::size_t count = g.d == 1 ? g.n : static_cast<std::size_t>(g.n) * g.n;
  const std::size_t width = g.d + 1;
  g.values.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    ++ln;
    if (!std::getline(in, line)) throw GridParseError(ln, "expected " + std::to_string(count) + " data rows");
    const auto f = split(line);
    if (f.size() != width) throw GridParseError(ln, "expected " + std::to_string(width) + " fields");
    const double x = parse_double(f[0], ln);
    if (k == 0) g.origin = x;
    const std::size_t i = g.d == 1 ? k : k / g.n;
    const double tol = 1e-9 * (std::fabs(g.origin) + g.n * g.h);
    if (std::fabs(x - g.coord(static_cast<int>(i))) > tol) throw GridParseError(ln, "x is off the grid");
    if (g.d == 2 && std::fabs(parse_double(f[1], ln) - g.coord(static_cast<int>(k % g.n))) > tol)
      throw GridParseError(ln, "y is off the grid");
    g.values.push_back(parse_double(f[width - 1], ln));
  }
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line != "\r") throw GridParseError(ln, "trailing data");
  }
  return g;
}

FieldGrid read_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_grid_csv(in);
}

}  // namespace supcar
