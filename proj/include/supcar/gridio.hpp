#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "supcar/simulate.hpp"

namespace supcar {

struct GridParseError : std::runtime_error {
  GridParseError(std::size_t line, const std::string& msg);
  std::size_t line;
};

// Header `# supcar-lab grid d=<d> n=<n> h=<h> seed=<seed>`, then x,value (d = 1) or x,y,value
// (d = 2, row-major) with 17 significant digits.
void write_grid_csv(const FieldGrid& g, std::ostream& out);
void write_grid_csv(const FieldGrid& g, const std::string& path);
FieldGrid read_grid_csv(std::istream& in);
FieldGrid read_grid_csv(const std::string& path);

}  // namespace supcar
