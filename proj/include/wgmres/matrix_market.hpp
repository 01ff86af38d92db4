#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "wgmres/numkernel.hpp"

namespace wgmres::lab {

/// Coordinate or array format, real/integer/complex, general/symmetric/hermitian/skew-symmetric.
Mat read_matrix_market(std::istream& in);
Mat read_matrix_market(const std::string& path);

/// Array format; the field is real when every imaginary part is zero.
void write_matrix_market(std::ostream& out, const Mat& a);
void write_matrix_market(const std::string& path, const Mat& a);

}  // namespace wgmres::lab
