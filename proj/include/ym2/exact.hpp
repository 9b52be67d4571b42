#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

namespace ym2 {

// Arbitrary-precision integer / rational used wherever exactness matters
// (dimensions, Casimirs, winding ranks).  Floats enter only at the
// exponential-sum stage.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::rational<Int>;

inline double to_double(const Int& v) { return v.convert_to<double>(); }

inline double to_double(const Rat& r) {
  return r.numerator().convert_to<double>() / r.denominator().convert_to<double>();
}

}  // namespace ym2
