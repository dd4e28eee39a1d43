#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace obsv {

// Expression templates off: values behave like plain types in ?:, auto and lambdas.
using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational =
    boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

}  // namespace obsv
