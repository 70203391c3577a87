// doctest stringifies through an unqualified toString, which ADL would
// resolve to lyap::toString; the qualified call routes through StringMaker.
#pragma once

#define DOCTEST_STRINGIFY(...) ::doctest::toString(__VA_ARGS__)
#include <doctest.h>

#include "lyap/error.hpp"
#include "lyap/ldt.hpp"
#include "lyap/measure.hpp"
#include "lyap/smallmat.hpp"

namespace doctest {

template <>
struct StringMaker<lyap::Matrix> {
  static String convert(const lyap::Matrix& m) { return lyap::toString(m).c_str(); }
};
template <>
struct StringMaker<lyap::GroundMetric> {
  static String convert(lyap::GroundMetric m) { return lyap::toString(m).c_str(); }
};
template <>
struct StringMaker<lyap::PerturbationMode> {
  static String convert(lyap::PerturbationMode m) { return lyap::toString(m).c_str(); }
};
template <>
struct StringMaker<lyap::DeviationKind> {
  static String convert(lyap::DeviationKind k) { return lyap::toString(k).c_str(); }
};
template <>
struct StringMaker<lyap::ErrorCode> {
  static String convert(lyap::ErrorCode c) { return lyap::toString(c); }
};

}  // namespace doctest
