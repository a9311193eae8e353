#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mcmx/chain.hpp"
#include "mcmx/errors.hpp"

// Text formats, shared by the library round-trip tests and the CLI:
//   matrix:       first line "d", then d rows of d decimals
//   distribution: first line "d", then one row of d decimals
//   trajectory:   one 1-based state index per line
// Reals are written with 17 significant digits so that write -> read is
// bit-exact for doubles.

namespace mcmx {

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  os << m.dim << "\n";
  for (int i = 0; i < m.dim; ++i) {
    for (int j = 0; j < m.dim; ++j)
      os << (j ? " " : "") << format_real(m(i, j));
    os << "\n";
  }
}

inline void write_matrix(std::ostream& os, const StochasticMatrix& m) {
  write_matrix(os, m.m);
}

inline Matrix read_matrix(std::istream& is) {
  int d = 0;
  if (!(is >> d) || d < 1) throw ParseError("matrix file must start with its dimension");
  Matrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (!(is >> m(i, j)))
        throw ParseError("matrix file ended before " + std::to_string(d) + "x" +
                         std::to_string(d) + " entries were read");
  return m;
}

inline StochasticMatrix read_stochastic(std::istream& is,
                                        double tolerance = kRowSumTolerance) {
  return validate_stochastic(read_matrix(is), tolerance);
}

inline void write_dist(std::ostream& os, const ProbDist& p) {
  os << p.dim() << "\n";
  for (int i = 0; i < p.dim(); ++i) os << (i ? " " : "") << format_real(p[i]);
  os << "\n";
}

inline ProbDist read_dist(std::istream& is) {
  int d = 0;
  if (!(is >> d) || d < 1)
    throw ParseError("distribution file must start with its dimension");
  std::vector<double> w(d);
  for (int i = 0; i < d; ++i)
    if (!(is >> w[i])) throw ParseError("distribution file ended early");
  return validate_dist(w);
}

inline void write_trajectory(std::ostream& os, const Trajectory& x) {
  for (int s : x.states) os << (s + 1) << "\n";
}

inline Trajectory read_trajectory(std::istream& is, int d) {
  std::vector<int> states;
  long long s = 0;
  while (is >> s) states.push_back(static_cast<int>(s) - 1);
  if (!is.eof() && is.fail()) throw ParseError("trajectory file has a non-integer line");
  return validate_trajectory(std::move(states), d);
}

// File wrappers --------------------------------------------------------------

template <typename Fn>
auto with_input_file(const std::string& path, Fn fn) {
  std::ifstream is(path);
  if (!is) throw FileError("cannot open " + path + " for reading");
  return fn(is);
}

template <typename Fn>
void with_output_file(const std::string& path, Fn fn) {
  std::ofstream os(path);
  if (!os) throw FileError("cannot open " + path + " for writing");
  fn(os);
  os.flush();
  if (!os) throw FileError("write to " + path + " failed");
}

// key=value diagnostic blocks ------------------------------------------------

inline void kv(std::ostream& os, const std::string& key, double value) {
  os << key << "=" << format_real(value) << "\n";
}

inline void kv(std::ostream& os, const std::string& key, long long value) {
  os << key << "=" << value << "\n";
}

inline void kv(std::ostream& os, const std::string& key, const std::string& value) {
  os << key << "=" << value << "\n";
}

inline void kv(std::ostream& os, const std::string& key, const ProbDist& p) {
  os << key << "=";
  for (int i = 0; i < p.dim(); ++i) os << (i ? "," : "") << format_real(p[i]);
  os << "\n";
}

}  // namespace mcmx
