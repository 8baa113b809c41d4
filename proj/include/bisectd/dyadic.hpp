// Exact dyadic points: integer numerators over a shared power-of-two
// denominator. Every vertex created by bisection is an edge midpoint, so
// coordinates stay dyadic forever; keeping them exact makes vertex dedup a
// plain hash lookup and all geometric predicates bit-exact.
#pragma once

#include <boost/functional/hash.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bisectd {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Point with coordinates numerators[i] / 2^exponent, kept in canonical form:
// exponent == 0 or at least one numerator is odd.
class DyadicPoint {
 public:
  DyadicPoint() = default;

  DyadicPoint(std::vector<BigInt> numerators, unsigned exponent)
      : num_(std::move(numerators)), k_(exponent) {
    canonicalize();
  }

  static DyadicPoint integer(std::vector<BigInt> coords) {
    return DyadicPoint(std::move(coords), 0);
  }

  int dim() const { return static_cast<int>(num_.size()); }
  const std::vector<BigInt>& numerators() const { return num_; }
  unsigned exponent() const { return k_; }

  BigRat coord(int i) const {
    BigInt den = BigInt(1) << k_;
    return BigRat(num_[static_cast<size_t>(i)], den);
  }

  double coord_double(int i) const {
    return static_cast<double>(coord(i));
  }

  bool operator==(const DyadicPoint& o) const {
    return k_ == o.k_ && num_ == o.num_;
  }
  bool operator!=(const DyadicPoint& o) const { return !(*this == o); }

  friend DyadicPoint midpoint(const DyadicPoint& a, const DyadicPoint& b) {
    if (a.dim() != b.dim())
      throw std::invalid_argument("midpoint: dimension mismatch");
    // Align to the common exponent max(ka, kb), then add one halving bit.
    unsigned k = std::max(a.k_, b.k_) + 1;
    std::vector<BigInt> num(a.num_.size());
    for (size_t i = 0; i < num.size(); ++i) {
      num[i] = (a.num_[i] << (k - 1 - a.k_)) + (b.num_[i] << (k - 1 - b.k_));
    }
    return DyadicPoint(std::move(num), k);
  }

 private:
  void canonicalize() {
    while (k_ > 0) {
      bool all_even = true;
      for (const BigInt& n : num_) {
        if (boost::multiprecision::bit_test(n, 0)) {
          all_even = false;
          break;
        }
      }
      if (!all_even) break;
      for (BigInt& n : num_) n >>= 1;
      --k_;
    }
  }

  std::vector<BigInt> num_;
  unsigned k_ = 0;
};

struct DyadicPointHash {
  size_t operator()(const DyadicPoint& p) const {
    size_t h = boost::hash<unsigned>()(p.exponent());
    for (const BigInt& n : p.numerators()) {
      boost::hash_combine(h, n);
    }
    return h;
  }
};

// max_i |x_i| + (1/d) sum_i |x_i|; the norm under which bisection picks the
// longest edge for Kuhn seeds in every dimension. Diagnostic only.
inline BigRat normm(const std::vector<BigRat>& x, int d) {
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("normm: vector length != d");
  BigRat maxabs = 0;
  BigRat sum = 0;
  for (const BigRat& xi : x) {
    BigRat a = xi < 0 ? BigRat(-xi) : xi;
    if (a > maxabs) maxabs = a;
    sum += a;
  }
  return maxabs + sum / d;
}

}  // namespace bisectd
