// Generation / level / type arithmetic. A simplex of generation g in
// dimension d has level ceil(g/d) and type g - d*(level-1) in {1,...,d};
// one level corresponds to one halving of the diameter. Initial vertices
// carry negative generations (the negated color), so the ceiling must be
// mathematically correct for negative arguments.
#pragma once

#include <cstdint>
#include <stdexcept>

namespace bisectd {

using Gen = std::int64_t;

inline void check_dim(int d) {
  if (d < 2) throw std::invalid_argument("dimension must be >= 2");
}

// ceil(gen / d) with correct rounding toward +infinity for negative gen.
inline Gen level_of(Gen gen, int d) {
  check_dim(d);
  Gen q = gen / d;
  if (gen % d > 0) ++q;
  return q;
}

// gen - d*(level-1), always in {1,...,d}.
inline int type_of(Gen gen, int d) {
  Gen t = gen - static_cast<Gen>(d) * (level_of(gen, d) - 1);
  return static_cast<int>(t);
}

// Non-negative remainder gen mod d.
inline int mod_nonneg(Gen gen, int d) {
  int r = static_cast<int>(gen % d);
  return r < 0 ? r + d : r;
}

// Split index k = d - (gen mod d) in {1,...,d} used by the Maubach ordering.
inline int maubach_k(Gen gen, int d) {
  check_dim(d);
  return d - mod_nonneg(gen, d);
}

// Tag gamma = gen mod d in {0,...,d-1} used by the Traxler ordering.
inline int traxler_gamma(Gen gen, int d) {
  check_dim(d);
  return mod_nonneg(gen, d);
}

}  // namespace bisectd
