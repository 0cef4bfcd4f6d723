#pragma once

#include <array>
#include <loopeq/lattice.hpp>
#include <loopeq/strings.hpp>

// Shared shorthand for the unit suites.

namespace loopeq::testutil {

inline SiteId site2(const Lattice& lat, int x, int y) {
  std::array<int, 2> c{x, y};
  return lat.site(c);
}

inline SiteId site3(const Lattice& lat, int x, int y, int z) {
  std::array<int, 3> c{x, y, z};
  return lat.site(c);
}

// Positive plaquette with corner (x, y) in the (0, 1) plane.
inline PlaqId plaq2(const Lattice& lat, int x, int y) {
  return lat.plaq_at(site2(lat, x, y), 0, 1);
}

inline Loop ploop2(const Lattice& lat, int x, int y) {
  return plaquette_loop(lat, OriPlaq::positive(plaq2(lat, x, y)));
}

inline LatticeString pstring2(const Lattice& lat, int x, int y) {
  return LatticeString::from_loops(lat, {ploop2(lat, x, y)});
}

}  // namespace loopeq::testutil
