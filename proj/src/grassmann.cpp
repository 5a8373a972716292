#include "fgff/grassmann.hpp"

namespace fgff {

namespace {
// generic algebras draw ids from the upper half so they never collide with lattice ids
std::atomic<std::uint64_t> next_generic_id{1ULL << 62};
}  // namespace

GrassmannAlgebra::GrassmannAlgebra(int generators) : GrassmannAlgebra(generators, next_generic_id++) {
  if (generators < 0 || generators > 64) throw CapacityError("Grassmann algebra supports at most 64 generators");
}

GrassmannAlgebra GrassmannAlgebra::paired(int vertices) { return GrassmannAlgebra(2 * vertices); }

GrassmannAlgebra GrassmannAlgebra::for_lattice(const FiniteLattice& L, bool ghost) {
  const int verts = L.size() + (ghost ? 1 : 0);
  if (2 * verts > 64) throw CapacityError("lattice too large for a Grassmann algebra");
  return GrassmannAlgebra(2 * verts, (L.id() << 1) | (ghost ? 1 : 0));
}

}  // namespace fgff
