#include "openq/repr.hpp"

namespace openq {

template struct SpinRep<Rational>;
template struct SpinRep<Complex>;
template SpinRep<Rational> build_spin_rep<Rational>(int);
template SpinRep<Complex> build_spin_rep<Complex>(int);
template FockSpace<Rational> build_fock<Rational>(std::size_t);
template FockSpace<Complex> build_fock<Complex>(std::size_t);

}  // namespace openq
