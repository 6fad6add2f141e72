#pragma once

#include <string>
#include <vector>

#include "spatinv/charfun.hpp"

namespace spatinv {

/// Scalar chain: A0 = (-1), A1 = (1), phi(lambda) = 1/(lambda + 1).
SystemPair build_robot();

/// Vehicle-chain model: A0 is the 3x3 companion matrix with last row
/// (-a0, -a1, -a2) and A1 has a single -1 in the first row, second column.
/// phi(lambda) = a0 / (lambda^3 + a2 lambda^2 + a1 lambda + a0).
SystemPair build_platoon(double a0, double a1, double a2);

/// Platoon whose closed-loop poles sit at -z1, -z2, -z3. The constant
/// coefficient is +z1*z2*z3 so that A0 stays Hurwitz for positive zeros;
/// pass literal_negative_sign = true to get the sign-flipped variant
/// (unstable for positive zeros; the label records the flip).
SystemPair build_platoon_from_zeros(double z1, double z2, double z3,
                                    bool literal_negative_sign = false);

/// Platoon with poles at -c and -a +- ib:
/// a0 = (a^2+b^2)c, a1 = a^2+b^2+2ac, a2 = 2a+c.
SystemPair build_platoon_pair(double a, double b, double c);

/// Bidiagonal cascade of m first-order lags with rates z1..zm and a rank-one
/// feedback corner, realizing phi = prod(zi) / prod(lambda + zi).
SystemPair build_cascade(const std::vector<double>& zetas);

/// Dispatch by name: "robot" (0 params), "platoon" (3), "platoon_from_zeros"
/// (3), "platoon_pair" (3), "cascade" (>= 1). Throws BadModel on an unknown
/// name or wrong arity.
SystemPair build_model(const std::string& name, const std::vector<double>& params);

/// JSON round trip: {"schema":1,"label":...,"m":...,"A0":[[[re,im],...]],"A1":...}
/// Row-major, complex entries as [re, im] pairs. load re-extracts phi and
/// throws (ZeroA1 / NoCharacteristicFunction / BadModel / IoError) if the
/// file does not describe an admissible pair.
void save_system(const SystemPair& sys, const std::string& path);
SystemPair load_system(const std::string& path);

}  // namespace spatinv
