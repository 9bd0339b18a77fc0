#pragma once

// Frozen outputs of tests/oracles/gen_reference.py (mpmath quadrature,
// numpy/scipy dense solvers). Regenerate with that script, never from the
// library under test.

#include "resdet/numerics.hpp"

namespace resdet::testing {

inline constexpr double kLowerGamma_1p5_3p9074 = 0.9500016155829012036;
inline constexpr double kLowerGamma_5_2p5 = 0.10882198108584875765;
inline constexpr double kLowerGamma_75_80 = 0.72684219470807397942;
inline constexpr double kLowerGamma_0p5_0p01 = 0.1124629160182848922;
inline constexpr double kInverseGamma_1p5_0p95 = 3.9073639516255896;

inline constexpr double kChi2Quantile95_dof1 = 3.841458820694124;
inline constexpr double kChi2Quantile20_dof1 = 0.0641847546673016;
inline constexpr double kChi2Quantile95_dof3 = 7.814727903251179;
inline constexpr double kChi2Quantile95_dof12 = 21.02606981748307;
inline constexpr double kChi2Quantile95_dof150 = 179.58063415418053;
inline constexpr double kBetaOverEll_p1_ell100 = 1.2434211340400407;
inline constexpr double kBetaOverEll_p1_ell10000 = 1.0233748897677937;

inline constexpr double kReactorRhoF = 0.24972825443642588;
inline constexpr double kReactorRhoClosedLoop = 0.9326486540281657;
inline constexpr double kReactorRhoEstimator = 0.4271963214713752;
inline constexpr double kReactorLambda1 = 101978018018.69301;

inline constexpr double kReactorGammaChi2Worst = 892709.6184812459;
inline constexpr double kReactorGammaWindowed4Worst = 732153.8306103413;
inline constexpr double kReactorGammaWindowed50Worst = 605198.7631445281;
inline constexpr double kReactorGammaCusumWorst = 553113.0572098972;
inline constexpr double kReactorGammaOnes = 337556.6347672542;

inline Matrix reactor_sigma() {
  Matrix m(3, 3);
  m << 113.88758825083248, 0.0, 0.0,
       0.0, 166.32459771967575, 13.884384927953949,
       0.0, 13.884384927949442, 105.03556970875769;
  return m;
}

inline Matrix reactor_M() {
  Matrix m(4, 3);
  m << 3.6540902685132373e-03, 1.2620421828134930e+01, 2.1436166781854538e+02,
       -4.6173387341918518e-03, -5.4291869933948756e+03, -9.2223630994065548e+04,
       1.4509645534076362e-03, -1.4578671031058204e+04, -2.4761594170176185e+05,
       -1.2703862729214850e-03, -1.0499989178474661e+04, -1.7834476644138983e+05;
  return m;
}

inline Vector reactor_nu1() {
  Vector v(3);
  v << 2.8869416797912626e-09, 5.8773375385249738e-02, 9.9827135105933229e-01;
  return v;
}

inline Matrix reactor_dare_P() {
  Matrix m(4, 4);
  m << 1.3887588155034049e+01, 0.0, 0.0, 0.0,
       0.0, 1.3664130281907404e+01, 1.4774422745438703e-02, 2.2073937828924075e+00,
       0.0, 1.4774422745438703e-02, 1.3809228675346403e+00, 1.4596357863509661e+00,
       0.0, 2.2073937828924075e+00, 1.4596357863509661e+00, 3.6529257511506081e+01;
  return m;
}

}  // namespace resdet::testing
