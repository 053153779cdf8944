// The references must themselves be right: check them against the PDEs and
// definitions they claim to solve, using nothing but finite differences.

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace {

using oracle::C;
using oracle::R;

constexpr R h = 1e-4L;

TEST(FreePacketOracle, SolvesFreeSchrodinger) {
  const oracle::FreePacket1D p{0.7L, 1.3L, 1.1L, 1.7L};
  for (R t : {R(0.3), R(1.5), R(4)}) {
    for (R x : {R(-2), R(0.4), R(3)}) {
      const C dt = (p.psi(x, t + h) - p.psi(x, t - h)) / (2 * h);
      const C dxx = (p.psi(x + h, t) - R(2) * p.psi(x, t) + p.psi(x - h, t)) / (h * h);
      const C lhs = C(0, 1) * dt;
      const C rhs = -dxx / (2 * p.m);
      EXPECT_LT(std::abs(lhs - rhs), 1e-6L) << "x=" << double(x) << " t=" << double(t);
    }
  }
}

TEST(FreePacketOracle, NormalizedAndMoments) {
  const oracle::FreePacket1D p{-1, 0.8L, 2, 1};
  const R t = 1.2L;
  R norm = 0, first = 0, second = 0;
  const R dx = 1e-3L;
  for (R x = -40; x < 40; x += dx) {
    const R r = p.rho(x, t);
    norm += r * dx;
    first += x * r * dx;
    second += x * x * r * dx;
  }
  EXPECT_NEAR(double(norm), 1.0, 1e-12);
  EXPECT_NEAR(double(first), double(p.centre(t)), 1e-10);
  EXPECT_NEAR(double(second - first * first), double(p.spread(t) * p.spread(t)), 1e-10);
}

TEST(FreePacketOracle, PhaseAndVelocitiesMatchDefinitions) {
  const oracle::FreePacket1D p{0.5L, 1.1L, -0.9L, 1.4L};
  for (R t : {R(0), R(0.8), R(3)}) {
    for (R x : {R(-1.5), R(0.2), R(2.5)}) {
      const C psi = p.psi(x, t);
      EXPECT_NEAR(double(std::remainder(std::arg(psi) - p.phase(x, t), 2 * oracle::pi)), 0.0, 1e-12);
      const R ds = (p.phase(x + h, t) - p.phase(x - h, t)) / (2 * h);
      EXPECT_NEAR(double(p.drift(x, t)), double(ds / p.m), 1e-7);
      const R dlnrho = (std::log(p.rho(x + h, t)) - std::log(p.rho(x - h, t))) / (2 * h);
      EXPECT_NEAR(double(p.osmotic(x, t)), double(dlnrho / (2 * p.m)), 1e-7);
      auto amp = [&](R y) { return std::abs(p.psi(y, t)); };
      const R lap = (amp(x + h) - 2 * amp(x) + amp(x - h)) / (h * h);
      EXPECT_NEAR(double(p.q(x, t)), double(-lap / amp(x) / (2 * p.m)), 1e-5);
    }
  }
}

TEST(HermiteOracle, OrthonormalAndEigen) {
  const R m = 1.3L, w = 0.7L;
  const R dx = 2e-3L;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      R s = 0;
      for (R x = -20; x < 20; x += dx) s += oracle::hermite_function(a, x, m, w) * oracle::hermite_function(b, x, m, w) * dx;
      EXPECT_NEAR(double(s), a == b ? 1.0 : 0.0, 1e-12) << a << "," << b;
    }
    for (R x : {R(-1.2), R(0.3), R(1.9)}) {
      auto f = [&](R y) { return oracle::hermite_function(a, y, m, w); };
      const R lap = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
      const R hpsi = -lap / (2 * m) + m * w * w * x * x / 2 * f(x);
      EXPECT_NEAR(double(hpsi), double(oracle::harmonic_energy(a, w) * f(x)), 1e-6);
    }
  }
}

TEST(FourierOracle, DerivativesMatchDifferences) {
  const auto f = oracle::random_fourier(42, 10, 2, 5, 3, C(3, 0), 1);
  const R x = 0.37L, y = -1.2L;
  const auto g = f.grad(x, y);
  EXPECT_LT(std::abs(g[0] - (f.value(x + h, y) - f.value(x - h, y)) / (2 * h)), 1e-6L);
  EXPECT_LT(std::abs(g[1] - (f.value(x, y + h) - f.value(x, y - h)) / (2 * h)), 1e-6L);
  const C lap = (f.value(x + h, y) + f.value(x - h, y) + f.value(x, y + h) + f.value(x, y - h) - R(4) * f.value(x, y)) /
                (h * h);
  EXPECT_LT(std::abs(f.lap(x, y) - lap), 1e-5L);
}

TEST(FourierOracle, RealValuedAndNodeFree) {
  const auto f = oracle::random_fourier(7, 10, 1, 4, 3, C(3, 0), 1, true);
  for (R x = -5; x < 5; x += 0.01L) {
    EXPECT_LT(std::fabs(f.value(x).imag()), 1e-15L);
    EXPECT_GT(std::abs(f.value(x)), 1.9L);
  }
}

TEST(StatisticsOracle, KsOfExactQuantilesIsSmall) {
  std::vector<R> xs;
  const int n = 1000;
  for (int i = 0; i < n; ++i) xs.push_back((i + R(0.5)) / n);
  EXPECT_NEAR(double(oracle::ks_statistic(xs, [](R x) { return x; })), 0.5 / n, 1e-15);
}

}  // namespace
