#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "spinhydro/csv.hpp"
#include "spinhydro/state.hpp"
#include "spinhydro/trajectory.hpp"

namespace {

using namespace spinhydro;

const SpinVector kZ{Vec3{0, 0, 1}};

struct Scene {
  FrameSequence frames;
  FieldCache cache;
};

Scene ground_scene(Real T = 2) {
  const Grid g = make_grid(1, 128, 24);
  const Real dt = 1e-3L;
  auto frames = evolve(init_state(StateSpec::single(HarmonicEigenstate{{0, 0}, {1, 1}, 1, dt}), g),
                       Potential::harmonic(g, 1, {1, 1}), 1, {T, dt, 10, true});
  FieldCache cache(frames, kZ);
  return {std::move(frames), std::move(cache)};
}

Scene free_scene(Real T = 5, Vec3 spin = {0, 0, 1}) {
  const Grid g = make_grid(1, 512, 64);
  auto frames = evolve(init_state(StateSpec::single(GaussianPacket{{0, 0, 0}, {1, 1, 1}, {1, 0, 0}}), g),
                       Potential::free(g), 1, {T, 1e-3L, 10, true});
  FieldCache cache(frames, SpinVector(spin), {}, 4);
  return {std::move(frames), std::move(cache)};
}

AdvectOptions opts(VelocityMode mode, Real dt = 0.01L, Real duration = 0) {
  AdvectOptions o;
  o.mode = mode;
  o.dt_traj = dt;
  o.duration = duration;
  return o;
}

TEST(Modes, ParseAndPrint) {
  EXPECT_EQ(parse_velocity_mode("drift"), VelocityMode::drift);
  EXPECT_EQ(std::string(to_string(VelocityMode::internal)), "internal");
  EXPECT_THROW(parse_velocity_mode("totl"), PreconditionError);
}

TEST(Interpolate, GridPointAtFrameTimeIsStoredValue) {
  const auto s = free_scene(1);
  const Grid& g = s.cache.grid();
  for (std::size_t j : {std::size_t(0), std::size_t(3), s.cache.size() - 1}) {
    for (int i : {200, 256, 300}) {
      const Vec3 x = g.position(g.index(i));
      const Real t = s.cache.dt_field() * static_cast<Real>(j);
      const auto v = interpolate_velocity(s.cache, x, t, VelocityMode::total);
      const Vec3 want = s.cache.drift(j)[g.index(i)] + s.cache.internal(j)[g.index(i)];
      EXPECT_LT(max_abs_component(v - want), 1e-15L);
    }
  }
}

TEST(Interpolate, GroundStateDriftZero) {
  const auto s = ground_scene(1);
  for (Real x : {Real(-1.3), Real(0.2), Real(2.71)}) {
    EXPECT_LT(max_abs_component(interpolate_velocity(s.cache, {x, 5, 0}, 0.37L, VelocityMode::drift)), 1e-10L);
  }
}

TEST(Interpolate, PacketCentreAtStart) {
  const auto s = free_scene(1);
  const auto v = interpolate_velocity(s.cache, {0, 0, 0}, 0, VelocityMode::total);
  EXPECT_LT(max_abs_component(v - Vec3{1, 0, 0}), 1e-9L);
}

TEST(Advect, GroundStateInternalDrift) {
  const auto s = ground_scene(1);
  const auto tr = advect(s.cache, SplitSpec::external_only({1, 0, 0}), opts(VelocityMode::total));
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    EXPECT_LT(max_abs_component(tr.x_total[k] - Vec3{1, tr.times[k], 0}), 1e-6L) << double(tr.times[k]);
  }
  const auto origin = advect(s.cache, SplitSpec::external_only({0, 0, 0}), opts(VelocityMode::total));
  for (const auto& x : origin.x_total) EXPECT_LT(max_abs_component(x), 1e-12L);
}

TEST(Advect, FreeCentreRidesPacket) {
  const auto s = free_scene(5);
  const auto tr = advect(s.cache, SplitSpec::external_only({0, 0, 0}), opts(VelocityMode::drift));
  ASSERT_EQ(tr.times.size(), 501u);
  for (std::size_t k = 0; k < tr.times.size(); ++k) EXPECT_NEAR(double(tr.x_total[k].x), double(tr.times[k]), 1e-4);
}

TEST(Advect, SumConsistencyAndPerpendicularity) {
  const auto s = free_scene(3);
  for (Real x0 : {Real(-1.5), Real(0.3), Real(2)}) {
    const auto split = SplitSpec::make({x0 - 1, 0.5L, 0}, {1, -0.5L, 0});
    const auto tr = advect(s.cache, split, opts(VelocityMode::total));
    const Vec3 c0 = split.x0_total - split.x_ext0 - split.x_int0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      EXPECT_LT(max_abs_component(tr.x_total[k] - tr.x_ext[k] - tr.x_int[k] - c0), 1e-9L);
      EXPECT_LT(std::fabs(dot(tr.v_B_along[k], tr.v_perp_along[k])), 1e-10L);
    }
  }
}

TEST(Advect, ExtremumSeedHasNoInternalVelocity) {
  const auto s = free_scene(1);
  const auto tr = advect(s.cache, SplitSpec::external_only({0, 0, 0}), opts(VelocityMode::total, 0.01L, 0.1L));
  EXPECT_LT(norm(tr.v_perp_along.front()), 1e-9L);
  const auto g = ground_scene(0.2L);
  const auto tg = advect(g.cache, SplitSpec::external_only({0, 0, 0}), opts(VelocityMode::total, 0.01L, 0.1L));
  EXPECT_LT(norm(tg.v_perp_along.front()), 1e-9L);
}

TEST(Advect, RungeKuttaFourthOrder) {
  const auto s = free_scene(2);
  auto end = [&](Real dt) {
    return advect(s.cache, SplitSpec::external_only({1, 0, 0}), opts(VelocityMode::total, dt)).x_total.back();
  };
  // Steps divide dt_field, so each one sees a single linear-in-time segment.
  const Real dt = s.cache.dt_field();
  const Vec3 ref = end(dt / 16);
  const Real e1 = norm(end(dt) - ref), e2 = norm(end(dt / 2) - ref);
  EXPECT_GT(e1 / e2, 12);
  EXPECT_LT(e1 / e2, 20);
}

TEST(Advect, DriftTrajectoriesDoNotCross) {
  const Grid g = make_grid(1, 1024, 48);
  const StateSpec two{{StateTerm{Complex(1, 0), GaussianPacket{{-3, 0, 0}, {1, 1, 1}, {}}},
                       StateTerm{Complex(1, 0), GaussianPacket{{3, 0, 0}, {1, 1, 1}, {}}}}};
  const auto frames = evolve(init_state(two, g), Potential::free(g), 1, {3, 1e-3L, 10, true});
  HydroOptions ho;
  ho.node_epsilon = 1e-10L;
  const FieldCache cache(frames, kZ, ho, 4);
  std::vector<Trajectory> trs;
  for (Real x0 = -5; x0 <= 5; x0 += 0.5L) trs.push_back(advect(cache, SplitSpec::external_only({x0, 0, 0}), opts(VelocityMode::drift)));
  for (std::size_t k = 0; k < trs[0].times.size(); ++k) {
    for (std::size_t a = 1; a < trs.size(); ++a) EXPECT_LT(trs[a - 1].x_total[k].x, trs[a].x_total[k].x);
  }
}

TEST(Advect, NodalSeedTraps) {
  const Grid g = make_grid(1, 128, 24);
  const auto frames = evolve(init_state(StateSpec::single(HarmonicEigenstate{{1, 0}, {1, 1}, 1, 1e-3L}), g),
                             Potential::harmonic(g, 1, {1, 1}), 1, {1, 1e-3L, 10, true});
  const FieldCache cache(frames, kZ);
  EXPECT_THROW(advect(cache, SplitSpec::external_only({0, 0, 0}), opts(VelocityMode::drift)), NodalTrapError);
}

TEST(Split, SwappedSplitsShareTotal) {
  const auto s = free_scene(3);
  const Vec3 x0{0.5L, 0, 0};
  const auto r = split_ambiguity_check(SplitSpec::make(x0, {}), SplitSpec::make({}, x0), s.cache, opts(VelocityMode::total));
  EXPECT_LT(r.total_difference, 1e-12L);
  EXPECT_LT(r.offset_error, 1e-12L);
  EXPECT_EQ(r.initial_offset, Real(0.5));
}

TEST(Split, IdenticalSplitsAgree) {
  const auto s = free_scene(1);
  const auto a = SplitSpec::make({0.2L, 0, 0}, {0.1L, 0, 0});
  const auto r = split_ambiguity_check(a, a, s.cache, opts(VelocityMode::total));
  EXPECT_EQ(r.total_difference, 0);
  EXPECT_EQ(r.external_difference, 0);
}

TEST(Split, HarmonicConstantOffset) {
  const auto s = ground_scene(2);
  const auto a = SplitSpec::make({1, 0, 0}, {0, 0, 0});
  const auto b = SplitSpec::make({0.5L, 0.5L, 0}, {0.5L, -0.5L, 0});
  const auto r = split_ambiguity_check(a, b, s.cache, opts(VelocityMode::total));
  EXPECT_LT(r.total_difference, 1e-12L);
  EXPECT_LT(r.offset_error, 1e-12L);
  EXPECT_NEAR(double(r.external_difference), std::sqrt(0.5), 1e-12);
}

TEST(TrajectoryCsv, RowCountMatchesSteps) {
  const auto s = ground_scene(1);
  const auto tr = advect(s.cache, SplitSpec::external_only({1, 0, 0}), opts(VelocityMode::total, 0.01L));
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("time,x_total_x", 0), 0u);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 101);
}

}  // namespace
