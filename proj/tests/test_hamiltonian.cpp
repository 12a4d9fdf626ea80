#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "biex/hamiltonian.hpp"

using namespace biex;

namespace {

const DotParameters kDot = default_dot_parameters(2);

HamiltonianModel rotating_model(SchemeKind kind = SchemeKind::concurrent) {
  return HamiltonianModel::rotating(LevelBasis(2), kDot, pi_area_scheme(kDot, kind));
}

std::size_t idx(const LevelBasis& b, const StateLabel& s) { return b.index_of(s); }

}  // namespace

TEST(Hamiltonian, RotatingDiagonal) {
  const auto m = rotating_model();
  const auto& b = m.basis();
  const auto& d = m.diagonal();
  EXPECT_DOUBLE_EQ(d[0], 0.0);
  EXPECT_DOUBLE_EQ(d[idx(b, StateLabel::exciton(1, Spin::plus))], 0.0);
  EXPECT_DOUBLE_EQ(d[idx(b, StateLabel::exciton(1, Spin::minus))], 0.0);
  EXPECT_DOUBLE_EQ(d[idx(b, StateLabel::exciton(2, Spin::plus))], 40.0);
  EXPECT_DOUBLE_EQ(d[idx(b, StateLabel::biexciton({1, Spin::plus}, {1, Spin::minus}))], -4.0);
  EXPECT_DOUBLE_EQ(d[idx(b, StateLabel::biexciton({2, Spin::plus}, {2, Spin::minus}))], 76.0);
  for (auto [x, y] : {std::pair{Spin::plus, Spin::plus}, {Spin::plus, Spin::minus},
                      {Spin::minus, Spin::plus}, {Spin::minus, Spin::minus}})
    EXPECT_DOUBLE_EQ(d[idx(b, StateLabel::biexciton({1, x}, {2, y}))], 36.0);
}

TEST(Hamiltonian, LabDiagonal) {
  const HamiltonianModel m(LevelBasis(2), kDot, pi_area_scheme(kDot, SchemeKind::concurrent),
                           Frame::lab());
  const auto& d = m.diagonal();
  EXPECT_DOUBLE_EQ(d[1], 1300.0);
  EXPECT_DOUBLE_EQ(d[3], 1340.0);
  EXPECT_DOUBLE_EQ(d[5], 2596.0);
  EXPECT_DOUBLE_EQ(d[10], 2676.0);
  EXPECT_DOUBLE_EQ(d[6], 2636.0);
}

TEST(Hamiltonian, ZeroFieldIsDiagonal) {
  auto s = pi_area_scheme(kDot, SchemeKind::sequential);
  s.pulse1.amplitude_meV = 0;
  s.pulse2.amplitude_meV = 0;
  const auto m = HamiltonianModel::rotating(LevelBasis(2), kDot, s);
  const Matrix h = m.evaluate(0.0);
  for (Eigen::Index r = 0; r < h.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cols(); ++c)
      EXPECT_EQ(h(r, c), r == c ? std::complex<double>(m.diagonal()[r]) : 0.0);
}

TEST(Hamiltonian, BiexcitonElementFromX1Plus) {
  const auto m = rotating_model(SchemeKind::concurrent);
  const auto& b = m.basis();
  const auto bx = idx(b, StateLabel::biexciton({1, Spin::plus}, {1, Spin::minus}));
  const auto x = idx(b, StateLabel::exciton(1, Spin::plus));
  const auto g = idx(b, StateLabel::ground());
  for (double t : {-1500.0, -200.0, 0.0, 333.0, 1200.0}) {
    const Matrix h = m.evaluate(t);
    const auto e = field(m.scheme(), t, m.frame());
    const auto want = -std::sqrt(0.8) * e.minus;
    EXPECT_NEAR(std::abs(h(bx, x) - want), 0.0, 1e-15) << t;
    EXPECT_NEAR(std::abs(h(x, bx) - std::conj(want)), 0.0, 1e-15) << t;
    EXPECT_NEAR(std::abs(h(x, g) + e.plus), 0.0, 1e-15) << t;
    EXPECT_EQ(h(bx, g), 0.0);
  }
}

TEST(Hamiltonian, HermitianInBothFrames) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> t(-4000, 6500);
  const auto rot = rotating_model(SchemeKind::sequential);
  const HamiltonianModel lab(LevelBasis(2), kDot, pi_area_scheme(kDot, SchemeKind::sequential),
                             Frame::lab());
  for (int i = 0; i < 100; ++i) {
    const double ti = t(rng);
    EXPECT_LE(hermiticity_defect(rot, ti), 1e-15 * 80);
    EXPECT_EQ(hermiticity_defect(lab, ti), 0.0);
  }
}

TEST(Hamiltonian, CorruptionIsDetected) {
  ModelOptions opts;
  opts.corruption = ElementCorruption{5, 1, {1e-3, 0.0}};
  const auto m = HamiltonianModel::rotating(LevelBasis(2), kDot,
                                            pi_area_scheme(kDot, SchemeKind::concurrent), opts);
  EXPECT_NEAR(hermiticity_defect(m, 0.0), 1e-3, 1e-12);
}

TEST(Hamiltonian, FrameMismatchRejected) {
  try {
    HamiltonianModel(LevelBasis(2), kDot, pi_area_scheme(kDot, SchemeKind::concurrent),
                     Frame::rotating(1296.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_configuration);
    EXPECT_EQ(e.field(), "sim.frame");
  }
}

TEST(Hamiltonian, SparsityIsTwicePerEdge) {
  const auto m = rotating_model(SchemeKind::concurrent);
  const Matrix h = m.evaluate(0.0);
  int nonzero = 0;
  for (Eigen::Index r = 0; r < h.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cols(); ++c)
      if (r != c && h(r, c) != 0.0) ++nonzero;
  EXPECT_EQ(nonzero, 2 * static_cast<int>(m.transitions().size()));
}

// Term audit of the dipole Hamiltonian for n = 2: diagonal families and
// coupling families counted by brute force over all state pairs.
TEST(Hamiltonian, TermAudit) {
  const auto m = rotating_model(SchemeKind::concurrent);
  const auto& b = m.basis();
  int same_level_b = 0, mixed_b = 0;
  for (const auto& s : b.states())
    if (s.kind() == StateKind::biexciton) ++(s.first().level == s.second().level ? same_level_b : mixed_b);
  EXPECT_EQ(same_level_b, 2);
  EXPECT_EQ(mixed_b, 4);

  int ground_exciton = 0, exciton_biexciton = 0;
  for (std::size_t u = 0; u < b.size(); ++u)
    for (std::size_t l = 0; l < b.size(); ++l) {
      const auto& su = b.state(u);
      const auto& sl = b.state(l);
      if (su.exciton_count() != sl.exciton_count() + 1) continue;
      // A dipole edge adds one exciton and keeps the rest.
      const bool allowed = sl.kind() == StateKind::ground ||
                           (su.contains(sl.first()));
      if (!allowed) continue;
      ++(sl.kind() == StateKind::ground ? ground_exciton : exciton_biexciton);
    }
  EXPECT_EQ(ground_exciton, 4);
  EXPECT_EQ(exciton_biexciton, 12);
  EXPECT_EQ(m.transitions().size(), 16u);
}

TEST(Hamiltonian, BiexcitonCouplingCanBeDisabled) {
  ModelOptions opts;
  opts.couple_biexcitons = false;
  const auto m = HamiltonianModel::rotating(LevelBasis(1), default_dot_parameters(1),
                                            pi_area_scheme(default_dot_parameters(1),
                                                           SchemeKind::concurrent),
                                            opts);
  EXPECT_EQ(m.transitions().size(), 2u);
  const Matrix h = m.evaluate(0.0);
  EXPECT_EQ(h(3, 1), 0.0);
  EXPECT_EQ(h(3, 2), 0.0);
}

TEST(Hamiltonian, JsonDump) {
  const auto m = rotating_model(SchemeKind::concurrent);
  const auto j = hamiltonian_to_json(m, 100.0);
  EXPECT_EQ(j["dimension"], 11);
  EXPECT_EQ(j["frame"], "rotating");
  EXPECT_EQ(j["labels"][5], "B(1+,1-)");
  ASSERT_EQ(j["data_meV"].size(), 121u);
  const Matrix h = m.evaluate(100.0);
  EXPECT_EQ(j["data_meV"][5 * 11 + 1][0].get<double>(), h(5, 1).real());
  EXPECT_EQ(j["data_meV"][5 * 11 + 1][1].get<double>(), h(5, 1).imag());
  EXPECT_EQ(j["data_meV"][5 * 11 + 5][0].get<double>(), -4.0);
}
