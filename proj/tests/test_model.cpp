#include <pagereg/model.hpp>

#include <gtest/gtest.h>

#include <numeric>

using namespace pagereg;

namespace
{

CostParams params(int k_max = 4) { return {0.1, 1.0, 0.5, 0.9, k_max}; }

void expect_row_stochastic(const TransitionMatrix &P)
{
  for (std::size_t i = 0; i < P.size(); ++i)
  {
    double s = 0.0;
    for (std::size_t j = 0; j < P.size(); ++j)
    {
      EXPECT_GE(P(i, j), 0.0);
      s += P(i, j);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

} // namespace

TEST(TransitionMatrix, RejectsBadRows)
{
  EXPECT_THROW(TransitionMatrix(2, {0.5, 0.4, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(TransitionMatrix(2, {1.2, -0.2, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(TransitionMatrix(2, {1.0, 0.0, 1.0}), ValidationError);
}

TEST(TransitionMatrix, SparseRowsMatchDense)
{
  TransitionMatrix P(3, {0.0, 0.25, 0.75, 1.0, 0.0, 0.0, 0.5, 0.0, 0.5});
  auto row = P.row(0);
  ASSERT_EQ(row.size(), 2u);
  EXPECT_EQ(row[0].to, 1);
  EXPECT_DOUBLE_EQ(row[1].prob, 0.75);
  EXPECT_EQ(P.row(2).size(), 2u);
}

TEST(CellPartition, RejectsOverlapAndGaps)
{
  EXPECT_THROW(CellPartition(3, {{0, 1}, {1, 2}}), ValidationError);
  EXPECT_THROW(CellPartition(3, {{0}, {2}}), ValidationError);
  EXPECT_THROW(CellPartition(2, {{0, 1}, {}}), ValidationError);
  CellPartition c(4, {{0, 1}, {2, 3}});
  EXPECT_EQ(c.cell_of(3), 1);
  EXPECT_EQ(c.n_cells(), 2u);
}

TEST(CostParams, Ranges)
{
  EXPECT_THROW((CostParams{1.0, 1.0, 1.0, 0.9, 1}.validate()), ValidationError);
  EXPECT_THROW((CostParams{0.1, 0.0, 1.0, 0.9, 1}.validate()), ValidationError);
  EXPECT_THROW((CostParams{0.1, 1.0, 1.0, 1.0, 1}.validate()), ValidationError);
  EXPECT_THROW((CostParams{0.1, 1.0, 1.0, 0.9, 0}.validate()), ValidationError);
  EXPECT_NO_THROW((CostParams{0.0, 1.0, 1.0, 0.5, 1}.validate()));
}

TEST(PagingOrder, RankIsCellConstantPermutation)
{
  CellPartition c(4, {{0, 1}, {2, 3}});
  std::vector<int> seq{1, 0};
  auto order = PagingOrder::from_cell_sequence(c, seq);
  EXPECT_EQ(std::vector<int>(order.ranks().begin(), order.ranks().end()), (std::vector<int>{2, 2, 1, 1}));
  EXPECT_THROW(PagingOrder(c, {1, 2, 2, 2}), ValidationError);
  EXPECT_THROW(PagingOrder(c, {1, 1, 1, 1}), ValidationError);
  EXPECT_THROW(PagingOrder(c, {1, 1, 3, 3}), ValidationError);
}

TEST(RegistrationRCL, ForcedLevelIsImplicit)
{
  RegistrationRCL g(3, 2);
  EXPECT_FALSE(g.registers(0, 2, 1));
  EXPECT_TRUE(g.registers(0, 3, 1));
  g.set(1, 1, 2, true);
  EXPECT_TRUE(g.registers(1, 1, 2));
  EXPECT_FALSE(g.registers(1, 1, 1));
  EXPECT_EQ(g.decisions(1, 1)[2], 1);
}

TEST(Torus, ReferenceInstance)
{
  TorusSpec spec{15, 15, 0.4, 0.1, 0.1, 0.1, 0.3, 5, 5};
  auto m = build_torus(spec, CostParams{0.03, 1.0, 0.6, 0.9, 200});
  EXPECT_EQ(m.n_states(), 225u);
  EXPECT_EQ(m.n_cells(), 225u);
  EXPECT_EQ(m.x0(), torus_state(spec, 5, 5));
  expect_row_stochastic(m.transitions());
  auto s = static_cast<std::size_t>(torus_state(spec, 0, 0));
  EXPECT_DOUBLE_EQ(m.transitions()(s, static_cast<std::size_t>(torus_state(spec, 14, 0))), 0.1);
  EXPECT_DOUBLE_EQ(m.transitions()(s, static_cast<std::size_t>(torus_state(spec, 1, 0))), 0.3);
}

TEST(Torus, PureStayIsIdentity)
{
  auto m = build_torus(TorusSpec{2, 2, 1.0, 0, 0, 0, 0, 0, 0}, params());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_DOUBLE_EQ(m.transitions()(i, j), i == j ? 1.0 : 0.0);
}

TEST(Torus, UniformRowsHaveFiveEntries)
{
  auto m = build_torus(TorusSpec{3, 3, 0.2, 0.2, 0.2, 0.2, 0.2, 1, 1}, params());
  for (std::size_t i = 0; i < 9; ++i)
  {
    auto row = m.transitions().row(i);
    ASSERT_EQ(row.size(), 5u);
    for (const auto &t : row)
      EXPECT_DOUBLE_EQ(t.prob, 0.2);
  }
}

TEST(Torus, Errors)
{
  EXPECT_THROW(build_torus(TorusSpec{15, 15, 0.4, 0.1, 0.1, 0.1, 0.2, 5, 5}, params()), ValidationError);
  EXPECT_THROW(build_torus(TorusSpec{1, 15, 0.4, 0.1, 0.1, 0.1, 0.3, 0, 0}, params()), ValidationError);
}

TEST(SimpleExample, Structure)
{
  auto m = build_simple_example(0.05, 1.0, 0.04, 0.9);
  EXPECT_EQ(m.k_max(), 3);
  std::vector<double> row0{0.0, 0.4, 0.0, 0.6, 0.0};
  for (std::size_t j = 0; j < 5; ++j)
  {
    EXPECT_DOUBLE_EQ(m.transitions()(0, j), row0[j]);
    EXPECT_DOUBLE_EQ(m.transitions()(2, j), j == 0 ? 1.0 : 0.0);
  }
  EXPECT_EQ(m.cells().cell_of(0), 0);
  EXPECT_EQ(m.cells().cell_of(1), 1);
  EXPECT_EQ(m.cells().cell_of(2), 1);
  EXPECT_EQ(m.cells().cell_of(3), 2);
  EXPECT_EQ(m.cells().cell_of(4), 2);
  EXPECT_EQ(m.x0(), 0);
}

TEST(SymmetricWalk, BinomialRow)
{
  auto w = build_symmetric_walk(6, FiniteDistribution::centered({0.25, 0.5, 0.25}), params(6));
  EXPECT_EQ(w.model.n_states(), 13u);
  auto c = static_cast<std::size_t>(w.center());
  EXPECT_DOUBLE_EQ(w.model.transitions()(c, c - 1), 0.25);
  EXPECT_DOUBLE_EQ(w.model.transitions()(c, c), 0.5);
  EXPECT_DOUBLE_EQ(w.model.transitions()(c, c + 1), 0.25);
  EXPECT_DOUBLE_EQ(w.model.transitions()(c, c + 2), 0.0);
  expect_row_stochastic(w.model.transitions());
}

TEST(SymmetricWalk, PointKernelIsIdentity)
{
  auto w = build_symmetric_walk(4, FiniteDistribution::point(0), params());
  for (std::size_t i = 0; i < 9; ++i)
    EXPECT_DOUBLE_EQ(w.model.transitions()(i, i), 1.0);
}

TEST(SymmetricWalk, UniformKernelAndTranslationInvariance)
{
  auto w = build_symmetric_walk(8, FiniteDistribution::centered({0.2, 0.2, 0.2, 0.2, 0.2}), params(4));
  const auto &P = w.model.transitions();
  for (std::size_t i = 2; i + 2 < 17; ++i)
  {
    EXPECT_EQ(P.row(i).size(), 5u);
    for (const auto &t : P.row(i))
      EXPECT_DOUBLE_EQ(t.prob, 0.2);
  }
  for (std::size_t i = 2; i + 3 < 17; ++i)
    for (std::size_t j = 0; j + 1 < 17; ++j)
      EXPECT_DOUBLE_EQ(P(i, j), P(i + 1, j + 1));
}

TEST(SymmetricWalk, Errors)
{
  EXPECT_THROW(build_symmetric_walk(6, FiniteDistribution::centered({0.2, 0.5, 0.3}), params(2)), ValidationError);
  EXPECT_THROW(build_symmetric_walk(6, FiniteDistribution::centered({0.3, 0.2, 0.3}), params(2)), ValidationError);
  EXPECT_THROW(build_symmetric_walk(3, FiniteDistribution::centered({0.25, 0.5, 0.25}), params(4)), ValidationError);
}
