#include <gtest/gtest.h>

#include "qsd/errors.hpp"
#include "qsd/state_io.hpp"
#include "qsd/state_model.hpp"
#include "test_support.hpp"

using namespace qsd;
using namespace qsd::testing;

namespace {

bool failed(const Diagnostics& d, const std::string& name) {
  for (const Check& c : d.checks)
    if (c.name == name) return !c.passed;
  return false;
}

}  // namespace

TEST(StateSet, StructuralErrors) {
  EXPECT_THROW(StateSet({}), InputError);
  EXPECT_THROW(StateSet({{0.5, HermitianOperator::identity(2) * 0.5}, {0.5, HermitianOperator::identity(3) * (1.0 / 3.0)}}),
               InputError);
}

TEST(StateSet, ValidateFlagsViolations) {
  EXPECT_TRUE(validate(identical_pair()).ok());
  const HermitianOperator half = 0.5 * HermitianOperator::identity(2);
  const Diagnostics sum = validate(StateSet({{0.3, half}, {0.6, half}}));
  EXPECT_FALSE(sum.ok());
  EXPECT_TRUE(failed(sum, "prior_sum"));

  const Diagnostics neg = validate(StateSet({{1.0, HermitianOperator::diagonal(Eigen::Vector2d(1.5, -0.5))}}));
  EXPECT_TRUE(failed(neg, "state[0].psd"));

  const Diagnostics tr = validate(StateSet({{1.0, HermitianOperator::identity(2)}}));
  EXPECT_TRUE(failed(tr, "state[0].unit_trace"));
}

TEST(StateSet, SwapAndGram) {
  const StateSet s = identical_pair().with_swapped(1);
  EXPECT_DOUBLE_EQ(s.prior(0), 0.7);
  EXPECT_DOUBLE_EQ(s.prior(1), 0.3);
  EXPECT_LE(max_abs(gram(s).matrix() - 0.5 * Matrix::Identity(2, 2)), 1e-15);
  EXPECT_THROW(identical_pair().with_swapped(2), ContractError);
}

TEST(Probabilities, AlwaysGuessLikelier) {
  const Povm povm({HermitianOperator::zero(2), HermitianOperator::identity(2)}, false);
  const Probabilities p = probabilities(identical_pair(), povm);
  EXPECT_NEAR(p.success, 0.7, 1e-15);
  EXPECT_NEAR(p.error, 0.3, 1e-15);
  EXPECT_EQ(p.inconclusive, 0.0);
}

TEST(Probabilities, InconclusiveOutcome) {
  const HermitianOperator q = 0.25 * HermitianOperator::identity(2);
  const Povm povm({q, q, 2.0 * q}, true);
  const Probabilities p = probabilities(identical_pair(), povm);
  EXPECT_NEAR(p.success, 0.25, 1e-15);
  EXPECT_NEAR(p.inconclusive, 0.5, 1e-15);
  EXPECT_NEAR(p.success + p.error + p.inconclusive, 1.0, 1e-15);
  EXPECT_THROW(probabilities(identical_pair(), Povm({HermitianOperator::identity(2)}, false)), InputError);
}

TEST(Povm, ValidateAndMix) {
  const Povm a({HermitianOperator::zero(2), HermitianOperator::identity(2)}, false);
  const Povm b({HermitianOperator::identity(2), HermitianOperator::zero(2)}, false);
  EXPECT_TRUE(a.validate().ok());
  const Povm m = Povm::mix(a, b, 0.25);
  EXPECT_TRUE(m.validate().ok());
  EXPECT_NEAR(m[0].trace(), 1.5, 1e-15);
  const Povm bad({HermitianOperator::identity(2), HermitianOperator::identity(2)}, false);
  EXPECT_FALSE(bad.validate().ok());
  EXPECT_THROW(bad.require_valid(1e-9, "test"), NumericalError);
}

TEST(RandomEnsemble, ValidAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const StateSet s = random_state_set(4, 3, 2, seed);
    EXPECT_TRUE(validate(s).ok()) << validate(s).summary();
    for (std::size_t m = 0; m < s.size(); ++m) EXPECT_NEAR(proj_pos(s.density(m)).trace(), 2.0, 1e-12);
    const StateSet again = random_state_set(4, 3, 2, seed);
    for (std::size_t m = 0; m < s.size(); ++m) {
      EXPECT_EQ(s.prior(m), again.prior(m));
      EXPECT_EQ(s.density(m).matrix(), again.density(m).matrix());
    }
  }
  EXPECT_THROW(random_state_set(2, 2, 3, 1), InputError);
}

TEST(StateIo, RoundTripIsExact) {
  const StateSet s = random_state_set(3, 4, 2, 99);
  const StateSet back = state_set_from_json(to_json(s));
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t m = 0; m < s.size(); ++m) {
    EXPECT_EQ(back.prior(m), s.prior(m));
    EXPECT_EQ(back.density(m).matrix(), s.density(m).matrix());
  }
  const Povm p({HermitianOperator::zero(3), 0.5 * HermitianOperator::identity(3), 0.5 * HermitianOperator::identity(3)},
               true);
  const Povm pb = povm_from_json(to_json(p));
  EXPECT_TRUE(pb.has_inconclusive());
  EXPECT_EQ(pb[2].matrix(), p[2].matrix());
}

TEST(StateIo, SchemaErrorsCarryPaths) {
  auto path_of = [](const std::string& text) {
    try {
      state_set_from_json(text);
    } catch (const SchemaError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  const std::string d1 = R"({"re": [[1]], "im": [[0]]})";
  EXPECT_EQ(path_of(R"({"dim": 1, "states": [{"prior": 0.5, "density": )" + d1 + R"(}, {"density": )" + d1 + "}]}"),
            "$.states[1].prior");
  EXPECT_EQ(path_of(R"({"dim": 2, "states": [{"prior": 1, "density": )" + d1 + "}]}"), "$.states[0].density.re");
  EXPECT_EQ(path_of("{\"dim\": 1, "), "$");
  EXPECT_EQ(path_of(R"({"states": []})"), "$.dim");
}
