#include <gtest/gtest.h>

#include <cmath>

#include "empa/json.hpp"
#include "empa/rubric.hpp"
#include "oracle.hpp"

namespace empa::rubric {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no empa::Error thrown";
  return ErrorCode::kIoError;
}

TEST(IedrScore, KeyCells) {
  EXPECT_EQ(iedr_score(Indicator::kC1, 2), -4);
  EXPECT_EQ(iedr_score(Indicator::kA2, 3), -12);
  EXPECT_EQ(iedr_score(Indicator::kP3, 0), 0);
}

TEST(IedrScore, AllTwelveCellsMatchKey) {
  for (Indicator id : kIndicators) {
    const int row = static_cast<int>(weight_class(id));
    for (int level = 0; level <= 3; ++level) {
      EXPECT_EQ(iedr_score(id, level), oracle::kIedr[row][level]) << to_string(id) << " " << level;
    }
  }
}

TEST(IedrScore, WeightClassAssignment) {
  EXPECT_EQ(weight_class(Indicator::kC1), WeightClass::kStandard);
  EXPECT_EQ(weight_class(Indicator::kC2), WeightClass::kStandard);
  EXPECT_EQ(weight_class(Indicator::kA1), WeightClass::kStandard);
  EXPECT_EQ(weight_class(Indicator::kP1), WeightClass::kStandard);
  EXPECT_EQ(weight_class(Indicator::kC3), WeightClass::kPriority);
  EXPECT_EQ(weight_class(Indicator::kA3), WeightClass::kPriority);
  EXPECT_EQ(weight_class(Indicator::kP3), WeightClass::kPriority);
  EXPECT_EQ(weight_class(Indicator::kA2), WeightClass::kCore);
  EXPECT_EQ(weight_class(Indicator::kP2), WeightClass::kCore);
}

TEST(IedrScore, MonotoneInLevel) {
  for (Indicator id : kIndicators) {
    for (int level = 1; level <= 3; ++level) {
      EXPECT_GT(std::abs(iedr_score(id, level)), std::abs(iedr_score(id, level - 1)));
    }
  }
}

TEST(IedrScore, Errors) {
  EXPECT_EQ(code_of([] { parse_indicator("C.4"); }), ErrorCode::kUnknownIndicator);
  EXPECT_EQ(code_of([] { iedr_score(Indicator::kC1, 7); }), ErrorCode::kInvalidLevel);
  EXPECT_EQ(code_of([] { iedr_score(Indicator::kC1, -1); }), ErrorCode::kInvalidLevel);
}

TEST(AssembleInitialState, MaximalDeficit) {
  const InitialState s = assemble_initial_state(uniform_assessment(3));
  EXPECT_EQ(s.p0, (PsychState{-21, -27, -27}));
  EXPECT_NEAR(s.r0, std::sqrt(1899.0), 1e-9);
  EXPECT_NEAR(s.r0, oracle::len({-21, -27, -27}), 1e-12);
  EXPECT_FALSE(s.degenerate);
}

TEST(AssembleInitialState, AllZeroIsDegenerate) {
  const InitialState s = assemble_initial_state(uniform_assessment(0));
  EXPECT_EQ(s.p0, (PsychState{0, 0, 0}));
  EXPECT_EQ(s.r0, 0.0);
  EXPECT_TRUE(s.degenerate);
}

TEST(AssembleInitialState, SingleAxisSum) {
  IedrAssessment a = uniform_assessment(0);
  a.indicators[0] = {Indicator::kC1, 1, "quote", "why"};
  a.indicators[2] = {Indicator::kC3, 2, "quote", "why"};
  const InitialState s = assemble_initial_state(a);
  EXPECT_EQ(s.p0, (PsychState{-8, 0, 0}));
}

TEST(AssembleInitialState, MissingAndDuplicate) {
  IedrAssessment a = uniform_assessment(1);
  a.indicators.pop_back();
  EXPECT_EQ(code_of([&] { assemble_initial_state(a); }), ErrorCode::kMissingIndicator);
  a = uniform_assessment(1);
  a.indicators[8].id = Indicator::kC1;
  EXPECT_EQ(code_of([&] { assemble_initial_state(a); }), ErrorCode::kDuplicateIndicator);
}

TEST(AssembleInitialState, NonzeroLevelNeedsEvidence) {
  IedrAssessment a = uniform_assessment(1);
  a.indicators[4].evidence = "";
  EXPECT_EQ(code_of([&] { assemble_initial_state(a); }), ErrorCode::kMissingEvidence);
  a.indicators[4].evidence = "0";
  EXPECT_EQ(code_of([&] { assemble_initial_state(a); }), ErrorCode::kMissingEvidence);
}

TEST(MdepScore, KeyCells) {
  EXPECT_EQ(mdep_score(AxisId::kAffective, Channel::kProg, 2), 3);
  EXPECT_EQ(mdep_score(AxisId::kAffective, Channel::kNeg, -2), -5);
  EXPECT_EQ(mdep_score(AxisId::kCognitive, Channel::kNeg, -2), -4);
}

TEST(MdepScore, AllEighteenCellsMatchKey) {
  for (AxisId axis : kAxes) {
    const auto i = index_of(axis);
    for (int level = 0; level <= 2; ++level) {
      EXPECT_EQ(mdep_score(axis, Channel::kProg, level), oracle::kProg[i][level]);
      EXPECT_EQ(mdep_score(axis, Channel::kNeg, -level), oracle::kNeg[i][level]);
    }
  }
}

TEST(MdepScore, RegressionOutweighsProgress) {
  for (AxisId axis : kAxes) {
    EXPECT_GT(std::abs(mdep_score(axis, Channel::kNeg, -2)), mdep_score(axis, Channel::kProg, 2));
    for (int level = 1; level <= 2; ++level) {
      EXPECT_GE(std::abs(mdep_score(axis, Channel::kNeg, -level)),
                std::abs(mdep_score(axis, Channel::kNeg, -level + 1)));
      EXPECT_GE(mdep_score(axis, Channel::kProg, level), mdep_score(axis, Channel::kProg, level - 1));
    }
  }
}

TEST(MdepScore, InvalidLevels) {
  EXPECT_EQ(code_of([] { mdep_score(AxisId::kCognitive, Channel::kProg, 3); }),
            ErrorCode::kInvalidLevel);
  EXPECT_EQ(code_of([] { mdep_score(AxisId::kCognitive, Channel::kProg, -1); }),
            ErrorCode::kInvalidLevel);
  EXPECT_EQ(code_of([] { mdep_score(AxisId::kCognitive, Channel::kNeg, 1); }),
            ErrorCode::kInvalidLevel);
}

TEST(AssembleActionVector, Examples) {
  EXPECT_EQ(assemble_action_vector(make_window(1, {{{1, 0}, {2, -1}, {0, 0}}})),
            (ActionVector{1, 1, 0}));
  EXPECT_EQ(assemble_action_vector(make_window(1, {{{0, 0}, {0, 0}, {0, 0}}})),
            (ActionVector{0, 0, 0}));
  EXPECT_EQ(assemble_action_vector(make_window(1, {{{2, -2}, {0, -2}, {2, 0}}})),
            (ActionVector{-1, -5, 3}));
}

TEST(AssembleActionVector, MissingChannel) {
  auto w = make_window(1, {{{1, 0}, {1, 0}, {1, 0}}});
  w.channels.erase(w.channels.begin() + 3);
  EXPECT_EQ(code_of([&] { assemble_action_vector(w); }), ErrorCode::kMissingChannel);
}

TEST(AssembleActionVector, NonzeroLevelNeedsReasoning) {
  auto w = make_window(1, {{{1, 0}, {0, 0}, {0, 0}}});
  w.channels[0].reasoning.clear();
  EXPECT_EQ(code_of([&] { assemble_action_vector(w); }), ErrorCode::kMissingEvidence);
}

// All 3^6 level combinations stay inside the [-5, 3] component range.
TEST(AssembleActionVector, RangeOverAllCombinations) {
  int count = 0;
  for (int cp = 0; cp <= 2; ++cp)
    for (int cn = 0; cn <= 2; ++cn)
      for (int ap = 0; ap <= 2; ++ap)
        for (int an = 0; an <= 2; ++an)
          for (int pp = 0; pp <= 2; ++pp)
            for (int pn = 0; pn <= 2; ++pn) {
              const auto v = assemble_action_vector(
                  make_window(1, {{{cp, -cn}, {ap, -an}, {pp, -pn}}}));
              for (AxisId axis : kAxes) {
                EXPECT_GE(v[axis], -5.0);
                EXPECT_LE(v[axis], 3.0);
              }
              ++count;
            }
  EXPECT_EQ(count, 729);
}

TEST(PenaltyIntensity, Scaling) {
  EXPECT_EQ(penalty_intensity(make_window(1, {{{2, 0}, {1, 0}, {0, 0}}})), 0.0);
  EXPECT_EQ(penalty_intensity(make_window(1, {{{0, -2}, {0, -2}, {0, -2}}})), 3.0);
  EXPECT_EQ(penalty_intensity(make_window(1, {{{0, 0}, {0, -1}, {0, 0}}})), 0.5);
}

TEST(RubricJson, RejectsNonIntegerLevels) {
  json j = {{"id", "C.1"}, {"level", 2.5}, {"evidence", "q"}, {"reasoning", "r"}};
  EXPECT_EQ(code_of([&] { j.get<IedrIndicator>(); }), ErrorCode::kInvalidLevel);
  j["level"] = "2";
  EXPECT_EQ(code_of([&] { j.get<IedrIndicator>(); }), ErrorCode::kInvalidLevel);
}

TEST(RubricJson, WindowRoundTripIsIdempotent) {
  const auto w = make_window(4, {{{2, -1}, {0, -2}, {1, 0}}}, "you sound exhausted");
  const json once = w;
  const json twice = once.get<MdepWindowRating>();
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once.get<MdepWindowRating>(), w);
}

}  // namespace
}  // namespace empa::rubric
