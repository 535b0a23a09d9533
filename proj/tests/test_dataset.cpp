#include <gtest/gtest.h>

#include <sstream>

#include "pseudopop/dataset.hpp"
#include "pseudopop/errors.hpp"
#include "support.hpp"

namespace pseudopop {
namespace {

const char* kSmallCsv =
    "S,Z,X1,X2,Y1\n"
    "1,1,0.5,1,2.0\n"
    "1,2,0.25,0,3.0\n"
    "2,1,1.5,1,4.0\n"
    "2,2,-1,0,5.0\n";

TEST(Dataset, ReadsDefaultSchema) {
  std::istringstream in(kSmallCsv);
  const Dataset d = read_dataset(in);
  EXPECT_EQ(d.n_subjects(), 4u);
  EXPECT_EQ(d.n_studies, 2u);
  EXPECT_EQ(d.n_groups, 2u);
  EXPECT_EQ(d.n_covariates(), 2u);
  EXPECT_EQ(d.n_outcomes(), 1u);
  EXPECT_EQ(d.study, (std::vector<std::size_t>{0, 0, 1, 1}));
  EXPECT_EQ(d.group, (std::vector<std::size_t>{0, 1, 0, 1}));
  EXPECT_DOUBLE_EQ(d.covariates(3, 0), -1.0);
  EXPECT_EQ(d.covariate_names, (std::vector<std::string>{"X1", "X2"}));
}

TEST(Dataset, IntegerLabelsKeepNumericOrder) {
  std::istringstream in("S,Z,X1,Y1\n10,2,0,1\n9,1,0,1\n10,1,0,1\n9,2,0,1\n");
  const Dataset d = read_dataset(in);
  EXPECT_EQ(d.study_labels, (std::vector<std::string>{"9", "10"}));
  EXPECT_EQ(d.study, (std::vector<std::size_t>{1, 0, 1, 0}));
}

TEST(Dataset, TextLabelsKeepFirstAppearance) {
  std::istringstream in("S,Z,X1,Y1\nb,IDC,0,1\na,ILC,0,1\nb,ILC,0,1\na,IDC,0,1\n");
  const Dataset d = read_dataset(in);
  EXPECT_EQ(d.study_labels, (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(d.group_labels, (std::vector<std::string>{"IDC", "ILC"}));
}

TEST(Dataset, QuotedFields) {
  std::istringstream in("\"S\",\"Z\",\"X1\",\"Y1\"\n\"s,1\",1,1,2\n\"s,1\",2,1,2\n");
  const Dataset d = read_dataset(in);
  EXPECT_EQ(d.study_labels, (std::vector<std::string>{"s,1"}));
}

TEST(Dataset, MissingColumn) {
  std::istringstream in("S,X1,Y1\n1,0,1\n");
  EXPECT_THROW(read_dataset(in), MissingColumn);
}

TEST(Dataset, GapInPrefixedColumns) {
  std::istringstream in("S,Z,X1,X3,Y1\n1,1,0,0,1\n");
  try {
    read_dataset(in);
    FAIL() << "expected MissingColumn";
  } catch (const MissingColumn& e) {
    EXPECT_NE(std::string(e.what()).find("X2"), std::string::npos);
  }
}

TEST(Dataset, NonFiniteValueNamesRowAndColumn) {
  std::istringstream in("S,Z,X1,Y1\n1,1,0,1\n1,2,NA,1\n");
  try {
    read_dataset(in);
    FAIL() << "expected NonFiniteValue";
  } catch (const NonFiniteValue& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "X1");
  }
}

TEST(Dataset, EmptyCellIsReported) {
  std::istringstream in("S,Z,X1,Y1\n1,1,0,1\n1,2,0,1\n2,1,0,1\n");
  try {
    validate(read_dataset(in));
    FAIL() << "expected EmptyCell";
  } catch (const EmptyCell& e) {
    EXPECT_EQ(e.study(), 2u);
    EXPECT_EQ(e.group(), 2u);
  }
}

TEST(Dataset, ExplicitSchema) {
  std::istringstream in("site,subtype,age,er,expr\n1,1,50,1,0.1\n1,2,60,0,0.2\n");
  CsvSchema schema;
  schema.study_column = "site";
  schema.group_column = "subtype";
  schema.covariate_columns = {"age", "er"};
  schema.outcome_columns = {"expr"};
  const Dataset d = read_dataset(in, schema);
  EXPECT_EQ(d.n_covariates(), 2u);
  EXPECT_DOUBLE_EQ(d.covariates(1, 0), 60.0);
  EXPECT_DOUBLE_EQ(d.outcomes(1, 0), 0.2);
}

TEST(Dataset, WriteReadRoundTripIsExact) {
  const Dataset d = testing::random_dataset(3, 2, 40, 4, 2, 11);
  std::ostringstream out;
  write_dataset(d, out);
  std::istringstream in(out.str());
  const Dataset back = read_dataset(in);
  EXPECT_EQ(back.covariates, d.covariates);
  EXPECT_EQ(back.outcomes, d.outcomes);
  EXPECT_EQ(back.study, d.study);
  EXPECT_EQ(back.group, d.group);
}

TEST(Dataset, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Dataset, SubsetKeepsDimensions) {
  const Dataset d = testing::random_dataset(2, 2, 10, 3, 1, 5);
  const std::vector<std::size_t> rows{0, 0, 3};
  const Dataset s = d.subset(rows);
  EXPECT_EQ(s.n_subjects(), 3u);
  EXPECT_EQ(s.n_studies, 2u);
  EXPECT_EQ(s.covariates(1, 2), d.covariates(0, 2));
}

TEST(GroupPrevalence, Validates) {
  EXPECT_NO_THROW(GroupPrevalence({0.25, 0.75}));
  EXPECT_THROW(GroupPrevalence({0.3, 0.3}), ValidationError);
  EXPECT_THROW(GroupPrevalence({0.0, 1.0}), ValidationError);
  const GroupPrevalence g({0.8888889, 0.1111111}, true);
  EXPECT_NEAR(g.values()[0] + g.values()[1], 1.0, 1e-15);
}

TEST(Dataset, CellCounts) {
  const Dataset d = testing::constant_balanced(2, 3, 4);
  for (const auto& row : cell_counts(d)) {
    for (auto c : row) EXPECT_EQ(c, 4u);
  }
}

}  // namespace
}  // namespace pseudopop
