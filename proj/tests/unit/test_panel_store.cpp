#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "oracles.hpp"
#include "vcg/panel_store.hpp"

using namespace vcg;

namespace {

const char* kHeader = "country,group,year,y,lnn,lnsk,lnattain,pov,gini,middleclass,y_poor,y_rich\n";

std::string row(const std::string& c, int year, double y = 8.0, double pov = 0.2) {
  std::ostringstream s;
  s << c << ",Asia," << year << "," << y << ",-2.6,-1.5,1.1," << pov << ",0.4,0.5," << y - 1 << "," << y + 1 << "\n";
  return s.str();
}

Panel parse(const std::string& body) {
  std::istringstream in(std::string(kHeader) + body);
  return read_panel(in);
}

}  // namespace

TEST(PanelStore, MinimalBalancedPanel) {
  const Panel p = parse(row("A", 2000) + row("A", 2001) + row("A", 2002) + row("B", 2000) + row("B", 2001) +
                        row("B", 2002));
  EXPECT_EQ(p.n(), 2u);
  EXPECT_EQ(p.T(), 3u);
  EXPECT_EQ(p.observations().size(), 6u);
}

TEST(PanelStore, MissingRowIsUnbalanced) {
  EXPECT_VCG_ERROR(parse(row("A", 2000) + row("A", 2001) + row("A", 2002) + row("B", 2000) + row("B", 2002)),
                   ErrorCode::UnbalancedPanel);
}

TEST(PanelStore, GapInYearsIsUnbalanced) {
  EXPECT_VCG_ERROR(parse(row("A", 2000) + row("A", 2002)), ErrorCode::UnbalancedPanel);
}

TEST(PanelStore, DuplicateRow) {
  EXPECT_VCG_ERROR(parse(row("A", 2000) + row("A", 2000) + row("A", 2001)), ErrorCode::DuplicateRow);
}

TEST(PanelStore, NonFiniteValueIsRowAddressed) {
  try {
    parse(row("A", 2000) + "A,Asia,2001,nan,-2.6,-1.5,1.1,0.2,0.4,0.5,7,9\n");
    FAIL() << "expected NonFiniteValue";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteValue);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(PanelStore, MissingColumn) {
  std::istringstream in("country,group,year,y\nA,Asia,2000,1\n");
  EXPECT_VCG_ERROR(read_panel(in), ErrorCode::MissingColumn);
}

TEST(PanelStore, RangeChecks) {
  EXPECT_VCG_ERROR(parse(row("A", 2000, 8.0, 1.5)), ErrorCode::InvalidValue);
  EXPECT_VCG_ERROR(parse("A,Asia,2000,8,-2.6,-1.5,1.1,0.2,1.0,0.5,7,9\n"), ErrorCode::InvalidValue);
  EXPECT_VCG_ERROR(parse("A,Asia,2000,8,-2.6,-1.5,1.1,0.2,0.4,0,7,9\n"), ErrorCode::InvalidValue);
  EXPECT_VCG_ERROR(parse("A,Asia,2000,8,-2.6,-1.5,1.1,0.2,0.4,0.5,9.5,9\n"), ErrorCode::InvalidValue);
}

TEST(PanelStore, UnknownGroupLabel) {
  EXPECT_VCG_ERROR(parse("A,Mars,2000,8,-2.6,-1.5,1.1,0.2,0.4,0.5,7,9\n"), ErrorCode::InvalidValue);
}

TEST(PanelStore, UnmappedCountry) {
  std::vector<PanelObservation> obs(1);
  obs[0].country = "A";
  obs[0].year = 2000;
  obs[0].middleclass = 0.5;
  EXPECT_VCG_ERROR(Panel::from_observations(obs, {}), ErrorCode::UnmappedCountry);
}

TEST(PanelStore, RowsNormalizedCountryMajor) {
  const Panel p = parse(row("B", 2001) + row("A", 2001) + row("B", 2000) + row("A", 2000));
  ASSERT_EQ(p.countries(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(p.at(0, 0).country, "A");
  EXPECT_EQ(p.at(0, 1).year, 2001);
  EXPECT_EQ(p.at(1, 0).country, "B");
}

TEST(PanelStore, SchemaMapsColumnNames) {
  PanelSchema s;
  s.country = "iso";
  s.y = "lgdp";
  std::string text = kHeader;
  text.replace(0, 7, "iso");
  text.replace(text.find(",y,"), 3, ",lgdp,");
  std::istringstream in(text + row("A", 2000) + row("A", 2001));
  const Panel p = read_panel(in, s);
  EXPECT_EQ(p.n(), 1u);
  EXPECT_EQ(p.at(0, 1).y, 8.0);
}

TEST(PanelStore, FullScaleFixture) {
  const Panel p = ingest_panel(std::string(VCG_FIXTURES_DIR) + "/synthetic81.csv");
  EXPECT_EQ(p.n(), 81u);
  EXPECT_EQ(p.T(), 31u);
  EXPECT_EQ(p.years().front(), 1970);
  EXPECT_EQ(p.years().back(), 2000);
}

TEST(PanelStore, ExportIngestRoundTrip) {
  const Panel p = oracle::toy_panel(4, 6, 11);
  std::stringstream buf;
  write_panel(buf, p);
  const Panel q = read_panel(buf);
  EXPECT_EQ(p, q);
}

TEST(LagAlign, LagThreeGives28Periods) {
  const Panel p = ingest_panel(std::string(VCG_FIXTURES_DIR) + "/synthetic81.csv");
  const AlignedPanel a = lag_align(p, DependentVariable::y, 3);
  EXPECT_EQ(a.periods, 28u);
  EXPECT_EQ(a.rows(), 81u * 28u);
  EXPECT_EQ(a.year.front(), 1973);
  EXPECT_EQ(a.year[27], 2000);
}

TEST(LagAlign, RowCount) {
  const AlignedPanel a = lag_align(oracle::toy_panel(2, 5), DependentVariable::y, 1);
  EXPECT_EQ(a.rows(), 8u);
}

TEST(LagAlign, RejectsBadLags) {
  const Panel p = oracle::toy_panel(2, 5);
  EXPECT_VCG_ERROR(lag_align(p, DependentVariable::y, 0), ErrorCode::InvalidLag);
  EXPECT_VCG_ERROR(lag_align(p, DependentVariable::y, 4), ErrorCode::LagTooDeep);
  EXPECT_NO_THROW(lag_align(p, DependentVariable::y, 3));
}

TEST(LagAlign, PairsCurrentWithLaggedValues) {
  const Panel p = oracle::toy_panel(3, 7, 5);
  const int l = 2;
  for (auto dep : {DependentVariable::y, DependentVariable::y_poor, DependentVariable::y_rich}) {
    const AlignedPanel a = lag_align(p, dep, l);
    std::size_t r = 0;
    for (std::size_t i = 0; i < p.n(); ++i) {
      for (std::size_t t = l; t < p.T(); ++t, ++r) {
        const auto& now = p.at(i, t);
        const auto& past = p.at(i, t - l);
        const double want_now = dep == DependentVariable::y ? now.y : dep == DependentVariable::y_poor ? now.y_poor : now.y_rich;
        const double want_lag = dep == DependentVariable::y ? past.y : dep == DependentVariable::y_poor ? past.y_poor : past.y_rich;
        const auto ri = static_cast<Eigen::Index>(r);
        ASSERT_EQ(a.y(ri), want_now);
        ASSERT_EQ(a.y_lag(ri), want_lag);
        ASSERT_EQ(a.x(ri, 1), past.lnsk);
        ASSERT_EQ(a.z(ri, 2), past.middleclass);
        ASSERT_EQ(a.country_index[r], i);
        ASSERT_EQ(a.year[r], now.year);
      }
    }
  }
}

TEST(LagAlign, ParseDependent) {
  EXPECT_EQ(parse_dependent("y_rich"), DependentVariable::y_rich);
  EXPECT_VCG_ERROR((void)parse_dependent("gdp"), ErrorCode::InvalidArgument);
}
