#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>

#include "gripstream/analytics.hpp"
#include "gripstream/error.hpp"
#include "gripstream/stats.hpp"

namespace gs = gripstream;

namespace {

// P(F > f) for F(d1, d2) by composite Simpson integration of the density
// after the substitution x = f' / (1 + f'), which maps [f, inf) onto [f/(1+f), 1).
double f_survival_quadrature(double f, double d1, double d2) {
  const double log_norm = std::lgamma((d1 + d2) / 2) - std::lgamma(d1 / 2) - std::lgamma(d2 / 2) +
                          (d1 / 2) * std::log(d1 / d2);
  auto density_x = [&](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double t = x / (1.0 - x);
    const double pdf = std::exp(log_norm + (d1 / 2 - 1) * std::log(t) - ((d1 + d2) / 2) * std::log1p(d1 / d2 * t));
    return pdf / ((1.0 - x) * (1.0 - x));
  };
  const double a = f / (1.0 + f);
  const int n = 200'000;
  const double h = (1.0 - a) / n;
  double sum = density_x(a) + density_x(1.0);
  for (int i = 1; i < n; ++i) sum += density_x(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Two-way sums of squares from their definitions, one observation at a time.
struct BruteTwoWay {
  double ss_a = 0, ss_b = 0, ss_ab = 0, ss_e = 0, ss_t = 0;
};

BruteTwoWay brute_twoway(const gs::TwoWayTable& t) {
  const std::size_t a = t.size(), b = t[0].size(), r = t[0][0].size();
  auto mean_where = [&](auto pred) {
    long double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j)
        for (std::size_t k = 0; k < r; ++k)
          if (pred(i, j)) {
            s += t[i][j][k];
            ++n;
          }
    return static_cast<double>(s / n);
  };
  const double grand = mean_where([](auto, auto) { return true; });
  BruteTwoWay out;
  for (std::size_t i = 0; i < a; ++i) {
    const double ai = mean_where([&](auto x, auto) { return x == i; });
    for (std::size_t j = 0; j < b; ++j) {
      const double bj = mean_where([&](auto, auto y) { return y == j; });
      const double cij = mean_where([&](auto x, auto y) { return x == i && y == j; });
      for (std::size_t k = 0; k < r; ++k) {
        const double y = t[i][j][k];
        out.ss_a += (ai - grand) * (ai - grand);
        out.ss_b += (bj - grand) * (bj - grand);
        out.ss_ab += (cij - ai - bj + grand) * (cij - ai - bj + grand);
        out.ss_e += (y - cij) * (y - cij);
        out.ss_t += (y - grand) * (y - grand);
      }
    }
  }
  return out;
}

void expect_rel(double actual, double expected, double tol, const char* what) {
  const double scale = std::max(std::abs(expected), 1e-12);
  EXPECT_LE(std::abs(actual - expected) / scale, tol) << what << ": " << actual << " vs " << expected;
}

gs::Session constant_session(std::array<std::uint16_t, gs::kSensorCount> mv, std::size_t n, gs::Hand hand = {},
                             std::string condition = "soft") {
  gs::Session s;
  s.metadata.hand = hand;
  s.metadata.condition = std::move(condition);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ts = static_cast<std::uint32_t>(20 * i);
    for (std::size_t k = 0; k < gs::kSensorCount; ++k) s.samples[k].push_back({ts, mv[k]});
    s.battery_trace.push_back({ts, 4200});
  }
  return s;
}

const gs::GloveConfig kCfg{};
const gs::Calibration kCal{};

}  // namespace

TEST(IncompleteBeta, MatchesBoost) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> shape(0.1, 60.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const double a = shape(rng), b = shape(rng), x = unit(rng);
    EXPECT_NEAR(gs::stats::regularized_incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-10)
        << a << ' ' << b << ' ' << x;
  }
  EXPECT_EQ(gs::stats::regularized_incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(gs::stats::regularized_incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(FDistribution, SurvivalMatchesBoostAndQuadrature) {
  for (const auto& [f, d1, d2] : std::vector<std::tuple<double, double, double>>{
           {1.5, 1, 4}, {0.3, 2, 10}, {4.2, 3, 36}, {12.0, 1, 38}, {0.0, 2, 5}}) {
    const double ours = gs::stats::f_survival(f, d1, d2);
    EXPECT_NEAR(ours, boost::math::cdf(boost::math::complement(boost::math::fisher_f(d1, d2), f)), 1e-10);
    if (f > 0) {
      EXPECT_NEAR(ours, f_survival_quadrature(f, d1, d2), 1e-6);
    }
    EXPECT_NEAR(ours + gs::stats::f_cdf(f, d1, d2), 1.0, 1e-12);
  }
  EXPECT_EQ(gs::stats::f_survival(std::numeric_limits<double>::infinity(), 2, 3), 0.0);
}

TEST(AnovaOneway, TextbookExample) {
  const std::vector<std::vector<double>> groups{{1, 2, 3}, {2, 3, 4}};
  const auto r = gs::anova_oneway(groups);
  EXPECT_DOUBLE_EQ(r.ss_between, 1.5);
  EXPECT_DOUBLE_EQ(r.ss_within, 4.0);
  EXPECT_DOUBLE_EQ(r.f_stat, 1.5);
  EXPECT_EQ(r.df_between, 1);
  EXPECT_EQ(r.df_within, 4);
  // Closed form for I_x(1/2, 2) = 1.5 sqrt(x) - 0.5 x^1.5.
  const double x = 1.5 / 5.5;
  const double closed = 1.0 - (1.5 * std::sqrt(x) - 0.5 * std::pow(x, 1.5));
  EXPECT_NEAR(r.p_value, closed, 1e-12);
  EXPECT_NEAR(r.p_value, f_survival_quadrature(1.5, 1, 4), 1e-6);
  EXPECT_NEAR(r.p_value, 0.2879, 1e-3);
}

TEST(AnovaOneway, TranslationAndScaleInvariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(5.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> g(2 + rng() % 4);
    for (auto& grp : g) {
      grp.resize(2 + rng() % 6);
      for (auto& y : grp) y = z(rng);
    }
    const auto base = gs::anova_oneway(g);
    expect_rel(base.ss_between + base.ss_within, base.ss_total, 1e-9, "decomposition");
    EXPECT_GE(base.p_value, 0.0);
    EXPECT_LE(base.p_value, 1.0);

    const double shift = std::uniform_real_distribution<double>(-100, 100)(rng);
    const double scale = std::uniform_real_distribution<double>(0.01, 100)(rng);
    auto shifted = g, scaled = g;
    for (auto& grp : shifted) for (auto& y : grp) y += shift;
    for (auto& grp : scaled) for (auto& y : grp) y *= scale;
    const auto rs = gs::anova_oneway(shifted);
    const auto rc = gs::anova_oneway(scaled);
    expect_rel(rs.f_stat, base.f_stat, 1e-7, "shift F");
    expect_rel(rc.f_stat, base.f_stat, 1e-9, "scale F");
    EXPECT_NEAR(rs.p_value, base.p_value, 1e-7);
    EXPECT_NEAR(rc.p_value, base.p_value, 1e-9);
  }
}

TEST(AnovaOneway, EqualMeansGiveZeroF) {
  const std::vector<std::vector<double>> groups{{1, 3}, {0, 4}, {2, 2}};
  const auto r = gs::anova_oneway(groups);
  EXPECT_EQ(r.f_stat, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(AnovaOneway, ErrorCases) {
  EXPECT_THROW(gs::anova_oneway(std::vector<std::vector<double>>{{1, 2}}), gs::InsufficientDataError);
  EXPECT_THROW(gs::anova_oneway(std::vector<std::vector<double>>{{1, 2}, {3}}), gs::InsufficientDataError);
  EXPECT_THROW(gs::anova_oneway(std::vector<std::vector<double>>{{2, 2}, {2, 2}}), gs::UndefinedStatisticError);
  const auto inf = gs::anova_oneway(std::vector<std::vector<double>>{{1, 1}, {2, 2}});
  EXPECT_TRUE(std::isinf(inf.f_stat));
  EXPECT_EQ(inf.p_value, 0.0);
}

TEST(AnovaTwoway, MatchesBruteForceOnRandomBalancedTables) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t a = 2 + rng() % 3, b = 2 + rng() % 3, r = 2 + rng() % 4;
    gs::TwoWayTable t(a, std::vector<std::vector<double>>(b, std::vector<double>(r)));
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j)
        for (auto& y : t[i][j]) y = 10 + 0.7 * i - 0.4 * j + 0.3 * static_cast<double>(i * j) + z(rng);
    const auto got = gs::anova_twoway(t);
    const auto want = brute_twoway(t);
    expect_rel(got.factor_a.ss_between, want.ss_a, 1e-9, "SS_A");
    expect_rel(got.factor_b.ss_between, want.ss_b, 1e-9, "SS_B");
    expect_rel(got.interaction.ss_between, want.ss_ab, 1e-9, "SS_AB");
    expect_rel(got.ss_error, want.ss_e, 1e-9, "SSE");
    expect_rel(got.ss_total, want.ss_t, 1e-9, "SST");
    expect_rel(want.ss_a + want.ss_b + want.ss_ab + want.ss_e, got.ss_total, 1e-9, "sum");
    EXPECT_EQ(got.df_error, static_cast<int>(a * b * (r - 1)));
    const double ms_e = want.ss_e / got.df_error;
    expect_rel(got.factor_a.f_stat, want.ss_a / (a - 1) / ms_e, 1e-9, "F_A");
    EXPECT_NEAR(got.factor_a.p_value,
                boost::math::cdf(boost::math::complement(
                    boost::math::fisher_f(a - 1.0, static_cast<double>(got.df_error)), got.factor_a.f_stat)),
                1e-10);
  }
}

TEST(AnovaTwoway, NoEffectAndAdditiveTables) {
  // B has no effect: each row repeats the same replicate pattern in every column.
  const gs::TwoWayTable no_b{{{1, 3}, {1, 3}, {1, 3}}, {{5, 6}, {5, 6}, {5, 6}}};
  const auto r = gs::anova_twoway(no_b);
  EXPECT_EQ(r.factor_b.f_stat, 0.0);
  EXPECT_EQ(r.factor_b.ss_between, 0.0);

  // Additive noise-free cells: interaction vanishes, error is zero.
  gs::TwoWayTable additive(2, std::vector<std::vector<double>>(2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) additive[i][j] = {1.0 * i + 10.0 * j, 1.0 * i + 10.0 * j};
  const auto add = gs::anova_twoway(additive);
  EXPECT_NEAR(add.interaction.ss_between, 0.0, 1e-12);
  EXPECT_EQ(add.interaction.f_stat, 0.0);
  EXPECT_EQ(add.interaction.p_value, 1.0);
  EXPECT_TRUE(std::isinf(add.factor_a.f_stat));
}

TEST(AnovaTwoway, RejectsUnsupportedDesigns) {
  EXPECT_THROW(gs::anova_twoway({{{1, 2}, {3, 4}}}), gs::UnsupportedDesignError);
  EXPECT_THROW(gs::anova_twoway({{{1, 2}, {3, 4}}, {{1, 2}, {3}}}), gs::UnsupportedDesignError);
  EXPECT_THROW(gs::anova_twoway({{{1}, {3}}, {{1}, {3}}}), gs::UnsupportedDesignError);
  EXPECT_THROW(gs::anova_twoway({{{1, 2}, {3, 4}}, {{1, 2}}}), gs::UnsupportedDesignError);
}

TEST(SensorProfile, Examples) {
  auto s = constant_session({}, 0);
  s.samples[1] = {{0, 0}, {20, 750}, {40, 1500}};
  const auto p = gs::sensor_profile(s, gs::SensorId::parse("S2"), kCal, kCfg);
  ASSERT_EQ(p.points.size(), 3u);
  EXPECT_EQ(p.points[0], (gs::ForcePoint{0, 0.0}));
  EXPECT_EQ(p.points[1], (gs::ForcePoint{20, 5.0}));
  EXPECT_EQ(p.points[2], (gs::ForcePoint{40, 10.0}));
  EXPECT_TRUE(gs::sensor_profile(s, gs::SensorId::parse("S3"), kCal, kCfg).points.empty());

  s.samples[4] = {{0, 3300}};
  EXPECT_THROW(gs::sensor_profile(s, gs::SensorId::parse("S5"), kCal, kCfg), gs::DomainError);
}

TEST(SensorProfile, PreservesOrderAndMonotonicity) {
  std::mt19937_64 rng(4);
  auto s = constant_session({}, 0);
  std::vector<std::uint16_t> mv(400);
  for (auto& v : mv) v = static_cast<std::uint16_t>(rng() % 3300);
  std::sort(mv.begin(), mv.end());
  for (std::size_t i = 0; i < mv.size(); ++i) s.samples[0].push_back({static_cast<std::uint32_t>(i * 20), mv[i]});
  gs::GloveConfig literal;
  literal.conversion_mode = gs::ConversionMode::LiteralDivider;
  for (const auto& cfg : {kCfg, literal}) {
    const auto p = gs::sensor_profile(s, gs::SensorId::parse("S1"), kCal, cfg);
    ASSERT_EQ(p.points.size(), mv.size());
    for (std::size_t i = 1; i < p.points.size(); ++i) {
      EXPECT_GT(p.points[i].timestamp_ms, p.points[i - 1].timestamp_ms);
      EXPECT_GE(p.points[i].force_n, p.points[i - 1].force_n);
    }
  }
}

TEST(AggregateStats, Examples) {
  const auto a = gs::aggregate_stats(std::vector<double>{2, 2, 2});
  EXPECT_EQ(a.mean(), 2.0);
  EXPECT_EQ(a.max(), 2.0);
  EXPECT_EQ(a.sd(), 0.0);
  const auto b = gs::aggregate_stats(std::vector<double>{1, 2, 3});
  EXPECT_DOUBLE_EQ(b.mean(), 2.0);
  EXPECT_EQ(b.max(), 3.0);
  EXPECT_DOUBLE_EQ(b.sd(), 1.0);
  EXPECT_EQ(b.n(), 3u);
  const auto c = gs::aggregate_stats(std::vector<double>{5});
  EXPECT_EQ(c.mean(), 5.0);
  EXPECT_FALSE(c.has_sd());
  EXPECT_THROW(c.sd(), gs::InsufficientDataError);
  EXPECT_THROW(gs::aggregate_stats(std::vector<double>{}), gs::InsufficientDataError);
}

TEST(Shares, ReferenceTableRecovered) {
  const std::vector<gs::SensorId> tips{gs::SensorId::parse("S2"), gs::SensorId::parse("S3"),
                                       gs::SensorId::parse("S4"), gs::SensorId::parse("S5")};
  const std::vector<double> means{4.2, 2.74, 1.76, 1.29};
  const auto shares = gs::shares_from_means(tips, means);
  const double total = 4.2 + 2.74 + 1.76 + 1.29;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(shares[i].percent, means[i] / total * 100, 1e-12);
  EXPECT_NEAR(shares[0].percent, 42.0, 0.1);
  EXPECT_NEAR(shares[3].percent, 12.9, 0.1);

  const auto equal = gs::contribution_shares(constant_session({0, 600, 600, 600, 600}, 5), tips, kCal, kCfg);
  for (const auto& s : equal) EXPECT_NEAR(s.percent, 25.0, 1e-12);

  EXPECT_THROW(gs::contribution_shares(constant_session({}, 5), tips, kCal, kCfg), gs::UndefinedStatisticError);
  EXPECT_THROW(gs::contribution_shares(constant_session({}, 0), tips, kCal, kCfg), gs::InsufficientDataError);
}

TEST(Shares, AlwaysSumToHundred) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  std::vector<gs::SensorId> ids;
  for (std::size_t k = 0; k < gs::kSensorCount; ++k) ids.push_back(gs::SensorId::from_slot(k));
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % gs::kSensorCount;
    std::vector<double> means(n);
    for (auto& m : means) m = u(rng);
    double sum = 0;
    for (const auto& s : gs::shares_from_means(std::span(ids).first(n), means)) sum += s.percent;
    EXPECT_NEAR(sum, 100.0, 1e-9);
  }
}

TEST(PopulationAverage, Examples) {
  const gs::GroupBy by_sensor{false, true, false};
  const auto one = constant_session({300, 750}, 4);
  const auto single = gs::population_average(std::span(&one, 1), by_sensor, kCal, kCfg);
  ASSERT_EQ(single.size(), 12u);
  EXPECT_DOUBLE_EQ(single[0].mean_force_n, 2.0);
  EXPECT_DOUBLE_EQ(single[1].mean_force_n, 5.0);

  const std::vector twice{one, one};
  const auto doubled = gs::population_average(twice, by_sensor, kCal, kCfg);
  for (std::size_t i = 0; i < single.size(); ++i) EXPECT_DOUBLE_EQ(doubled[i].mean_force_n, single[i].mean_force_n);

  // Equal weighting: 2 N over 4 samples and 4 N over 40 samples average to 3 N.
  const std::vector mixed{constant_session({300}, 4), constant_session({600}, 40)};
  EXPECT_DOUBLE_EQ(gs::population_average(mixed, by_sensor, kCal, kCfg)[0].mean_force_n, 3.0);

  EXPECT_TRUE(gs::population_average({}, by_sensor, kCal, kCfg).empty());
}

TEST(PopulationAverage, PermutationInvariant) {
  std::mt19937_64 rng(12);
  std::vector<gs::Session> sessions;
  for (int i = 0; i < 12; ++i) {
    std::array<std::uint16_t, gs::kSensorCount> mv{};
    for (auto& v : mv) v = static_cast<std::uint16_t>(rng() % 3000);
    const gs::Hand hand{i % 2 ? gs::Side::Left : gs::Side::Right, i % 3 ? gs::Dominance::Dominant : gs::Dominance::NonDominant};
    sessions.push_back(constant_session(mv, 3 + i, hand, i % 2 ? "soft" : "hardrock"));
  }
  const gs::GroupBy by{true, true, true};
  const auto reference = gs::population_average(sessions, by, kCal, kCfg);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(sessions.begin(), sessions.end(), rng);
    const auto got = gs::population_average(sessions, by, kCal, kCfg);
    ASSERT_EQ(got.size(), reference.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].key, reference[i].key);
      EXPECT_EQ(got[i].mean_force_n, reference[i].mean_force_n);
    }
  }
}

TEST(ExpertiseIndex, Examples) {
  const auto equal = gs::expertise_index(constant_session({0, 0, 500, 0, 500}, 7), kCal, kCfg);
  EXPECT_DOUBLE_EQ(equal.little_to_middle_ratio, 1.0);
  EXPECT_EQ(equal.samples_in_task, 7u);
  EXPECT_GT(gs::expertise_index(constant_session({0, 0, 300, 0, 600}, 3), kCal, kCfg).little_to_middle_ratio, 1.0);
  EXPECT_THROW(gs::expertise_index(constant_session({0, 0, 0, 0, 600}, 3), kCal, kCfg), gs::UndefinedStatisticError);
}
