#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "permcert/experiments.hpp"
#include "permcert/instances.hpp"
#include "permcert/io.hpp"

using namespace permcert;

TEST(MatrixJson, BareNumbersAndPairs) {
  const auto m = parse_matrix_json(std::string(R"({"n": 2, "entries": [[2, [0, 1]], [[0, -1], 3]]})"));
  EXPECT_EQ(m(0, 0), Complex(2, 0));
  EXPECT_EQ(m(0, 1), Complex(0, 1));
  EXPECT_EQ(m(1, 0), Complex(0, -1));
  EXPECT_EQ(m(1, 1), Complex(3, 0));
}

TEST(MatrixJson, RoundTrip) {
  Eigen::MatrixXcd m(2, 2);
  m << Complex(1.5, 0), Complex(0.25, -0.125), Complex(0.25, 0.125), Complex(3, 0);
  const Json j = matrix_json(m);
  EXPECT_EQ(parse_matrix_json(j), m);
  EXPECT_EQ(parse_matrix_json(j.dump()), m);
}

TEST(MatrixJson, Errors) {
  EXPECT_THROW(parse_matrix_json(std::string("{")), ParseError);
  EXPECT_THROW(parse_matrix_json(std::string(R"({"n": 2})")), ParseError);
  EXPECT_THROW(parse_matrix_json(std::string(R"({"entries": [[1, 2]]})")), DimensionError);
  EXPECT_THROW(parse_matrix_json(std::string(R"({"n": 3, "entries": [[1]]})")), DimensionError);
  EXPECT_THROW(parse_matrix_json(std::string(R"({"entries": [["a"]]})")), ParseError);
  EXPECT_THROW(parse_matrix_json(std::string(R"({"entries": [[[1, 2, 3]]]})")), ParseError);
  EXPECT_THROW(load_matrix("/nonexistent/matrix.json"), ParseError);
}

TEST(NumberJson, NonFiniteIsNull) {
  EXPECT_TRUE(number_json(-std::numeric_limits<double>::infinity()).is_null());
  EXPECT_TRUE(number_json(std::nan("")).is_null());
  EXPECT_EQ(number_json(1.5).get<double>(), 1.5);
}

TEST(Instances, KindNames) {
  for (auto k : {InstanceKind::file, InstanceKind::random_gaussian, InstanceKind::circulant,
                 InstanceKind::diagonal, InstanceKind::rank1}) {
    EXPECT_EQ(parse_instance_kind(instance_kind_name(k)), k);
  }
  EXPECT_THROW(parse_instance_kind("toeplitz"), ParseError);
}

TEST(Instances, Builders) {
  const auto d = random_instance({InstanceKind::diagonal, 0, 0, {1.0, 2.0, 3.0}});
  EXPECT_EQ(d.matrix(), Eigen::Vector3cd(1, 2, 3).asDiagonal().toDenseMatrix());
  const auto c = random_instance({InstanceKind::circulant, 0, 0, {2.0, 1.0, 1.0}});
  EXPECT_EQ(c(1, 0), Complex(1, 0));
  EXPECT_EQ(c(2, 2), Complex(2, 0));
  const auto r = random_instance({InstanceKind::rank1, 4, 9, {}});
  EXPECT_EQ(numeric_rank(r), 1);
  EXPECT_THROW(random_instance({InstanceKind::file, 3, 0, {}}), ParseError);
}

TEST(Instances, RandomGaussianIsDeterministicAndPsd) {
  const InstanceSpec spec{InstanceKind::random_gaussian, 4, 7, {}};
  const auto a = random_instance(spec);
  const auto b = random_instance(spec);
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_TRUE(check_hpsd(a, 1e-12).psd);
  EXPECT_EQ(a.matrix().imag().norm(), 0.0);
  const Eigen::MatrixXd v = gaussian_factor(4, 7);
  EXPECT_EQ(a.matrix().real(), Eigen::MatrixXd(v.transpose() * v));
  EXPECT_NE(random_instance({InstanceKind::random_gaussian, 4, 8, {}}).matrix(), a.matrix());
}

TEST(Experiments, CsvSchema) {
  ExperimentRow row;
  row.n = 3;
  row.seed = 5;
  row.rank_solver = 2;
  row.rank_reduced = 1;
  row.sqrt_bound = 2.0;
  row.log_rel = 1.25;
  row.log_lower = 0.5;
  const std::string csv = rows_csv({row});
  EXPECT_EQ(csv, std::string(kExperimentHeader) + "\n3,5,2,1,2,1.25,0.5,\n");
}

TEST(Experiments, SmallRunIsDeterministicAcrossWorkers) {
  RankGrowthConfig cfg;
  cfg.n_list = {3, 6};
  cfg.instances_per_n = 3;
  cfg.seed = 11;
  cfg.exact_max_n = 20;
  const auto one = run_rank_growth(cfg);
  cfg.workers = 3;
  const auto three = run_rank_growth(cfg);
  EXPECT_EQ(rows_csv(one), rows_csv(three));
  ASSERT_EQ(one.size(), 6u);
  for (const auto& r : one) {
    EXPECT_LE(r.rank_reduced, static_cast<int>(std::floor(std::sqrt(r.n + 1.0))));
    EXPECT_LE(r.log_lower, r.log_rel);
    ASSERT_TRUE(r.log_per_exact.has_value());
    EXPECT_LE(r.log_lower, *r.log_per_exact + 1e-9);
    EXPECT_LE(*r.log_per_exact, r.log_rel + 1e-6);
  }
  const auto summary = summarize(one);
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0].n, 3);
  EXPECT_EQ(summary[0].count, 3);
  EXPECT_NE(gnuplot_script("s.csv").find("s.csv"), std::string::npos);
}

TEST(Experiments, FormatNumber) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_number(std::nan("")), "");
}
