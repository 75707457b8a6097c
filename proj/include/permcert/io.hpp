#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"

#include "permcert/conjecture.hpp"
#include "permcert/errors.hpp"
#include "permcert/hermitian.hpp"
#include "permcert/permanent.hpp"
#include "permcert/relaxation.hpp"
#include "permcert/rounding.hpp"

namespace permcert {

using Json = nlohmann::ordered_json;

namespace detail {

inline Complex parse_entry(const Json& e) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
    return {e[0].get<double>(), e[1].get<double>()};
  }
  throw ParseError("matrix entry must be a number or [re, im]");
}

}  // namespace detail

/// Reads {"n": int, "entries": [[...], ...]} where each entry is a number
/// or a [re, im] pair.
inline Eigen::MatrixXcd parse_matrix_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("entries")) {
    throw ParseError("matrix JSON must be an object with \"entries\"");
  }
  const Json& rows = doc.at("entries");
  if (!rows.is_array()) throw ParseError("\"entries\" must be an array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (doc.contains("n")) {
    if (!doc.at("n").is_number_integer()) throw ParseError("\"n\" must be an integer");
    if (doc.at("n").get<std::int64_t>() != n) {
      throw DimensionError("\"n\" does not match the number of rows");
    }
  }
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw DimensionError("matrix JSON is not square");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = detail::parse_entry(row[static_cast<std::size_t>(j)]);
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
        throw ParseError("matrix JSON has a non-finite entry");
      }
    }
  }
  return m;
}

inline Eigen::MatrixXcd parse_matrix_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return parse_matrix_json(doc);
}

inline HermitianMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return HermitianMatrix(parse_matrix_json(buf.str()));
}

/// Non-finite values (log of zero) become null.
inline Json number_json(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json vector_json(const Eigen::VectorXcd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

inline Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_json(v(i)));
  return out;
}

inline Json matrix_json(const Eigen::MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return Json{{"n", m.rows()}, {"entries", std::move(rows)}};
}

inline Json certificate_json(const DiagonalCertificate& c) {
  return Json{{"d", vector_json(c.d)},
              {"lambda", number_json(c.lambda)},
              {"inflation", c.inflation},
              {"validated", c.validated},
              {"log_upper", number_json(c.log_upper)}};
}

inline Json solution_json(const RelResult& r) {
  return Json{{"log_rel", number_json(r.value_log)},
              {"gap_ratio", number_json(r.solution.gap_ratio)},
              {"iterations", r.solution.iterations},
              {"converged", r.solution.converged},
              {"zero_diagonal", r.zero_diagonal},
              {"certificate", certificate_json(r.certificate)}};
}

inline Json reduction_json(const ReductionTrace& t) {
  Json steps = Json::array();
  for (const auto& s : t.steps) {
    steps.push_back(Json{{"null_residual", s.null_residual}, {"boundary_step", s.boundary_step}});
  }
  return Json{{"initial_rank", t.initial_rank},
              {"final_rank", t.final_rank},
              {"objective_drift", t.objective_drift},
              {"functional_drift", t.functional_drift},
              {"aborted", t.aborted},
              {"steps", std::move(steps)}};
}

inline Json certified_json(const CertifiedBounds& b, std::uint64_t seed,
                           std::optional<double> log_per_exact) {
  Json out{{"log_lower", number_json(b.log_lower)},
           {"log_upper", number_json(b.log_upper)}};
  if (log_per_exact) {
    out["log_per_exact"] = number_json(*log_per_exact);
    const double slack = 1e-9 * std::max(1.0, std::abs(*log_per_exact));
    out["contained"] = (!std::isfinite(b.log_lower) || b.log_lower <= *log_per_exact + slack) &&
                       *log_per_exact <= b.log_upper + slack;
  }
  out["witness_y"] = vector_json(b.witness.y);
  out["witness_draw"] = b.witness.draw_index;
  out["rank_r"] = b.rank_r;
  out["rank_solver"] = b.rank_solver;
  out["a_priori_log_factor"] = number_json(b.log_factor);
  out["a_priori_log_lower"] = number_json(b.a_priori_log_lower);
  out["witness_beats_a_priori"] = b.witness_beats_a_priori;
  out["certificate_validated"] = b.certificate_validated;
  out["solver_converged"] = b.solver_converged;
  out["loose"] = b.loose;
  out["seed"] = seed;
  out["solution"] = solution_json(b.relaxation);
  if (b.reduction) out["reduction"] = reduction_json(*b.reduction);
  return out;
}

inline Json rounding_json(const RoundedVector& r, double log_lower, std::uint64_t seed,
                          std::int64_t k) {
  return Json{{"objective_log", number_json(r.objective_log)},
              {"log_lower", number_json(log_lower)},
              {"draw_index", r.draw_index},
              {"k_rounds", k},
              {"seed", seed},
              {"y", vector_json(r.y)}};
}

inline Json estimate_json(const PermanentEstimate& e, std::uint64_t seed) {
  return Json{{"mean", number_json(e.mean)},
              {"std_error", number_json(e.std_error)},
              {"samples", e.samples},
              {"log_domain", e.log_domain},
              {"seed", seed}};
}

inline Json conjecture_json(const ConjectureReport& r) {
  return Json{{"instance_id", r.instance_id},
              {"n", r.n},
              {"log_r_lower", number_json(r.log_r_lower)},
              {"log_per", number_json(r.log_per)},
              {"log_nu", number_json(r.log_nu)},
              {"log_rounding", number_json(r.log_rounding)},
              {"lower_holds", r.lower_holds},
              {"upper_consistent", r.upper_consistent},
              {"counterexample_flag", r.counterexample_flag},
              {"upper_status", r.upper_status}};
}

inline Json pate_json(const PateCheck& p, int k) {
  return Json{{"k", k},
              {"lhs_log", number_json(p.lhs_log)},
              {"rhs_log", number_json(p.rhs_log)},
              {"holds", p.holds}};
}

}  // namespace permcert
