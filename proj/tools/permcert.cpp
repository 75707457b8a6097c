#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "permcert/permcert.hpp"

namespace {

using namespace permcert;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitValidation = 2;

struct InputArgs {
  std::string path;
  std::vector<std::string> random;  // n SEED
  std::string circulant;
  std::string diagonal;
};

struct CommonArgs {
  InputArgs input;
  bool exact = false;
  std::optional<std::uint64_t> seed;
  std::int64_t samples = 100000;
  std::int64_t k_rounds = 0;
  std::string out;
  std::string format = "json";
  int workers = 1;
};

std::vector<Complex> parse_list(const std::string& text) {
  std::vector<Complex> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double x = std::stod(item, &used);
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      out.emplace_back(x, 0.0);
    } catch (const std::logic_error&) {
      throw ParseError("cannot parse number: '" + item + "'");
    }
  }
  if (out.empty()) throw ParseError("empty number list");
  return out;
}

std::uint64_t parse_u64(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(std::string("invalid ") + what + ": '" + text + "'");
  }
}

std::uint64_t resolve_seed(const CommonArgs& args) {
  if (args.seed) return *args.seed;
  if (const char* env = std::getenv("PERMCERT_SEED")) return parse_u64(env, "PERMCERT_SEED");
  return 0;
}

struct LoadedInstance {
  HermitianMatrix a;
  std::string id;
};

LoadedInstance load_instance(const InputArgs& in) {
  const int given = !in.path.empty() + !in.random.empty() + !in.circulant.empty() +
                    !in.diagonal.empty();
  if (given != 1) {
    throw ParseError("give exactly one of --input, --random, --circulant, --diagonal");
  }
  if (!in.path.empty()) return {load_matrix(in.path), in.path};
  if (!in.random.empty()) {
    const auto n = parse_u64(in.random.at(0), "n");
    const auto seed = parse_u64(in.random.at(1), "seed");
    InstanceSpec spec{InstanceKind::random_gaussian, static_cast<int>(n), seed, {}};
    return {random_instance(spec), "random-" + in.random[0] + "-" + in.random[1]};
  }
  if (!in.circulant.empty()) {
    return {random_instance({InstanceKind::circulant, 0, 0, parse_list(in.circulant)}),
            "circulant-" + in.circulant};
  }
  return {random_instance({InstanceKind::diagonal, 0, 0, parse_list(in.diagonal)}),
          "diagonal-" + in.diagonal};
}

void emit(const CommonArgs& args, const std::string& text) {
  if (args.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw ParseError("cannot write " + args.out);
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::optional<double> exact_log_permanent(const HermitianMatrix& a, bool wanted) {
  if (!wanted) return std::nullopt;
  if (a.n() > kExactPermanentCap) {
    std::cerr << "warning: n = " << a.n() << " exceeds the exact permanent cap ("
              << kExactPermanentCap << "); skipping exact value\n";
    return std::nullopt;
  }
  const double per = permanent_exact(a).value;
  return per > 0.0 ? std::log(per) : -std::numeric_limits<double>::infinity();
}

int cmd_certify(const CommonArgs& args) {
  const auto inst = load_instance(args.input);
  CertifyOptions opts;
  opts.seed = resolve_seed(args);
  opts.k_rounds = args.k_rounds;
  const CertifiedBounds b = certify_sandwich(inst.a, opts);
  const auto log_per = exact_log_permanent(inst.a, args.exact);
  const Json j = certified_json(b, opts.seed, log_per);
  emit(args, dump(j));
  const bool contained = !j.contains("contained") || j.at("contained").get<bool>();
  if (!b.certificate_validated || !contained) {
    std::cerr << "error: certificate could not be verified\n";
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_solve(const CommonArgs& args) {
  const auto inst = load_instance(args.input);
  const RelResult r = rel(inst.a);
  emit(args, dump(solution_json(r)));
  if (!r.certificate.validated) {
    std::cerr << "error: certificate could not be verified\n";
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_round(const CommonArgs& args) {
  const auto inst = load_instance(args.input);
  const std::uint64_t seed = resolve_seed(args);
  const RelResult r = rel(inst.a);
  const std::int64_t k = args.k_rounds > 0 ? args.k_rounds : 64 * static_cast<std::int64_t>(inst.a.n());
  if (r.zero_diagonal) {
    emit(args, dump(Json{{"objective_log", nullptr}, {"log_lower", nullptr}, {"k_rounds", k}, {"seed", seed}}));
    return kExitOk;
  }
  const RoundedVector best = best_of_k_rounding(r.solution.u, r.factor, k, seed);
  const SphereLowerBound lb = lower_bound_from_vector(r.factor, best.y);
  emit(args, dump(rounding_json(best, lb.log_value, seed, k)));
  return kExitOk;
}

int cmd_estimate(const CommonArgs& args) {
  const auto inst = load_instance(args.input);
  const std::uint64_t seed = resolve_seed(args);
  if (args.samples < 1) throw DomainError("--samples must be positive");
  const GramFactor v = factorize_gram(inst.a);
  const PermanentEstimate e = permanent_mc_gaussian(v, args.samples, seed, args.workers);
  emit(args, dump(estimate_json(e, seed)));
  return kExitOk;
}

int cmd_pate(const CommonArgs& args, int k) {
  const auto inst = load_instance(args.input);
  emit(args, dump(pate_json(check_pate(inst.a, k), k)));
  return kExitOk;
}

struct ConjectureArgs {
  int starts = 20;
  int batch = 1;
};

int cmd_conjecture(const CommonArgs& args, const ConjectureArgs& cargs) {
  const std::uint64_t seed = resolve_seed(args);
  ConjectureOptions opts;
  opts.starts = cargs.starts;
  opts.seed = seed;
  opts.k_rounds = args.k_rounds;

  std::vector<ConjectureReport> reports;
  if (cargs.batch > 1) {
    if (args.input.random.empty()) throw ParseError("--batch needs --random n SEED");
    const auto n = parse_u64(args.input.random.at(0), "n");
    const auto base = parse_u64(args.input.random.at(1), "seed");
    for (int i = 0; i < cargs.batch; ++i) {
      const std::uint64_t s = base + static_cast<std::uint64_t>(i);
      const auto a = random_instance({InstanceKind::random_gaussian, static_cast<int>(n), s, {}});
      reports.push_back(check_vdw_conjecture(a, opts, "random-" + std::to_string(n) + "-" + std::to_string(s)));
    }
  } else {
    const auto inst = load_instance(args.input);
    reports.push_back(check_vdw_conjecture(inst.a, opts, inst.id));
  }

  bool lower_ok = true;
  for (const auto& r : reports) lower_ok = lower_ok && r.lower_holds;
  if (args.format == "csv") {
    std::ostringstream out;
    out << "instance_id,n,log_r_lower,log_per,log_nu,lower_holds,upper_consistent,"
           "counterexample_flag,upper_status\n";
    for (const auto& r : reports) {
      out << r.instance_id << ',' << r.n << ',' << format_number(r.log_r_lower) << ','
          << format_number(r.log_per) << ',' << format_number(r.log_nu) << ','
          << r.lower_holds << ',' << r.upper_consistent << ',' << r.counterexample_flag << ','
          << r.upper_status << '\n';
    }
    emit(args, out.str());
  } else if (reports.size() == 1) {
    emit(args, dump(conjecture_json(reports.front())));
  } else {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(conjecture_json(r));
    emit(args, dump(arr));
  }
  if (!lower_ok) {
    std::cerr << "error: lower end of the sandwich failed\n";
    return kExitValidation;
  }
  return kExitOk;
}

struct GrowthArgs {
  std::string n_list = "5,10,15,20,25,30,35,40";
  int instances = 50;
  std::string summary;
  std::string gnuplot;
};

int cmd_rank_growth(const CommonArgs& args, const GrowthArgs& gargs) {
  RankGrowthConfig cfg;
  cfg.n_list.clear();
  for (const auto& z : parse_list(gargs.n_list)) {
    const double x = z.real();
    if (x < 1 || x != std::floor(x)) throw ParseError("--n-list needs positive integers");
    cfg.n_list.push_back(static_cast<int>(x));
  }
  if (gargs.instances < 1) throw DomainError("--instances must be positive");
  cfg.instances_per_n = gargs.instances;
  cfg.seed = resolve_seed(args);
  cfg.exact_max_n = args.exact ? kExactPermanentCap : 0;
  cfg.workers = args.workers;
  cfg.k_rounds = args.k_rounds;
  const auto rows = run_rank_growth(cfg);
  const auto summary = summarize(rows);

  if (args.format == "json") {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json row{{"n", r.n}, {"seed", r.seed}, {"rank_solver", r.rank_solver},
               {"rank_reduced", r.rank_reduced}, {"sqrt_bound", r.sqrt_bound},
               {"log_rel", number_json(r.log_rel)}, {"log_lower", number_json(r.log_lower)}};
      row["log_per_exact"] = r.log_per_exact ? number_json(*r.log_per_exact) : Json(nullptr);
      arr.push_back(std::move(row));
    }
    emit(args, dump(arr));
  } else {
    emit(args, rows_csv(rows));
  }
  if (!gargs.summary.empty()) {
    std::ofstream(gargs.summary, std::ios::binary) << summary_csv(summary);
  } else {
    std::cerr << summary_csv(summary);
  }
  if (!gargs.gnuplot.empty()) {
    const std::string data = gargs.summary.empty() ? "summary.csv" : gargs.summary;
    std::ofstream(gargs.gnuplot, std::ios::binary) << gnuplot_script(data);
  }
  return kExitOk;
}

void add_input_options(CLI::App* sub, InputArgs& in) {
  sub->add_option("--input", in.path, "Matrix JSON file");
  sub->add_option("--random", in.random, "Random Gaussian instance: n SEED")->expected(2);
  sub->add_option("--circulant", in.circulant, "Circulant first row \"c0,c1,...\"");
  sub->add_option("--diagonal", in.diagonal, "Diagonal entries \"d0,d1,...\"");
}

void add_common_options(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--seed", args.seed, "Seed (falls back to PERMCERT_SEED, then 0)");
  sub->add_option("--out", args.out, "Write output to PATH instead of stdout");
  sub->add_option("--format", args.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified bounds for permanents of positive semidefinite matrices"};
  app.require_subcommand(1);
  CommonArgs args;
  ConjectureArgs cargs;
  GrowthArgs gargs;
  int pate_k = 2;

  auto* certify = app.add_subcommand("certify", "Certified lower and upper bounds on per(A)");
  add_input_options(certify, args.input);
  add_common_options(certify, args);
  certify->add_flag("--exact", args.exact, "Also compute the exact permanent (n <= 20)");
  certify->add_option("--k-rounds", args.k_rounds, "Rounding draws (default 64 n)");

  auto* solve = app.add_subcommand("solve", "Solve the relaxation and emit the diagonal certificate");
  add_input_options(solve, args.input);
  add_common_options(solve, args);

  auto* round = app.add_subcommand("round", "Best-of-k rounding of the relaxation solution");
  add_input_options(round, args.input);
  add_common_options(round, args);
  round->add_option("--k-rounds", args.k_rounds, "Rounding draws (default 64 n)");

  auto* growth = app.add_subcommand("rank-growth", "Solver and reduced rank over random instances");
  add_common_options(growth, args);
  growth->add_option("--n-list", gargs.n_list, "Comma separated sizes");
  growth->add_option("--instances", gargs.instances, "Instances per size");
  growth->add_option("--summary", gargs.summary, "Write per-n summary CSV to PATH");
  growth->add_option("--gnuplot", gargs.gnuplot, "Write a gnuplot script to PATH");
  growth->add_option("--workers", args.workers, "Worker threads");
  growth->add_option("--k-rounds", args.k_rounds, "Rounding draws (default 64 n)");
  growth->add_flag("--exact", args.exact, "Record exact permanents for n <= 20");

  auto* conj = app.add_subcommand("conjecture", "Check n!/n^n r(A) <= per(A) <= r(A) numerically");
  add_input_options(conj, args.input);
  add_common_options(conj, args);
  conj->add_option("--starts", cargs.starts, "Local search starts");
  conj->add_option("--batch", cargs.batch, "With --random n SEED: instances with seeds SEED, SEED+1, ...");
  conj->add_option("--k-rounds", args.k_rounds, "Candidate roundings (default 64 n)");

  auto* pate = app.add_subcommand("pate", "Check per(A (x) J_k) >= per(A)^k (k!)^n");
  add_input_options(pate, args.input);
  add_common_options(pate, args);
  pate->add_option("--k", pate_k, "Block size k")->check(CLI::PositiveNumber);

  auto* estimate = app.add_subcommand("estimate", "Monte Carlo permanent estimate");
  add_input_options(estimate, args.input);
  add_common_options(estimate, args);
  estimate->add_option("--samples", args.samples, "Gaussian samples");
  estimate->add_option("--workers", args.workers, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*certify) return cmd_certify(args);
    if (*solve) return cmd_solve(args);
    if (*round) return cmd_round(args);
    if (*growth) return cmd_rank_growth(args, gargs);
    if (*conj) return cmd_conjecture(args, cargs);
    if (*pate) return cmd_pate(args, pate_k);
    if (*estimate) return cmd_estimate(args);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
