#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "rkpair/analyze.hpp"
#include "rkpair/bench.hpp"
#include "rkpair/derive.hpp"
#include "rkpair/errors.hpp"
#include "rkpair/integrate.hpp"
#include "rkpair/problems.hpp"
#include "rkpair/tableau.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rkpair;

namespace {

constexpr int kExitVerify = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr const char* kOutDirVar = "RKPAIR_OUTPUT_DIR";

class VerificationFailure : public Error {
 public:
  using Error::Error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Explicit path, else $RKPAIR_OUTPUT_DIR/<default_name>, else none (stdout).
std::optional<fs::path> output_path(const std::string& explicit_path,
                                    const std::string& default_name) {
  if (!explicit_path.empty()) return fs::path(explicit_path);
  if (const char* dir = std::getenv(kOutDirVar); dir && *dir) {
    fs::create_directories(dir);
    return fs::path(dir) / default_name;
  }
  return std::nullopt;
}

void write_text(const std::optional<fs::path>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  if (path->has_parent_path()) fs::create_directories(path->parent_path());
  std::ofstream out(*path);
  if (!out) throw RangeError("cannot write " + path->string());
  out << text;
}

Rational parse_param(const std::string& key, const std::string& value, ScalarMode mode) {
  if (mode == ScalarMode::exact && value.find_first_of(".eE") != std::string::npos) {
    throw RangeError("parameter " + key + " = " + value +
                     " is not a rational p/q; decimals are rejected in rational mode");
  }
  const auto v = try_parse_rational(value);
  if (!v) throw RangeError("cannot parse parameter " + key + " = " + value);
  return *v;
}

std::map<std::string, Rational> parse_params(const std::string& text, ScalarMode mode) {
  std::map<std::string, Rational> out;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw RangeError("parameter '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    if (out.count(key)) throw RangeError("parameter " + key + " given twice");
    out[key] = parse_param(key, item.substr(eq + 1), mode);
  }
  return out;
}

void require_keys(const std::map<std::string, Rational>& p, const std::set<std::string>& required,
                  const std::set<std::string>& optional, const std::string& family) {
  for (const auto& k : required) {
    if (!p.count(k)) throw RangeError("family " + family + " needs parameter " + k);
  }
  for (const auto& [k, v] : p) {
    if (!required.count(k) && !optional.count(k)) {
      throw RangeError("family " + family + " does not take parameter " + k);
    }
  }
}

json summary_json(const ButcherPair& pair) {
  const PairMetrics m = metrics(pair);
  json j;
  j["T6"] = error_norm(pair, 6);
  j["T7"] = error_norm(pair, 7);
  j["max_abs_a"] = m.max_abs_a;
  j["min_nonzero_b"] = m.min_nonzero_b;
  if (m.k6) j["k6"] = *m.k6;
  if (m.k6_exact) j["k6_exact"] = format_rational(*m.k6_exact);
  return j;
}

std::string summary_text(const ButcherPair& pair, const std::string& prefix) {
  const PairMetrics m = metrics(pair);
  std::string s;
  s += fmt::format("{}T6 = {:.5e}\n", prefix, error_norm(pair, 6));
  s += fmt::format("{}T7 = {:.5e}\n", prefix, error_norm(pair, 7));
  s += fmt::format("{}max|a| = {:.6g}\n", prefix, m.max_abs_a);
  s += fmt::format("{}min nonzero b = {:.6g}\n", prefix, m.min_nonzero_b);
  if (m.k6_exact) {
    s += fmt::format("{}k6 = {} ({:.6e})\n", prefix, format_rational(*m.k6_exact), *m.k6);
  } else if (m.k6) {
    s += fmt::format("{}k6 = {:.6e} (1/{:.6g})\n", prefix, *m.k6, 1 / *m.k6);
  } else {
    s += fmt::format("{}k6 = n/a\n", prefix);
  }
  return s;
}

struct DeriveOptions {
  std::string family, params, out, mode = "rational", solve = "c5", bracket, branch = "plus";
  bool json = false;
};

ButcherPair derive_pair(const DeriveOptions& o) {
  const ScalarMode mode = o.mode == "float" ? ScalarMode::floating : ScalarMode::exact;
  const auto p = parse_params(o.params, mode);
  const std::string& f = o.family;
  auto get = [&](const char* k) { return p.at(k); };
  if (f == "A" || f == "B" || f == "C") {
    require_keys(p, {"c2", "c3", "c5", "c6"}, {}, f);
    if (f == "A") return construct_family(FamilyA{get("c2"), get("c3"), get("c5"), get("c6")});
    if (f == "B") return construct_family(FamilyB{get("c2"), get("c3"), get("c5"), get("c6")});
    if (o.branch != "plus" && o.branch != "minus") throw RangeError("branch must be plus or minus");
    return construct_family(
        FamilyC{get("c2"), get("c3"), get("c5"), get("c6"), o.branch == "plus" ? 0 : 1});
  }
  if (f == "Aprime") {
    require_keys(p, {"c2", "c3", "c4", "c5"}, {}, f);
    return construct_family(FamilyAPrime{get("c2"), get("c3"), get("c4"), get("c5")});
  }
  if (f == "Bprime-c3-0") {
    require_keys(p, {"c2", "c4", "c5"}, {}, f);
    return construct_family(FamilyBPrimeC3Zero{get("c2"), get("c4"), get("c5")});
  }
  if (f == "Bprime-c3-c2") {
    require_keys(p, {"c2", "c5"}, {"cp3"}, f);
    std::optional<Rational> cp3;
    if (p.count("cp3")) cp3 = get("cp3");
    return construct_family(FamilyBPrimeC3C2{get("c2"), get("c5"), cp3});
  }
  if (f == "Bprime") {
    static const std::map<std::string, Unknown> unknowns = {{"c2", Unknown::c2},
                                                            {"c3", Unknown::c3},
                                                            {"c4", Unknown::c4},
                                                            {"c5", Unknown::c5},
                                                            {"cp3", Unknown::cp3}};
    if (!unknowns.count(o.solve)) throw RangeError("--solve must be one of c2, c3, c4, c5, cp3");
    std::set<std::string> req = {"c2", "c3", "c4", "c5", "cp3"};
    req.erase(o.solve);
    require_keys(p, req, {}, f);
    const auto br = split(o.bracket, ',');
    if (br.size() != 2) throw RangeError("Bprime needs --bracket lo,hi for the solved parameter");
    FamilyBPrimeGeneral spec;
    spec.unknown = unknowns.at(o.solve);
    auto val = [&](const char* k) { return p.count(k) ? p.at(k) : Rational(0); };
    spec.c2 = val("c2");
    spec.c3 = val("c3");
    spec.c4 = val("c4");
    spec.c5 = val("c5");
    spec.cp3 = val("cp3");
    spec.lo = parse_param("lo", br[0], ScalarMode::floating);
    spec.hi = parse_param("hi", br[1], ScalarMode::floating);
    return construct_family(spec);
  }
  if (f == "general") {
    require_keys(p, {"c2", "c3", "c4", "c5", "c6", "cp3"}, {}, f);
    return construct_general({get("c2"), get("c3"), get("c4"), get("c5"), get("c6"), get("cp3")});
  }
  throw RangeError("unknown family '" + f +
                   "' (A, Aprime, B, Bprime, Bprime-c3-0, Bprime-c3-c2, C, general)");
}

int run_derive(const DeriveOptions& o) {
  ButcherPair pair = derive_pair(o);
  if (o.mode == "float" && pair.exact()) {
    pair = ButcherPair(pair.float_coefficients(), pair.name, pair.family, pair.source);
  }
  pair.name = fmt::format("{}({})", o.family, o.params);
  const ValidationReport v = validate(pair);
  if (!v.ok()) throw VerificationFailure("derived tableau failed validation: " + v.violations[0]);
  const auto path = output_path(o.out, o.family + ".tab");
  write_text(path, format_tableau(pair));
  if (o.json) {
    json j = summary_json(pair);
    j["family"] = o.family;
    if (path) j["file"] = path->string();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << summary_text(pair, path ? "" : "# ");
  }
  return 0;
}

std::string residual_text(const Rational* exact, double value) {
  return exact ? format_rational(*exact) : fmt::format("{:.3e}", value);
}

int run_verify(const std::string& name, int order, std::optional<double> tol, bool as_json) {
  const ButcherPair pair = resolve_pair(name);
  const ValidationReport v = validate(pair);
  const ResidualReport r = residuals(pair, order);
  const auto bad = r.violations(tol);
  if (as_json) {
    json j = summary_json(pair);
    j["pair"] = pair.name;
    j["structural_violations"] = v.violations;
    j["residual_violations"] = bad;
    json trees = json::array();
    for (const auto& e : r.entries) {
      trees.push_back({{"tree", e.tree.to_string()},
                       {"order", e.tree.order()},
                       {"b_residual", e.b_residual},
                       {"d_residual", e.d_residual}});
    }
    j["trees"] = trees;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << fmt::format("pair {} ({} mode, {} stages)\n", pair.name,
                             to_string(pair.mode()), pair.stages());
    std::cout << fmt::format("{:<28} {:>5} {:>24} {:>24}\n", "tree", "order", "b.Phi - 1/t!",
                             "d.Phi");
    for (const auto& e : r.entries) {
      std::cout << fmt::format("{:<28} {:>5} {:>24} {:>24}\n", e.tree.to_string(), e.tree.order(),
                               residual_text(e.b_exact ? &*e.b_exact : nullptr, e.b_residual),
                               residual_text(e.d_exact ? &*e.d_exact : nullptr, e.d_residual));
    }
    std::cout << summary_text(pair, "");
    for (const auto& s : v.violations) std::cout << "structural violation: " << s << "\n";
    for (const auto& s : bad) std::cout << "violated: " << s << "\n";
  }
  return v.ok() && bad.empty() ? 0 : kExitVerify;
}

int run_report(const std::string& names, bool as_json) {
  std::vector<std::string> list = names == "all" ? builtin_names() : split(names, ',');
  json rows = json::array();
  if (!as_json) {
    std::cout << fmt::format("{:<20} {:>10} {:>10} {:>10} {:>10} {:>14} {:>6} {:>8}\n", "pair",
                             "1e4*T6", "1e3*T7", "max|a|", "min b", "k6", "DSO", "interval");
  }
  for (const auto& n : list) {
    const ButcherPair pair = resolve_pair(n);
    const PairMetrics m = metrics(pair);
    const DsoReport d = dso(pair);
    const StabilityPoly st = stability(pair);
    const double interval = real_stability_interval(st.coefficients);
    if (as_json) {
      json j = summary_json(pair);
      j["pair"] = n;
      j["dso5"] = d.dso5;
      j["dso4"] = d.dso4;
      j["real_stability_interval"] = interval;
      rows.push_back(j);
      continue;
    }
    std::string k6 = "n/a";
    if (m.k6_exact && format_rational(*m.k6_exact).size() <= 14) {
      k6 = format_rational(*m.k6_exact);
    } else if (m.k6) {
      k6 = fmt::format("1/{:.6g}", 1 / *m.k6);
    }
    std::cout << fmt::format("{:<20} {:>10.4f} {:>10.4f} {:>10.4f} {:>10.4f} {:>14} {:>3}/{:<2} {:>8.4f}\n",
                             n, 1e4 * error_norm(pair, 6), 1e3 * error_norm(pair, 7), m.max_abs_a,
                             m.min_nonzero_b, k6, d.dso5, d.dso4, interval);
  }
  if (as_json) std::cout << rows.dump(2) << "\n";
  return 0;
}

struct IntegrateOptions {
  std::string pair, problem, out;
  double atol = 1e-6, h0 = 1e-6;
  bool clamp = false;
};

int run_integrate(const IntegrateOptions& o) {
  const ButcherPair pair = resolve_pair(o.pair);
  const NamedProblem p = problem(o.problem);
  ControllerConfig cfg;
  cfg.atol = o.atol;
  cfg.h0 = o.h0;
  if (o.clamp) cfg.clamp = std::pair{0.2, 5.0};
  const IntegrationStats s = integrate_adaptive(pair, p.system, p.t0, p.tend, p.x0, cfg);
  std::string csv = "t";
  for (std::size_t i = 0; i < p.system.dimension; ++i) csv += fmt::format(",x{}", i + 1);
  csv += "\n";
  for (const auto& pt : s.trajectory) {
    csv += format_double(pt.t);
    for (double v : pt.x) csv += "," + format_double(v);
    csv += "\n";
  }
  const auto path = output_path(o.out, fmt::format("trajectory_{}_{}.csv", o.pair, o.problem));
  write_text(path, csv);
  std::ostream& info = path ? std::cout : std::cerr;
  info << fmt::format("n_rhs = {}\nn_accept = {}\nn_reject = {}\nerror = {:.6e}\n", s.n_rhs,
                      s.n_accept, s.n_reject, measure_error(p, s));
  return 0;
}

struct BenchOptions {
  std::string pairs = "typeB,aprime,sqrt4054,dopri", problems = "A3", out, grid;
  unsigned threads = 0;
};

int run_bench(const BenchOptions& o) {
  std::vector<NamedPair> pairs;
  for (const auto& n : split(o.pairs, ',')) pairs.emplace_back(n, resolve_pair(n));
  std::vector<double> grid = default_atol_grid();
  if (!o.grid.empty()) {
    const auto g = split(o.grid, ',');
    if (g.size() != 3) throw RangeError("--grid expects n,hi,lo");
    grid = default_atol_grid(std::stoi(g[0]), parse_double(g[1]), parse_double(g[2]));
  }
  std::vector<WorkPrecisionRecord> all;
  for (const auto& id : split(o.problems, ',')) {
    auto recs = work_precision(pairs, problem(id), grid, {}, o.threads);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  std::ostringstream csv;
  write_csv(csv, all);
  const auto path = output_path(o.out, "bench.csv");
  write_text(path, csv.str());
  if (path) {
    fs::path script = *path;
    script.replace_extension(".gp");
    fs::path stem = *path;
    stem.replace_extension();
    write_text(script, gnuplot_script(path->filename().string(), all, stem.filename().string()));
    std::cout << fmt::format("wrote {} rows to {} and plot script {}\n", all.size(),
                             path->string(), script.string());
  }
  return 0;
}

struct ScanOptions {
  std::string c2 = "1/5", c5 = "4/5", out;
  double c3_min = -0.5, c3_max = 1.5;
  int points = 401;
};

int run_scan(const ScanOptions& o) {
  if (o.points < 2 || !(o.c3_max > o.c3_min)) throw RangeError("invalid c3 grid");
  std::vector<double> grid;
  for (int i = 0; i < o.points; ++i) {
    grid.push_back(o.c3_min + (o.c3_max - o.c3_min) * i / (o.points - 1));
  }
  const auto rows = family_scan(parse_param("c2", o.c2, ScalarMode::exact),
                                parse_param("c5", o.c5, ScalarMode::exact), grid);
  std::ostringstream csv;
  write_scan_csv(csv, rows);
  const auto path = output_path(o.out, "scan.csv");
  write_text(path, csv.str());
  if (path) {
    fs::path script = *path;
    script.replace_extension(".gp");
    const std::string f = path->filename().string();
    write_text(script,
               fmt::format("set datafile separator ','\nset key autotitle columnhead\n"
                           "set xlabel 'c3'\nset ylabel \"c'3\"\nset yrange [-0.5:1.5]\n"
                           "plot '{0}' using 1:2 with lines dt 2, '{0}' using 1:3 with lines dt 3, "
                           "'{0}' using 1:4 with lines, '{0}' using 1:5 with lines\n",
                           f));
    std::cout << fmt::format("wrote {} rows to {}\n", rows.size(), path->string());
  }
  return 0;
}

int run_stability(const std::string& name, int points, const std::string& out) {
  const ButcherPair pair = resolve_pair(name);
  const StabilityPoly st = stability(pair);
  for (std::size_t k = 0; k < st.coefficients.size(); ++k) {
    if (st.exact) {
      std::cout << fmt::format("c{} = {}\n", k, format_rational((*st.exact)[k]));
    } else {
      std::cout << fmt::format("c{} = {:.17g}\n", k, st.coefficients[k]);
    }
  }
  const PairMetrics m = metrics(pair);
  if (m.k6_exact) {
    std::cout << "k6 = " << format_rational(*m.k6_exact) << "\n";
  } else if (m.k6) {
    std::cout << fmt::format("k6 = {:.17g}\n", *m.k6);
  }
  std::cout << fmt::format("real stability interval = [-{:.10g}, 0]\n",
                           real_stability_interval(st.coefficients));
  const BoundaryTrace b = stability_boundary(st.coefficients, points);
  if (!b.complete) std::cerr << "warning: " << b.warning << "\n";
  std::string csv = "re,im\n";
  for (const auto& z : b.points) csv += format_double(z.real()) + "," + format_double(z.imag()) + "\n";
  const auto path = output_path(out.empty() ? "" : out, fmt::format("boundary_{}.csv", name));
  if (path) {
    write_text(path, csv);
    std::cout << fmt::format("wrote {} boundary points to {}\n", b.points.size(), path->string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedded (4,5) Runge-Kutta pairs: derivation, verification and benchmarks"};
  app.require_subcommand(1);

  DeriveOptions d;
  auto* derive = app.add_subcommand("derive", "construct a pair of a given family");
  derive->add_option("--family", d.family, "A, Aprime, B, Bprime, Bprime-c3-0, Bprime-c3-c2, C, general")
      ->required();
  derive->add_option("--params", d.params, "comma-separated k=p/q list")->required();
  derive->add_option("--out", d.out, "output tableau file");
  derive->add_option("--mode", d.mode, "rational or float")
      ->check(CLI::IsMember({"rational", "float"}));
  derive->add_option("--solve", d.solve, "Bprime: parameter solved for (default c5)");
  derive->add_option("--bracket", d.bracket, "Bprime: lo,hi bracket of the solved parameter");
  derive->add_option("--branch", d.branch, "C: plus or minus root");
  derive->add_flag("--json", d.json, "machine-readable summary");

  std::string verify_pair;
  int verify_order = 5;
  std::optional<double> verify_tol;
  bool verify_json = false;
  auto* verify = app.add_subcommand("verify", "order-condition residuals of a pair");
  verify->add_option("--pair", verify_pair, "builtin name or tableau file")->required();
  verify->add_option("--order", verify_order, "highest tree order reported (5..7)")
      ->check(CLI::Range(5, 7));
  verify->add_option("--tolerance", verify_tol, "compare residuals in float with this tolerance");
  verify->add_flag("--json", verify_json, "machine-readable output");

  std::string report_pairs = "all";
  bool report_json = false;
  auto* report = app.add_subcommand("report", "comparison-table metrics");
  report->add_option("--pairs", report_pairs, "comma-separated pairs or 'all'");
  report->add_flag("--json", report_json, "machine-readable output");

  IntegrateOptions io;
  auto* integrate = app.add_subcommand("integrate", "adaptive integration of a benchmark problem");
  integrate->add_option("--pair", io.pair, "builtin name or tableau file")->required();
  integrate->add_option("--problem", io.problem, "A3, A4, D5 or PLEI")->required();
  integrate->add_option("--atol", io.atol, "absolute tolerance")->capture_default_str();
  integrate->add_option("--h0", io.h0, "initial step size")->capture_default_str();
  integrate->add_flag("--clamp", io.clamp, "limit step ratios to [0.2, 5]");
  integrate->add_option("--out", io.out, "trajectory CSV");

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "work-precision records");
  bench->add_option("--pairs", bo.pairs, "comma-separated pairs")->capture_default_str();
  bench->add_option("--problem,--problems", bo.problems, "comma-separated problems")
      ->capture_default_str();
  bench->add_option("--grid", bo.grid, "n,hi,lo log-spaced tolerances");
  bench->add_option("--threads", bo.threads, "worker threads (0: all cores)");
  bench->add_option("--out", bo.out, "CSV path; a .gp plot script is written beside it");

  ScanOptions so;
  auto* scan = app.add_subcommand("scan", "type A, B, C curves in the (c3, c'3) plane");
  scan->add_option("--c2", so.c2, "node c2 as p/q")->capture_default_str();
  scan->add_option("--c5", so.c5, "node c5 as p/q")->capture_default_str();
  scan->add_option("--c3-min", so.c3_min, "lower end of the c3 grid")->capture_default_str();
  scan->add_option("--c3-max", so.c3_max, "upper end of the c3 grid")->capture_default_str();
  scan->add_option("--points", so.points, "c3 grid points")->capture_default_str();
  scan->add_option("--out", so.out, "curve CSV; a .gp plot script is written beside it");

  std::string stab_pair, stab_out;
  int stab_points = 2048;
  auto* stab = app.add_subcommand("stability", "stability polynomial and boundary");
  stab->add_option("--pair", stab_pair, "builtin name or tableau file")->required();
  stab->add_option("--points", stab_points, "boundary points")->capture_default_str();
  stab->add_option("--out", stab_out, "boundary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*derive) return run_derive(d);
    if (*verify) return run_verify(verify_pair, verify_order, verify_tol, verify_json);
    if (*report) return run_report(report_pairs, report_json);
    if (*integrate) return run_integrate(io);
    if (*bench) return run_bench(bo);
    if (*scan) return run_scan(so);
    if (*stab) return run_stability(stab_pair, stab_points, stab_out);
  } catch (const VerificationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerify;
  } catch (const NoSolutionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
