#include "pspline/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pspline/basis.hpp"
#include "pspline/experiments.hpp"

namespace pspline::cli {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw DataError("unterminated quote on line " + std::to_string(line_no));
  out.push_back(trim(cur));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Days since 1970-01-01 for YYYY-MM-DD.
std::optional<long> parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::from_chars(s.data(), s.data() + 4, y).ptr != s.data() + 4) return std::nullopt;
  if (std::from_chars(s.data() + 5, s.data() + 7, m).ptr != s.data() + 7) return std::nullopt;
  if (std::from_chars(s.data() + 8, s.data() + 10, d).ptr != s.data() + 10) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days(ymd).time_since_epoch().count();
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError("column '" + name + "' not found in header");
}

struct Model {
  Table table;
  KnotVector kv;
  PlsProblem prob;
};

Model build_model(const SmoothConfig& cfg) {
  Table t = read_table(cfg);
  KnotVector kv = knots_for(t, cfg);
  PenaltyFactor pen = penalty_for(kv, cfg);
  const DesignMatrix b = design_matrix(kv, t.x);
  std::optional<std::span<const double>> w;
  if (!t.w.empty()) w = std::span<const double>(t.w);
  PlsProblem prob(b, t.y, w, std::move(pen));
  return {std::move(t), std::move(kv), std::move(prob)};
}

std::string_view penalty_name(PenaltyChoice p) {
  switch (p) {
    case PenaltyChoice::gps: return "gps";
    case PenaltyChoice::sps: return "sps";
    case PenaltyChoice::os: return "os";
  }
  return "?";
}

json interval_json(const IntervalReport& r, const Model& model, const SmoothConfig& cfg) {
  json j;
  j["schema"] = 1;
  j["rho_lo"] = r.interval.rho_lo;
  j["rho_hi"] = r.interval.rho_hi;
  j["kind"] = to_string(r.interval.kind);
  j["kappa"] = r.interval.kappa;
  j["q"] = r.summary.q;
  j["n"] = model.prob.n();
  j["p"] = model.prob.p();
  j["d"] = cfg.degree;
  j["m"] = cfg.order;
  j["penalty"] = penalty_name(cfg.penalty);
  j["lambda_max"] = r.summary.lambda_max;
  j["lambda_min"] = r.summary.lambda_min;
  j["lambda_mean"] = r.summary.lambda_mean;
  j["singular"] = r.summary.singular;
  j["rho_star_min"] = r.rho_star_min;
  j["rho_star_max"] = r.rho_star_max;
  j["rho_hat_max"] = r.rho_hat_max ? json(*r.rho_hat_max) : json(nullptr);
  j["rho_hat_min"] = r.rho_hat_min ? json(*r.rho_hat_min) : json(nullptr);
  j["heuristic_failed"] = r.heuristic_failed;
  if (model.table.x_is_date) j["first_date"] = model.table.first_date;
  return j;
}

std::string number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<Criterion> criteria(CriterionChoice c) {
  switch (c) {
    case CriterionChoice::gcv: return {Criterion::gcv};
    case CriterionChoice::reml: return {Criterion::reml};
    case CriterionChoice::both: return {Criterion::gcv, Criterion::reml};
  }
  return {};
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open output file '" + path + "'");
  f << text;
  if (!f) throw DataError("failed writing '" + path + "'");
}

}  // namespace

Table read_table(std::istream& in, const SmoothConfig& cfg) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv(line, line_no);
      break;
    }
  }
  if (header.empty()) throw DataError("input has no header row");
  const std::size_t xi = column(header, cfg.x_col);
  const std::size_t yi = column(header, cfg.y_col);
  const std::optional<std::size_t> wi = cfg.w_col.empty() ? std::nullopt : std::optional(column(header, cfg.w_col));

  Table t;
  std::vector<std::string> raw_x;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line, line_no);
    if (f.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(f.size()));
    const auto y = parse_number(f[yi]);
    if (!y) throw DataError("line " + std::to_string(line_no) + ": y value '" + f[yi] + "' is not a number");
    t.y.push_back(*y);
    raw_x.push_back(f[xi]);
    if (wi) {
      const auto w = parse_number(f[*wi]);
      if (!w || *w < 0.0) throw DataError("line " + std::to_string(line_no) + ": bad weight '" + f[*wi] + "'");
      t.w.push_back(*w);
    }
  }
  if (raw_x.empty()) throw DataError("input has no data rows");

  t.x_is_date = parse_date(raw_x.front()).has_value();
  if (t.x_is_date) {
    std::vector<long> days;
    for (std::size_t i = 0; i < raw_x.size(); ++i) {
      const auto d = parse_date(raw_x[i]);
      if (!d) throw DataError("x value '" + raw_x[i] + "' is not an ISO date");
      days.push_back(*d);
    }
    const auto first = std::min_element(days.begin(), days.end());
    t.first_date = raw_x[static_cast<std::size_t>(first - days.begin())];
    for (long d : days) t.x.push_back(static_cast<double>(d - *first));
  } else {
    for (const auto& s : raw_x) {
      const auto v = parse_number(s);
      if (!v) throw DataError("x value '" + s + "' is not a number");
      t.x.push_back(*v);
    }
  }
  return t;
}

Table read_table(const SmoothConfig& cfg) {
  std::ifstream f(cfg.input);
  if (!f) throw DataError("cannot open input file '" + cfg.input + "'");
  return read_table(f, cfg);
}

KnotVector knots_for(const Table& t, const SmoothConfig& cfg) {
  if (cfg.degree < 2) throw InvalidOrder("degree must be at least 2");
  const Index n = static_cast<Index>(t.x.size());
  const Index k = cfg.knots ? *cfg.knots : static_cast<Index>(std::lround(static_cast<double>(n) * cfg.knot_frac));
  if (k < 2) throw InvalidArgument("need at least 2 knots; raise --knots or --knot-frac");
  KnotVector kv = quantile_knots(t.x, k, cfg.degree);
  if (kv.num_basis() >= n)
    throw DegenerateData("p = " + std::to_string(kv.num_basis()) + " basis functions need more than n = " +
                         std::to_string(n) + " observations");
  return kv;
}

PenaltyFactor penalty_for(const KnotVector& kv, const SmoothConfig& cfg) {
  if (cfg.order < 1 || cfg.order > cfg.degree - 1) throw InvalidOrder("penalty order must satisfy 1 <= m <= d-1");
  switch (cfg.penalty) {
    case PenaltyChoice::gps: return general_diff(kv, cfg.order);
    case PenaltyChoice::sps: return standard_diff(kv.num_basis(), cfg.order);
    case PenaltyChoice::os: return derivative_factor(kv, cfg.order);
  }
  throw InvalidArgument("unknown penalty");
}

std::string cmd_interval(const SmoothConfig& cfg) {
  const Model model = build_model(cfg);
  const IntervalReport r = auto_interval(model.prob, cfg.kappa, cfg.mode, cfg.seed);
  const json j = interval_json(r, model, cfg);
  if (cfg.format == Format::json) return j.dump(2) + "\n";
  std::ostringstream os;
  os << "rho_lo,rho_hi,kind,kappa,q,lambda_max,lambda_min,lambda_mean,singular,rho_star_min,rho_star_max,rho_hat_max\n"
     << number(r.interval.rho_lo) << ',' << number(r.interval.rho_hi) << ',' << to_string(r.interval.kind) << ','
     << number(r.interval.kappa) << ',' << r.summary.q << ',' << number(r.summary.lambda_max) << ','
     << number(r.summary.lambda_min) << ',' << number(r.summary.lambda_mean) << ',' << (r.summary.singular ? 1 : 0)
     << ',' << number(r.rho_star_min) << ',' << number(r.rho_star_max) << ','
     << (r.rho_hat_max ? number(*r.rho_hat_max) : "") << '\n';
  return os.str();
}

std::string cmd_curves(const SmoothConfig& cfg) {
  const Model model = build_model(cfg);
  const IntervalReport r = auto_interval(model.prob, cfg.kappa, cfg.mode, cfg.seed);
  const CriterionCurve c = evaluate(model.prob, make_grid(r.interval, cfg.grid));
  if (cfg.format == Format::csv) {
    std::ostringstream os;
    os << "rho,edf,gcv,reml\n";
    for (std::size_t i = 0; i < c.rhos.size(); ++i)
      os << number(c.rhos[i]) << ',' << number(c.edf[i]) << ',' << number(c.gcv[i]) << ',' << number(c.reml[i])
         << '\n';
    return os.str();
  }
  json j;
  j["schema"] = 1;
  j["interval"] = interval_json(r, model, cfg);
  j["rho"] = c.rhos;
  j["edf"] = c.edf;
  j["gcv"] = c.gcv;
  j["reml"] = c.reml;
  j["failures"] = c.failures;
  j["gcv_local_minima"] = local_optima(c, Criterion::gcv).size();
  return j.dump(2) + "\n";
}

std::string cmd_fit(const SmoothConfig& cfg) {
  const Model model = build_model(cfg);
  const IntervalReport r = auto_interval(model.prob, cfg.kappa, cfg.mode, cfg.seed);
  const CriterionCurve c = evaluate(model.prob, make_grid(r.interval, cfg.grid));

  const Vectord dense_x = Vectord::LinSpaced(200, model.kv.domain_lo(), model.kv.domain_hi());
  const DesignMatrix b_data = design_matrix(model.kv, model.table.x);
  const DesignMatrix b_dense = design_matrix(model.kv, std::span<const double>(dense_x.data(), dense_x.size()));

  json fits = json::array();
  std::vector<Vectord> fitted, curve;
  const auto crits = criteria(cfg.criterion);
  for (Criterion crit : crits) {
    const Selection sel = select_optimum(c, crit);
    const PlsFit fit = solve_at(model.prob, sel.rho);
    fitted.push_back(b_data * fit.beta_hat);
    curve.push_back(b_dense * fit.beta_hat);
    const std::size_t i = static_cast<std::size_t>(sel.index);
    json f;
    f["criterion"] = to_string(crit);
    f["rho"] = sel.rho;
    f["index"] = sel.index;
    f["value"] = sel.value;
    f["edf"] = c.edf[i];
    f["gcv"] = c.gcv[i];
    f["reml"] = c.reml[i];
    f["sigma2_hat"] = fit.sigma2_hat;
    const auto warn = boundary_warning(c, sel);
    f["warning"] = warn ? json(*warn) : json(nullptr);
    fits.push_back(std::move(f));
  }

  if (cfg.format == Format::csv) {
    std::ostringstream os;
    os << "kind,x,y";
    for (Criterion crit : crits) os << ",fit_" << to_string(crit);
    os << '\n';
    for (std::size_t i = 0; i < model.table.x.size(); ++i) {
      os << "data," << number(model.table.x[i]) << ',' << number(model.table.y[i]);
      for (const auto& f : fitted) os << ',' << number(f(static_cast<Index>(i)));
      os << '\n';
    }
    for (Index i = 0; i < dense_x.size(); ++i) {
      os << "grid," << number(dense_x(i)) << ',';
      for (const auto& f : curve) os << ',' << number(f(i));
      os << '\n';
    }
    return os.str();
  }

  json j;
  j["schema"] = 1;
  j["interval"] = interval_json(r, model, cfg);
  j["grid_size"] = c.size();
  j["grid_failures"] = c.failures;
  j["fits"] = std::move(fits);
  j["x"] = model.table.x;
  j["y"] = model.table.y;
  json yhat, dense;
  dense["x"] = std::vector<double>(dense_x.begin(), dense_x.end());
  for (std::size_t k = 0; k < crits.size(); ++k) {
    const std::string name(to_string(crits[k]));
    yhat[name] = std::vector<double>(fitted[k].begin(), fitted[k].end());
    dense[name] = std::vector<double>(curve[k].begin(), curve[k].end());
  }
  j["y_hat"] = std::move(yhat);
  j["curve"] = std::move(dense);
  return j.dump(2) + "\n";
}

std::string cmd_simulate(const SimulateConfig& cfg) {
  std::vector<CoverageReport> reports;
  for (int id : cfg.scenarios)
    reports.push_back(run_scenario(Scenario::from_id(id), cfg.p, cfg.d, cfg.m, cfg.reps, cfg.seed, cfg.kappa));
  if (cfg.format == Format::csv) {
    std::string out;
    for (std::size_t k = 0; k < reports.size(); ++k) {
      const std::string csv = to_csv(reports[k]);
      out += k == 0 ? csv : csv.substr(csv.find('\n') + 1);
    }
    return out;
  }
  json j;
  j["schema"] = 1;
  json arr = json::array();
  for (const auto& r : reports) {
    json one = json::parse(to_json(r));
    one.erase("schema");
    try {
      const Density d = coverage_density(r);
      one["density"] = {{"lo", d.lo},           {"hi", d.hi},
                        {"counts", d.counts},   {"density", d.density},
                        {"below", d.below},     {"reference", d.reference},
                        {"mean_p_star", d.mean_p_star}};
    } catch (const TooFewSamples&) {
      one["density"] = nullptr;
    }
    arr.push_back(std::move(one));
  }
  j["reports"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string cmd_bench(const BenchConfig& cfg, std::ostream& log) {
  const auto rows = bench_intervals(cfg.p_list, cfg.reps, cfg.seed);
  std::vector<double> p, a, b, c;
  for (const auto& r : rows) {
    p.push_back(static_cast<double>(r.p));
    a.push_back(r.wide_heuristic);
    b.push_back(r.exact);
    c.push_back(r.grid20);
  }
  log << "     p   wide+heuristic        exact      grid N=20\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%6lld %14.4fs %12.4fs %14.4fs\n", static_cast<long long>(r.p), r.wide_heuristic,
                  r.exact, r.grid20);
    log << buf;
  }
  std::optional<double> sa, sb, sc;
  if (rows.size() >= 2) {
    sa = loglog_slope(p, a);
    sb = loglog_slope(p, b);
    sc = loglog_slope(p, c);
    log << "log-log slopes: wide+heuristic " << *sa << ", exact " << *sb << ", grid " << *sc << '\n';
  }
  if (cfg.format == Format::csv) return to_csv(rows);
  json j;
  j["schema"] = 1;
  j["reps"] = cfg.reps;
  j["p"] = p;
  j["wide_heuristic_s"] = a;
  j["exact_s"] = b;
  j["grid20_s"] = c;
  if (sa) j["slopes"] = {{"wide_heuristic", *sa}, {"exact", *sb}, {"grid20", *sc}};
  return j.dump(2) + "\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized B-spline smoothing with an automatic search interval for the smoothing parameter",
               "pspline"};
  app.require_subcommand(1);

  const std::map<std::string, PenaltyChoice> penalties{
      {"gps", PenaltyChoice::gps}, {"sps", PenaltyChoice::sps}, {"os", PenaltyChoice::os}};
  const std::map<std::string, IntervalMode> modes{{"exact", IntervalMode::exact},
                                                  {"wide", IntervalMode::wide},
                                                  {"heuristic", IntervalMode::heuristic_preferred}};
  const std::map<std::string, CriterionChoice> crits{
      {"gcv", CriterionChoice::gcv}, {"reml", CriterionChoice::reml}, {"both", CriterionChoice::both}};
  const std::map<std::string, Format> formats{{"json", Format::json}, {"csv", Format::csv}};

  SmoothConfig sc;
  Index knots = 0;
  std::string penalty = "gps", mode = "heuristic", criterion = "both", format = "json";
  std::string sim_format = "json", bench_format = "csv";
  const auto keys = [](const auto& m) {
    std::vector<std::string> k;
    for (const auto& [name, value] : m) k.push_back(name);
    return k;
  };
  auto add_smooth = [&](CLI::App* s) {
    s->add_option("--input", sc.input, "CSV file with a header row")->required();
    s->add_option("--x-col", sc.x_col, "x column (numbers or ISO dates)")->capture_default_str();
    s->add_option("--y-col", sc.y_col, "response column")->capture_default_str();
    s->add_option("--w-col", sc.w_col, "optional weight column");
    s->add_option("-d,--degree", sc.degree, "B-spline order (4 = cubic)")->capture_default_str();
    s->add_option("--penalty", penalty, "gps, sps or os")->check(CLI::IsMember(keys(penalties)))->capture_default_str();
    s->add_option("-m,--order", sc.order, "penalty order")->capture_default_str();
    s->add_option("--knots", knots, "number of quantile knots");
    s->add_option("--knot-frac", sc.knot_frac, "knots per observation when --knots is absent")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    s->add_option("--kappa", sc.kappa, "coverage parameter in (0, 0.5)")->capture_default_str();
    s->add_option("--mode", mode, "exact, wide or heuristic")->check(CLI::IsMember(keys(modes)))->capture_default_str();
    s->add_option("--grid", sc.grid, "number of grid points")->check(CLI::Range(Index{2}, Index{1000000}));
    s->add_option("--criterion", criterion, "gcv, reml or both")->check(CLI::IsMember(keys(crits)))->capture_default_str();
    s->add_option("--seed", sc.seed, "seed for the eigenvalue iterations")->capture_default_str();
    s->add_option("--output", sc.output, "output file (default stdout)");
    s->add_option("--format", format, "json or csv")->check(CLI::IsMember(keys(formats)))->capture_default_str();
  };
  CLI::App* interval = app.add_subcommand("interval", "compute the search interval for rho");
  CLI::App* fit = app.add_subcommand("fit", "select rho by grid search and fit");
  CLI::App* curves = app.add_subcommand("curves", "edf, GCV and REML over the grid");
  for (CLI::App* s : {interval, fit, curves}) add_smooth(s);

  SimulateConfig sim;
  CLI::App* simulate = app.add_subcommand("simulate", "coverage simulation over the 8 scenarios");
  simulate->add_option("--scenario", sim.scenarios, "scenario ids 1..8 (default all)")
      ->check(CLI::Range(1, 8))
      ->delimiter(',');
  simulate->add_option("--p", sim.p, "number of B-splines")->capture_default_str();
  simulate->add_option("-d,--degree", sim.d, "B-spline order")->capture_default_str();
  simulate->add_option("-m,--order", sim.m, "penalty order")->capture_default_str();
  simulate->add_option("--reps", sim.reps, "replications per scenario")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "master seed")->capture_default_str();
  simulate->add_option("--kappa", sim.kappa, "coverage parameter")->capture_default_str();
  simulate->add_option("--output", sim.output, "output file (default stdout)");
  simulate->add_option("--format", sim_format, "json or csv")->check(CLI::IsMember(keys(formats)))->capture_default_str();

  BenchConfig bc;
  CLI::App* bench = app.add_subcommand("bench", "runtime of the interval paths against a 20-point grid");
  bench->add_option("--p-list", bc.p_list, "ascending p values")->delimiter(',');
  bench->add_option("--reps", bc.reps, "repetitions (median reported)")->capture_default_str();
  bench->add_option("--seed", bc.seed, "seed")->capture_default_str();
  bench->add_option("--output", bc.output, "output file (default stdout)");
  bench->add_option("--format", bench_format, "json or csv")->check(CLI::IsMember(keys(formats)))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (knots > 0) sc.knots = knots;
    sc.penalty = penalties.at(penalty);
    sc.mode = modes.at(mode);
    sc.criterion = crits.at(criterion);
    sc.format = formats.at(format);
    sim.format = formats.at(sim_format);
    bc.format = formats.at(bench_format);
    std::string text;
    std::string path;
    if (interval->parsed()) {
      text = cmd_interval(sc);
      path = sc.output;
    } else if (fit->parsed()) {
      text = cmd_fit(sc);
      path = sc.output;
    } else if (curves->parsed()) {
      text = cmd_curves(sc);
      path = sc.output;
    } else if (simulate->parsed()) {
      text = cmd_simulate(sim);
      path = sim.output;
    } else {
      text = cmd_bench(bc, err);
      path = bc.output;
    }
    write_output(text, path, out);
    return 0;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::data);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numerical);
  }
}

}  // namespace pspline::cli
