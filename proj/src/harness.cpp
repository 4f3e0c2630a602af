#include "rigidlab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "rigidlab/conditional.hpp"
#include "rigidlab/diagnostics.hpp"
#include "rigidlab/errors.hpp"
#include "rigidlab/parallel.hpp"
#include "rigidlab/symfun.hpp"

namespace rigidlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kPairsPerTrial = 20;
constexpr int kPairAttempts = 2000;
constexpr int kMaxR = 30;
constexpr int kTailLevels = 5;

struct ExperimentInfo {
  Experiment e;
  const char* name;
  const char* tag;
  const char* help;
};

const ExperimentInfo kInfo[] = {
    {Experiment::tolerance_gaf, "tolerance_gaf", "tolerance_gaf",
     "tolerance, GAF zeros: given the outside zeros and the inside sum, rho / |Delta|^2 stays within fixed bounds"},
    {Experiment::tolerance_ginibre, "tolerance_ginibre", "tolerance_ginibre",
     "tolerance, Ginibre: given the outside eigenvalues, rho / |Delta|^2 stays within fixed bounds"},
    {Experiment::rigidity_sum, "rigidity_sum", "rigidity_sum",
     "rigidity, GAF zeros: the outside zeros determine the inside sum (conditional spread shrinks with n)"},
    {Experiment::expansion_decay, "expansion_decay", "expansion_decay",
     "expansion of sigma_k(omega) around the inside zeros: g_r and eta_l decay"},
    {Experiment::tails, "tails", "tails",
     "inverse power sums of the outside zeros: smoothed dyadic tails have decaying first moments"},
    {Experiment::nr2_bound, "nr2_bound", "nr2_bound",
     "outside factor |Delta(zeta, omega)|^2 changes by at most exp(c 2m X_n) as zeta moves"},
};

const ExperimentInfo& info(Experiment e) {
  for (const auto& i : kInfo)
    if (i.e == e) return i;
  throw DomainError("unknown experiment");
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  int c = 0;
  for (const double x : v)
    if (!std::isnan(x)) {
      s += x;
      ++c;
    }
  return c ? s / c : kNaN;
}

bool separated(std::span<const cplx> zeta, std::span<const cplx> omega) {
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    for (std::size_t j = i + 1; j < zeta.size(); ++j)
      if (std::abs(zeta[i] - zeta[j]) < kMinSeparation) return false;
    for (const cplx w : omega)
      if (std::abs(zeta[i] - w) < kMinSeparation) return false;
  }
  return true;
}

double log_r(const ConditionalDensity& target, std::span<const cplx> zeta) {
  const double l = target.log_density(zeta);
  const LogReal v = vandermonde_sq_log(zeta);
  if (l == kNegInf || v.sign == 0) return kNegInf;
  return l - static_cast<double>(v.log_mag);
}

void fill_sup_inf(ToleranceTrial& t, const std::vector<double>& logs) {
  t.grid_points = static_cast<int>(logs.size());
  if (t.grid_points < kMinGridPoints) {
    t.flag = "few_grid_points";
    t.log_sup = t.log_inf = kNaN;
    return;
  }
  // scale to geometric mean 1 so the reported extremes stay representable
  const double centre = std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
  const auto [lo, hi] = std::minmax_element(logs.begin(), logs.end());
  t.log_sup = *hi - centre;
  t.log_inf = *lo - centre;
}

std::vector<double> chain_log_r(const ConditionalDensity& target, const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng init_rng(derive_seed(seed, "mcmc-init", 0));
  const cplx s = target.sum().value_or(cplx(0.0, 0.0));
  std::vector<cplx> init;
  if (target.constrained()) {
    init = feasible_init(target.omega(), s, target.m(), target.domain(), init_rng);
  } else {
    // m points, one per sector of a small circle: distinct and inside
    for (int i = 0; i < target.m(); ++i)
      init.push_back(std::polar(0.5 * target.domain().radius, 2.0 * M_PI * i / target.m() + 0.1));
  }
  McmcConfig mc = cfg.mcmc;
  mc.seed = derive_seed(seed, "mcmc", 0);
  const auto trace = run_mcmc(target, init, mc);
  std::vector<double> logs;
  for (const auto& z : trace.samples) {
    if (!separated(z, target.omega())) continue;
    const double l = log_r(target, z);
    if (std::isfinite(l)) logs.push_back(l);
  }
  return logs;
}

template <class T, class Fn>
std::vector<T> for_each_trial(const ExperimentConfig& cfg, Fn&& fn) {
  const std::size_t per = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = per * cfg.n_list.size();
  return parallel_map(total, cfg.workers, [&](std::size_t i) -> T {
    return fn(cfg.n_list[i / per], static_cast<int>(i % per));
  });
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, int n, int trial) {
  return derive_seed(cfg.master_seed, info(cfg.experiment).tag, static_cast<std::uint64_t>(n),
                     static_cast<std::uint64_t>(trial));
}

std::string flag_of(const std::vector<Cell>& row) { return std::get<std::string>(row.back()); }

void finalize_flags(ExperimentReport& r) {
  std::map<std::string, int> reasons;
  for (const auto& row : r.rows) {
    const std::string f = flag_of(row);
    if (f.empty()) continue;
    ++r.flagged;
    ++reasons[f];
  }
  r.flag_reasons.assign(reasons.begin(), reasons.end());
  r.degraded = !r.rows.empty() && static_cast<double>(r.flagged) / r.rows.size() >= kDegradedFlagRate;
}

ExperimentReport new_report(const ExperimentConfig& cfg, std::vector<std::string> columns) {
  ExperimentReport r;
  r.config = cfg;
  r.columns = std::move(columns);
  return r;
}

std::string n_key(const char* stem, int n) { return std::string(stem) + "_n" + std::to_string(n); }

ExperimentReport tolerance_report(const ExperimentConfig& cfg, const std::vector<ToleranceTrial>& trials) {
  auto r = new_report(cfg, {"trial", "n", "m", "seed", "sup_ratio", "inf_ratio", "ratio_quotient", "grid_points", "flag"});
  const std::size_t per = static_cast<std::size_t>(cfg.trials);
  PlotSeries plot{"median_ratio", "n", "median sup/inf of rho/|Delta|^2", {}};
  std::vector<double> medians;
  for (std::size_t a = 0; a < cfg.n_list.size(); ++a) {
    std::vector<double> q;
    int finite = 0, counted = 0;
    for (std::size_t t = 0; t < per; ++t) {
      const auto& tr = trials[a * per + t];
      const double quotient = std::exp(tr.log_sup - tr.log_inf);
      r.rows.push_back({std::int64_t(t), std::int64_t(tr.n), std::int64_t(tr.m), tr.seed, std::exp(tr.log_sup),
                        std::exp(tr.log_inf), quotient, std::int64_t(tr.grid_points), tr.flag});
      if (!tr.flag.empty()) continue;
      ++counted;
      finite += std::isfinite(quotient);
      q.push_back(quotient);
    }
    const int n = cfg.n_list[a];
    const double med = median(q);
    medians.push_back(med);
    r.summary.emplace_back(n_key("median_ratio_quotient", n), med);
    r.summary.emplace_back(n_key("finite_fraction", n), counted ? static_cast<double>(finite) / counted : kNaN);
    plot.points.emplace_back(n, med);
  }
  if (!medians.empty()) r.summary.emplace_back("median_growth_first_to_last", medians.back() / medians.front());
  r.plots.push_back(std::move(plot));
  r.notes.emplace_back("ratio", "R = rho/|Delta(zeta)|^2 on points separated by >= 0.05, scaled to geometric mean 1");
  finalize_flags(r);
  return r;
}

}  // namespace

const char* to_string(Experiment e) { return info(e).name; }

Experiment experiment_from_string(const std::string& name) {
  for (const auto& i : kInfo)
    if (name == i.name) return i.e;
  throw DomainError("unknown experiment '" + name + "'");
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    for (const auto& i : kInfo) v.push_back(i.e);
    return v;
  }();
  return all;
}

std::string experiment_help() {
  std::ostringstream os;
  for (const auto& i : kInfo) os << "  " << i.name << std::string(20 - std::string(i.name).size(), ' ') << i.help << "\n";
  return os.str();
}

Format format_from_string(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  if (name == "plotdata") return Format::plotdata;
  throw DomainError("unknown format '" + name + "' (csv, json, plotdata)");
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n_list.empty()) throw DomainError("config: n_list is empty");
  for (const int n : cfg.n_list)
    if (n < 1 || n > kMaxGafDegree) throw DomainError("config: n_list entries must be in [1, 300]");
  if (cfg.m < 1) throw DomainError("config: m must be >= 1");
  if (!(cfg.r0 > 0.0) || !std::isfinite(cfg.r0)) throw DomainError("config: r0 must be positive");
  if (cfg.trials < 0) throw DomainError("config: trials must be >= 0");
  if (cfg.grid_resolution < 2 || cfg.grid_resolution_4d < 2) throw DomainError("config: grid resolutions must be >= 2");
  const auto e = cfg.experiment;
  const bool tolerance = e == Experiment::tolerance_gaf || e == Experiment::tolerance_ginibre;
  if (tolerance && !cfg.use_mcmc && cfg.m != 2) throw DomainError("config: grid mode needs m = 2 (set use_mcmc for m >= 3)");
  if ((e == Experiment::rigidity_sum || e == Experiment::nr2_bound) && cfg.m != 2)
    throw DomainError("config: " + std::string(to_string(e)) + " needs m = 2");
  if (e == Experiment::rigidity_sum && !std::is_sorted(cfg.n_list.begin(), cfg.n_list.end()))
    throw DomainError("config: rigidity_sum needs an ascending n_list");
  if (e == Experiment::rigidity_sum || e == Experiment::tolerance_ginibre) {
    const double nodes = static_cast<double>(disk_midpoints(DiskDomain(cfg.r0), cfg.grid_resolution_4d).size());
    if (nodes * nodes / 2 > kMaxQuadratureNodes) throw DomainError("config: grid_resolution_4d too large");
  }
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["experiment"] = to_string(cfg.experiment);
  j["n_list"] = cfg.n_list;
  j["m"] = cfg.m;
  j["r0"] = cfg.r0;
  j["trials"] = cfg.trials;
  j["grid_resolution"] = cfg.grid_resolution;
  j["grid_resolution_4d"] = cfg.grid_resolution_4d;
  j["use_mcmc"] = cfg.use_mcmc;
  j["mcmc"] = {{"step_scale", cfg.mcmc.step_scale}, {"steps", cfg.mcmc.steps}, {"burn_in", cfg.mcmc.burn_in},
               {"adapt", cfg.mcmc.adapt},           {"seed", cfg.mcmc.seed},   {"thin", cfg.mcmc.thin}};
  j["master_seed"] = cfg.master_seed;
  j["output_path"] = cfg.output_path;
  j["workers"] = cfg.workers;
  j["timing"] = cfg.timing;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  if (!j.is_object()) throw DomainError("config: top level must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "experiment") c.experiment = experiment_from_string(v.get<std::string>());
      else if (key == "n_list") c.n_list = v.get<std::vector<int>>();
      else if (key == "m") c.m = v.get<int>();
      else if (key == "r0") c.r0 = v.get<double>();
      else if (key == "trials") c.trials = v.get<int>();
      else if (key == "grid_resolution") c.grid_resolution = v.get<int>();
      else if (key == "grid_resolution_4d") c.grid_resolution_4d = v.get<int>();
      else if (key == "use_mcmc") c.use_mcmc = v.get<bool>();
      else if (key == "master_seed") c.master_seed = v.get<std::uint64_t>();
      else if (key == "output_path") c.output_path = v.get<std::string>();
      else if (key == "workers") c.workers = v.get<unsigned>();
      else if (key == "timing") c.timing = v.get<bool>();
      else if (key == "mcmc") {
        for (const auto& [mk, mv] : v.items()) {
          if (mk == "step_scale") c.mcmc.step_scale = mv.get<double>();
          else if (mk == "steps") c.mcmc.steps = mv.get<std::int64_t>();
          else if (mk == "burn_in") c.mcmc.burn_in = mv.get<std::int64_t>();
          else if (mk == "adapt") c.mcmc.adapt = mv.get<bool>();
          else if (mk == "seed") c.mcmc.seed = mv.get<std::uint64_t>();
          else if (mk == "thin") c.mcmc.thin = mv.get<int>();
          else throw DomainError("config: unknown key mcmc." + mk);
        }
      } else {
        throw DomainError("config: unknown key " + key);
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DomainError(std::string("config: ") + ex.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& ex) {
    throw DomainError("config " + path.string() + ": " + ex.what());
  }
  return config_from_json(j);
}

GafDraw draw_gaf_with_m(int n, int m, double r0, std::uint64_t seed) {
  Rng rng(seed);
  const DiskDomain domain(r0);
  GafDraw d;
  for (int attempt = 0; attempt < kSplitAttempts; ++attempt) {
    d.instance = sample_gaf(n, rng);
    d.split = split(d.instance.roots, domain, rng);
    if (d.split.m != m) continue;
    d.flag = d.instance.flagged ? "root_solver" : "";
    return d;
  }
  d.flag = "no_m_split";
  return d;
}

ToleranceTrial tolerance_gaf_trial(const ExperimentConfig& cfg, int n, int trial) {
  ToleranceTrial t;
  t.n = n;
  t.m = cfg.m;
  t.seed = trial_seed(cfg, n, trial);
  t.log_sup = t.log_inf = kNaN;
  if (cfg.m >= n) {
    t.flag = "unsupported_no_outside_zeros";
    return t;
  }
  const auto d = draw_gaf_with_m(n, cfg.m, cfg.r0, t.seed);
  if (!d.flag.empty()) {
    t.flag = d.flag;
    return t;
  }
  t.omega = d.split.omega;
  t.s = d.split.s;
  const DiskDomain domain(cfg.r0);
  const auto target = ConditionalDensity::gaf(n, t.omega, t.s, domain);
  std::vector<double> logs;
  if (cfg.use_mcmc) {
    logs = chain_log_r(target, cfg, t.seed);
  } else {
    for (const cplx z2 : disk_midpoints(domain, cfg.grid_resolution)) {
      const cplx z1 = t.s - z2;
      if (!domain.contains(z1)) continue;
      const std::vector<cplx> zeta{z1, z2};
      if (!separated(zeta, t.omega)) continue;
      const double l = log_r(target, zeta);
      if (std::isfinite(l)) logs.push_back(l);
    }
  }
  fill_sup_inf(t, logs);
  return t;
}

ToleranceTrial tolerance_ginibre_trial(const ExperimentConfig& cfg, int n, int trial) {
  ToleranceTrial t;
  t.n = n;
  t.m = cfg.m;
  t.seed = trial_seed(cfg, n, trial);
  t.log_sup = t.log_inf = kNaN;
  if (cfg.m >= n) {
    t.flag = "unsupported_no_outside_points";
    return t;
  }
  const DiskDomain domain(cfg.r0);
  Rng rng(t.seed);
  SplitConfiguration sp;
  bool found = false;
  bool eig_flag = false;
  for (int attempt = 0; attempt < kSplitAttempts && !found; ++attempt) {
    const auto g = sample_ginibre(n, rng);
    sp = split(g.eigenvalues, domain, rng);
    found = sp.m == cfg.m;
    eig_flag = g.flagged;
  }
  if (!found) {
    t.flag = "no_m_split";
    return t;
  }
  if (eig_flag) {
    t.flag = "eigensolver";
    return t;
  }
  t.omega = sp.omega;
  t.s = sp.s;
  const auto target = ConditionalDensity::ginibre(n, t.omega, domain);
  std::vector<double> logs;
  if (cfg.use_mcmc) {
    logs = chain_log_r(target, cfg, t.seed);
  } else {
    const auto pts = disk_midpoints(domain, cfg.grid_resolution_4d);
    std::vector<cplx> zeta(2);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        zeta[0] = pts[i];
        zeta[1] = pts[j];
        if (!separated(zeta, t.omega)) continue;
        const double l = log_r(target, zeta);
        if (std::isfinite(l)) logs.push_back(l);
      }
  }
  fill_sup_inf(t, logs);
  return t;
}

RigidityTrial rigidity_trial(const ExperimentConfig& cfg, int n, int trial) {
  RigidityTrial t;
  t.n = n;
  t.m = cfg.m;
  t.seed = trial_seed(cfg, n, trial);
  t.variance = kNaN;
  t.mean_sum = {kNaN, kNaN};
  const auto d = draw_gaf_with_m(n, cfg.m, cfg.r0, t.seed);
  if (!d.flag.empty()) {
    t.flag = d.flag;
    return t;
  }
  const DiskDomain domain(cfg.r0);
  const auto target = ConditionalDensity::gaf(n, d.split.omega, std::nullopt, domain);
  const auto pts = disk_midpoints(domain, cfg.grid_resolution_4d);
  std::vector<double> logs;
  std::vector<cplx> sums;
  std::vector<cplx> zeta(2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      zeta[0] = pts[i];
      zeta[1] = pts[j];
      const double l = target.log_density(zeta);
      if (!std::isfinite(l)) continue;
      logs.push_back(l);
      sums.push_back(pts[i] + pts[j]);
    }
  t.grid_points = static_cast<int>(logs.size());
  if (t.grid_points < kMinGridPoints) {
    t.flag = "few_grid_points";
    return t;
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  cplx first(0.0, 0.0);
  for (std::size_t k = 0; k < logs.size(); ++k) {
    const double w = std::exp(logs[k] - peak);
    total += w;
    first += w * sums[k];
  }
  t.mean_sum = first / total;
  double var = 0.0;
  for (std::size_t k = 0; k < logs.size(); ++k) var += std::exp(logs[k] - peak) * std::norm(sums[k] - t.mean_sum);
  t.variance = var / total;
  return t;
}

ExperimentReport run_tolerance_gaf(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto trials = for_each_trial<ToleranceTrial>(cfg, [&](int n, int t) { return tolerance_gaf_trial(cfg, n, t); });
  return tolerance_report(cfg, trials);
}

ExperimentReport run_tolerance_ginibre(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto trials =
      for_each_trial<ToleranceTrial>(cfg, [&](int n, int t) { return tolerance_ginibre_trial(cfg, n, t); });
  auto r = tolerance_report(cfg, trials);
  r.notes.emplace_back("normalization", "Ginibre entries CN(0,1), bulk radius sqrt(n)");
  return r;
}

ExperimentReport run_rigidity_sum(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto trials = for_each_trial<RigidityTrial>(cfg, [&](int n, int t) { return rigidity_trial(cfg, n, t); });
  auto r = new_report(cfg, {"trial", "n", "m", "seed", "mean_sum_re", "mean_sum_im", "variance", "std", "grid_points", "flag"});
  const std::size_t per = static_cast<std::size_t>(cfg.trials);
  PlotSeries plot{"median_std", "n", "median conditional std of the inside sum", {}};
  std::vector<double> medians;
  for (std::size_t a = 0; a < cfg.n_list.size(); ++a) {
    std::vector<double> sd;
    for (std::size_t t = 0; t < per; ++t) {
      const auto& tr = trials[a * per + t];
      const double s = std::sqrt(tr.variance);
      r.rows.push_back({std::int64_t(t), std::int64_t(tr.n), std::int64_t(tr.m), tr.seed, tr.mean_sum.real(),
                        tr.mean_sum.imag(), tr.variance, s, std::int64_t(tr.grid_points), tr.flag});
      if (tr.flag.empty()) sd.push_back(s);
    }
    medians.push_back(median(sd));
    r.summary.emplace_back(n_key("median_std", cfg.n_list[a]), medians.back());
    plot.points.emplace_back(cfg.n_list[a], medians.back());
  }
  if (!medians.empty()) r.summary.emplace_back("std_decay_factor_first_to_last", medians.front() / medians.back());
  r.plots.push_back(std::move(plot));
  r.notes.emplace_back("target",
                       "decay factor >= 2 between the first and last n is an artifact-level target; "
                       "the limit statement gives no finite-n rate");
  finalize_flags(r);
  return r;
}

ExperimentReport run_expansion_decay(const ExperimentConfig& cfg) {
  validate(cfg);
  static constexpr int kEtaL[] = {5, 10, 20, 40};
  struct Trial {
    std::vector<Cell> row;
    std::vector<double> g_root;  // |g_r|^(1/r), r = 1..30
    std::vector<double> eta;     // |eta_l|, l = 0..n (NaN where l < m)
    bool within = true;
    double residual = 0.0;
  };
  const auto trials = for_each_trial<Trial>(cfg, [&](int n, int trial) {
    Trial out;
    const std::uint64_t seed = trial_seed(cfg, n, trial);
    Rng rng(seed);
    const auto g = sample_gaf(n, rng);
    const auto sp = split(g.roots, DiskDomain(cfg.r0), rng);
    const auto gr = reciprocal_series_g(sp.zeta, kMaxR);
    double zmax = 0.0;
    for (const cplx z : sp.zeta) zmax = std::max(zmax, std::abs(z));
    const double bound = sp.m * zmax + 0.1;
    double gmax = 0.0;
    for (int r = 1; r <= kMaxR; ++r) {
      const double v = std::pow(std::abs(gr[r - 1]), 1.0 / r);
      out.g_root.push_back(v);
      gmax = std::max(gmax, v);
    }
    out.within = gmax < bound;
    out.residual = expansion_identity_residual(sp.zeta, sp.omega);
    const auto eta = eta_all(g, sp);
    for (int l = 0; l <= n; ++l) out.eta.push_back(l < sp.m ? kNaN : std::abs(eta[l]));
    out.row = {std::int64_t(trial), std::int64_t(n), std::int64_t(sp.m), seed, out.residual, gmax, bound};
    for (const int l : kEtaL) out.row.push_back(l <= n && l >= sp.m ? std::abs(eta[l]) : kNaN);
    out.row.push_back(std::string(g.flagged ? "root_solver" : ""));
    return out;
  });
  auto r = new_report(cfg, {"trial", "n", "m", "seed", "identity_residual", "max_g_root", "g_bound", "eta_l5",
                            "eta_l10", "eta_l20", "eta_l40", "flag"});
  const std::size_t per = static_cast<std::size_t>(cfg.trials);
  double worst = 0.0;
  int violations = 0;
  for (std::size_t a = 0; a < cfg.n_list.size(); ++a) {
    const int n = cfg.n_list[a];
    PlotSeries gplot{n_key("g_root", n), "r", "median |g_r|^(1/r)", {}};
    PlotSeries eplot{n_key("eta_median", n), "l", "median |eta_l|", {}};
    for (std::size_t t = 0; t < per; ++t) {
      const auto& tr = trials[a * per + t];
      r.rows.push_back(tr.row);
      worst = std::max(worst, tr.residual);
      violations += !tr.within;
    }
    for (int k = 0; k < kMaxR; ++k) {
      std::vector<double> col;
      for (std::size_t t = 0; t < per; ++t) col.push_back(trials[a * per + t].g_root[k]);
      gplot.points.emplace_back(k + 1, median(col));
    }
    for (int l = 0; l <= n; ++l) {
      std::vector<double> col;
      for (std::size_t t = 0; t < per; ++t) col.push_back(trials[a * per + t].eta[l]);
      eplot.points.emplace_back(l, median(col));
    }
    for (const int l : kEtaL)
      if (l <= n) r.summary.emplace_back(n_key(("median_eta_l" + std::to_string(l)).c_str(), n), eplot.points[l].second);
    r.plots.push_back(std::move(gplot));
    r.plots.push_back(std::move(eplot));
  }
  r.summary.emplace_back("max_identity_residual", worst);
  r.summary.emplace_back("g_bound_violations", violations);
  finalize_flags(r);
  return r;
}

ExperimentReport run_tails(const ExperimentConfig& cfg) {
  validate(cfg);
  const BumpFamily bump(cfg.r0);
  struct Trial {
    std::vector<Cell> row;
    std::vector<double> tau;  // |tau_2(2^k)|, k = 1..5
    double err = 0.0;
  };
  const auto trials = for_each_trial<Trial>(cfg, [&](int n, int trial) {
    Trial out;
    const std::uint64_t seed = trial_seed(cfg, n, trial);
    Rng rng(seed);
    const auto g = sample_gaf(n, rng);
    const auto sp = split(g.roots, DiskDomain(cfg.r0), rng);
    out.row = {std::int64_t(trial), std::int64_t(n), std::int64_t(sp.m), seed};
    for (int k = 1; k <= kTailLevels; ++k) {
      out.tau.push_back(std::abs(tail(sp.omega, 2, k, bump).tau));
      out.row.push_back(out.tau.back());
    }
    const auto ips = inverse_power_sums(sp.omega, 4, bump);
    for (int l = 0; l < 4; ++l) {
      cplx total(0.0, 0.0);
      for (const auto& level : ips.psi) total += level[l];
      const double scale = std::max(std::abs(ips.s[l]), 1e-6 * ips.s_abs[l]);
      if (scale > 0) out.err = std::max(out.err, std::abs(total - ips.s[l]) / scale);
    }
    out.row.push_back(out.err);
    out.row.push_back(std::string(g.flagged ? "root_solver" : ""));
    return out;
  });
  auto r = new_report(cfg, {"trial", "n", "m", "seed", "abs_tau2_k1", "abs_tau2_k2", "abs_tau2_k3", "abs_tau2_k4",
                            "abs_tau2_k5", "dyadic_rel_err", "flag"});
  const std::size_t per = static_cast<std::size_t>(cfg.trials);
  double worst = 0.0;
  for (std::size_t a = 0; a < cfg.n_list.size(); ++a) {
    const int n = cfg.n_list[a];
    PlotSeries plot{n_key("mean_abs_tau2", n), "k", "mean |tau_2(2^k)|", {}};
    std::vector<double> means;
    for (std::size_t t = 0; t < per; ++t) {
      r.rows.push_back(trials[a * per + t].row);
      worst = std::max(worst, trials[a * per + t].err);
    }
    for (int k = 1; k <= kTailLevels; ++k) {
      std::vector<double> col;
      for (std::size_t t = 0; t < per; ++t) col.push_back(trials[a * per + t].tau[k - 1]);
      means.push_back(mean(col));
      r.summary.emplace_back(n_key(("mean_abs_tau2_k" + std::to_string(k)).c_str(), n), means.back());
      plot.points.emplace_back(k, means.back());
    }
    r.summary.emplace_back(n_key("strictly_decreasing_k2_to_k4", n), means[1] > means[2] && means[2] > means[3]);
    r.plots.push_back(std::move(plot));
  }
  r.summary.emplace_back("max_dyadic_rel_err", worst);
  finalize_flags(r);
  return r;
}

ExperimentReport run_nr2_bound(const ExperimentConfig& cfg) {
  validate(cfg);
  struct Trial {
    std::vector<Cell> row;
    double c = kNaN;
  };
  const DiskDomain domain(cfg.r0);
  const auto trials = for_each_trial<Trial>(cfg, [&](int n, int trial) {
    Trial out;
    const std::uint64_t seed = trial_seed(cfg, n, trial);
    const auto d = draw_gaf_with_m(n, cfg.m, cfg.r0, seed);
    double xn = kNaN, worst = kNaN;
    int pairs = 0;
    std::string flag = d.flag;
    if (flag.empty() && d.split.omega.empty()) flag = "unsupported_no_outside_zeros";
    if (flag.empty()) {
      const auto& omega = d.split.omega;
      xn = x_n(omega, cfg.r0);
      Rng rng(derive_seed(seed, "pairs", 0));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      auto point = [&] { return std::polar(cfg.r0 * std::sqrt(u(rng)), 2.0 * M_PI * u(rng)); };
      auto draw = [&](std::vector<cplx>& z) {
        for (auto& p : z) p = point();
        for (const cplx p : z)
          for (const cplx w : omega)
            if (std::abs(p - w) < kMinSeparation) return false;
        return true;
      };
      worst = 0.0;
      std::vector<cplx> a(cfg.m), b(cfg.m);
      for (int attempt = 0; attempt < kPairAttempts && pairs < kPairsPerTrial; ++attempt) {
        if (!draw(a) || !draw(b)) continue;
        const double lr =
            static_cast<double>(cross_product_log(b, omega).log_mag - cross_product_log(a, omega).log_mag);
        worst = std::max(worst, std::fabs(lr));
        ++pairs;
      }
      if (pairs == 0) flag = "no_valid_pairs";
      else out.c = worst / (2.0 * cfg.m * xn);
    }
    out.row = {std::int64_t(trial), std::int64_t(n), std::int64_t(cfg.m), seed, xn, worst, out.c,
               std::int64_t(pairs), flag};
    return out;
  });
  auto r = new_report(cfg, {"trial", "n", "m", "seed", "x_n", "max_abs_log_ratio", "c", "pairs", "flag"});
  const std::size_t per = static_cast<std::size_t>(cfg.trials);
  PlotSeries plot{"median_c", "n", "median fitted c", {}};
  std::vector<double> medians;
  for (std::size_t a = 0; a < cfg.n_list.size(); ++a) {
    std::vector<double> cs;
    for (std::size_t t = 0; t < per; ++t) {
      r.rows.push_back(trials[a * per + t].row);
      if (flag_of(trials[a * per + t].row).empty()) cs.push_back(trials[a * per + t].c);
    }
    medians.push_back(median(cs));
    r.summary.emplace_back(n_key("median_c", cfg.n_list[a]), medians.back());
    plot.points.emplace_back(cfg.n_list[a], medians.back());
  }
  if (!medians.empty()) {
    const auto [lo, hi] = std::minmax_element(medians.begin(), medians.end());
    r.summary.emplace_back("median_c_spread", *hi / *lo);
  }
  r.plots.push_back(std::move(plot));
  finalize_flags(r);
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  switch (cfg.experiment) {
    case Experiment::tolerance_gaf: r = run_tolerance_gaf(cfg); break;
    case Experiment::tolerance_ginibre: r = run_tolerance_ginibre(cfg); break;
    case Experiment::rigidity_sum: r = run_rigidity_sum(cfg); break;
    case Experiment::expansion_decay: r = run_expansion_decay(cfg); break;
    case Experiment::tails: r = run_tails(cfg); break;
    case Experiment::nr2_bound: r = run_nr2_bound(cfg); break;
  }
  if (cfg.timing)
    r.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) return v;
        else if constexpr (std::is_same_v<T, double>) return format_double(v);
        else {
          char buf[32];
          const auto res = std::to_chars(buf, buf + sizeof buf, v);
          return std::string(buf, res.ptr);
        }
      },
      c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
        }
        return v;
      },
      c);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string to_csv(const ExperimentReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.columns.size(); ++i) out += (i ? "," : "") + report.columns[i];
  out += '\n';
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["config"] = to_json(report.config);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json o;
    for (std::size_t i = 0; i < row.size(); ++i) o[report.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  nlohmann::ordered_json s;
  for (const auto& [k, v] : report.summary) s[k] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
  for (const auto& [k, v] : report.notes) s[k] = v;
  nlohmann::ordered_json flags;
  flags["flagged"] = report.flagged;
  flags["rate"] = report.rows.empty() ? 0.0 : static_cast<double>(report.flagged) / report.rows.size();
  flags["degraded"] = report.degraded;
  nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.flag_reasons) reasons[k] = v;
  flags["reasons"] = std::move(reasons);
  s["flags"] = std::move(flags);
  if (report.wall_clock_seconds) s["wall_clock_seconds"] = *report.wall_clock_seconds;
  j["summary"] = std::move(s);
  j["version"] = kVersion;
  return j;
}

std::vector<std::filesystem::path> emit(const ExperimentReport& report, Format format, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const std::string stem = to_string(report.config.experiment);
  std::vector<std::filesystem::path> written;
  switch (format) {
    case Format::csv:
      written.push_back(dir / (stem + ".csv"));
      write_file(written.back(), to_csv(report));
      break;
    case Format::json:
      written.push_back(dir / (stem + ".json"));
      write_file(written.back(), to_json(report).dump(2) + "\n");
      break;
    case Format::plotdata:
      for (const auto& p : report.plots) {
        std::string text = "# " + p.x_label + "\t" + p.y_label + "\n";
        for (const auto& [x, y] : p.points) text += format_double(x) + "\t" + format_double(y) + "\n";
        written.push_back(dir / (stem + "_" + p.name + ".dat"));
        write_file(written.back(), text);
      }
      break;
  }
  return written;
}

}  // namespace rigidlab
