#include "svi/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "svi/errors.hpp"
#include "svi/solver_tyk.hpp"
#include "svi/solver_ws.hpp"

namespace svi {

namespace {

const std::map<std::string, std::vector<std::string>> kKnownKeys = {
    {"problem", {"name", "n", "halfspaces", "noise", "gen_seed", "hard_box", "m"}},
    {"solver", {"method"}},
    {"schedule",
     {"kind", "theta", "lambda", "beta", "alpha", "delta", "s_alpha", "s_eps", "C",
      "D", "betas"}},
    {"run", {"kmax", "seeds", "seed_base", "x0"}},
    {"output", {"path", "grid_per_decade"}},
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<Real> parse_real_list(const std::string& s) {
  std::vector<Real> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::string fmt17(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      if (!kKnownKeys.count(section))
        throw ConfigError("config: unknown section [" + section + "]");
      cfg.sections[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos || section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    const auto& known = kKnownKeys.at(section);
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
    if (cfg.sections[section].count(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    cfg.sections[section][key] = val;
  }
  if (!cfg.sections.count("problem") || !cfg.sections.count("solver") ||
      !cfg.sections.count("run"))
    throw ConfigError("config: sections [problem], [solver], [run] are required");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  for (const auto& [sec, kv] : sections) {
    os << "[" << sec << "]\n";
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
  }
  return os.str();
}

const std::string& ExperimentConfig::get(const std::string& section,
                                         const std::string& key) const {
  auto s = sections.find(section);
  if (s == sections.end()) throw ConfigError("config: missing section [" + section + "]");
  auto k = s->second.find(key);
  if (k == s->second.end())
    throw ConfigError("config: missing key '" + key + "' in [" + section + "]");
  return k->second;
}

std::string ExperimentConfig::get_or(const std::string& section, const std::string& key,
                                     const std::string& dflt) const {
  auto s = sections.find(section);
  if (s == sections.end()) return dflt;
  auto k = s->second.find(key);
  return k == s->second.end() ? dflt : k->second;
}

WsSchedule ws_schedule_from_config(const ExperimentConfig& cfg) {
  std::string kind = cfg.get_or("schedule", "kind", "robust");
  Real beta = std::stod(cfg.get_or("schedule", "beta", "1.0"));
  if (kind == "robust")
    return WsSchedule::robust(std::stod(cfg.get_or("schedule", "theta", "1.0")),
                              std::stod(cfg.get_or("schedule", "lambda", "2.0")), beta);
  if (kind == "constant")
    return WsSchedule::constant(std::stod(cfg.get_or("schedule", "alpha", "0.01")), beta);
  if (kind == "horizon")
    return WsSchedule::horizon(std::stod(cfg.get_or("schedule", "theta", "1.0")),
                               std::stoll(cfg.get("run", "kmax")), beta);
  throw ConfigError("config: unknown ws schedule kind '" + kind + "'");
}

TykSchedule tyk_schedule_from_config(const ExperimentConfig& cfg, int m) {
  std::string kind = cfg.get_or("schedule", "kind", "asynchronous");
  if (kind != "asynchronous")
    throw ConfigError("config: unknown tyk schedule kind '" + kind + "'");
  auto per_agent = [&](const std::string& key, Real dflt_first, Real stride) {
    std::vector<Real> v = parse_real_list(cfg.get_or("schedule", key, ""));
    if (v.empty())
      for (int j = 0; j < m; ++j) v.push_back(dflt_first + stride * j);
    if (static_cast<int>(v.size()) == 1 && m > 1) v.resize(static_cast<size_t>(m), v[0]);
    if (static_cast<int>(v.size()) != m)
      throw ConfigError("config: per-agent list '" + key + "' needs " +
                        std::to_string(m) + " entries");
    return v;
  };
  return TykSchedule::asynchronous(
      m, std::stod(cfg.get_or("schedule", "delta", "0.25")), per_agent("C", 1.0, 1.0),
      per_agent("D", 1.0, 2.0), per_agent("betas", 1.0, 0.0),
      std::stod(cfg.get_or("schedule", "s_alpha", "1.0")),
      std::stod(cfg.get_or("schedule", "s_eps", "1.0")));
}

int env_thread_count() {
  if (const char* env = std::getenv("SVI_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.entry = make_problem(cfg.get("problem", "name"), cfg.sections.at("problem"));
  res.solver = cfg.get("solver", "method");
  if (res.solver != "ws" && res.solver != "tyk")
    throw ConfigError("config: solver method must be ws or tyk");

  const std::int64_t kmax = std::stoll(cfg.get("run", "kmax"));
  const int n_seeds = static_cast<int>(std::stoll(cfg.get_or("run", "seeds", "1")));
  const std::uint64_t base =
      static_cast<std::uint64_t>(std::stoll(cfg.get_or("run", "seed_base", "1")));
  if (kmax < 0 || n_seeds < 1) throw ConfigError("config: kmax >= 0, seeds >= 1");

  BlockVector x0 = res.entry.x0;
  std::string x0s = cfg.get_or("run", "x0", "auto");
  if (x0s != "auto") {
    auto coords = parse_real_list(x0s);
    if (static_cast<Eigen::Index>(coords.size()) != res.entry.problem.layout.total_dim())
      throw ConfigError("config: x0 has wrong dimension");
    x0 = BlockVector::from_flat(res.entry.problem.layout,
                                Eigen::Map<const Vector>(coords.data(),
                                                         static_cast<Eigen::Index>(coords.size())));
  }

  ControlSequence control = ControlSequence::uniform(res.entry.spec);
  const int grid_pd =
      static_cast<int>(std::stoll(cfg.get_or("output", "grid_per_decade", "8")));
  auto grid = log_grid(kmax, grid_pd);

  std::optional<std::function<Real(const BlockVector&)>> gap_fn;
  if (res.entry.affine_A && res.entry.gap_domain) {
    const auto* entry = &res.entry;
    gap_fn = [entry](const BlockVector& x) { return entry->gap(x); };
  }

  struct Slot {
    std::optional<RunRecord> rec;
    std::string error;
  };
  std::vector<Slot> slots(static_cast<size_t>(n_seeds));

  WsSchedule ws_sched = res.solver == "ws" ? ws_schedule_from_config(cfg)
                                           : WsSchedule::robust(1, 2, 1);
  std::optional<TykSchedule> tyk_sched;
  if (res.solver == "tyk")
    tyk_sched = tyk_schedule_from_config(cfg, res.entry.problem.num_blocks());
  res.schedule_descriptor =
      res.solver == "ws" ? ws_sched.descriptor() : tyk_sched->descriptor();

  auto run_one = [&](int i) {
    std::uint64_t seed = base + static_cast<std::uint64_t>(i);
    try {
      if (res.solver == "ws") {
        WsRunOptions opts;
        opts.grid = grid;
        opts.gap = gap_fn;
        opts.record_points = true;
        slots[static_cast<size_t>(i)].rec = run_ws(
            res.entry.problem, res.entry.spec, ws_sched, control, kmax, seed, x0, opts);
      } else {
        TykRunOptions opts;
        opts.grid = grid;
        opts.gap = gap_fn;
        opts.record_points = true;
        slots[static_cast<size_t>(i)].rec =
            run_tyk(res.entry.problem, res.entry.spec, *tyk_sched, control, kmax, seed,
                    x0, opts);
      }
    } catch (const DivergenceError& e) {
      slots[static_cast<size_t>(i)].error =
          "seed " + std::to_string(seed) + ": " + e.what();
    }
  };

  const int workers = std::min(env_thread_count(), n_seeds);
  if (workers <= 1) {
    for (int i = 0; i < n_seeds; ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n_seeds; i = next.fetch_add(1)) run_one(i);
      });
    for (auto& t : pool) t.join();
  }

  for (auto& s : slots) {
    if (s.rec)
      res.records.push_back(std::move(*s.rec));
    else if (!res.divergence)
      res.divergence = s.error;
  }
  if (!res.records.empty()) res.ensemble = aggregate(res.records);
  return res;
}

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& res,
                              const std::filesystem::path& out_base) {
  namespace fs = std::filesystem;
  if (out_base.has_parent_path()) fs::create_directories(out_base.parent_path());

  if (res.ensemble) {
    std::ofstream f(out_base.string() + "_ensemble.csv", std::ios::binary);
    f << "k,metric,mean,stderr,n_seeds\n";
    const auto& e = *res.ensemble;
    for (const auto& [metric, means] : e.mean) {
      const auto& ses = e.stderr_.at(metric);
      for (size_t i = 0; i < e.grid.size(); ++i)
        f << e.grid[i] << "," << metric << "," << fmt17(means[i]) << ","
          << fmt17(ses[i]) << "," << e.n_seeds << "\n";
    }
  }
  {
    std::ofstream f(out_base.string() + "_seeds.csv", std::ios::binary);
    f << "seed,k,metric,value\n";
    for (const auto& r : res.records)
      for (const auto& [metric, vals] : r.series)
        for (size_t i = 0; i < r.grid.size(); ++i)
          f << r.seed << "," << r.grid[i] << "," << metric << "," << fmt17(vals[i])
            << "\n";
  }

  nlohmann::json j;
  j["config"] = nlohmann::json::object();
  for (const auto& [sec, kv] : cfg.sections) j["config"][sec] = kv;
  j["solver"] = res.solver;
  j["schedule"] = res.schedule_descriptor;
  j["n_seeds_completed"] = res.records.size();
  if (res.divergence) j["divergence"] = *res.divergence;
  auto& constants = j["constants"];
  const auto& entry = res.entry;
  constants["L"] = entry.L;
  constants["C_g"] = entry.C_g;
  if (entry.rho) constants["rho"] = *entry.rho;
  if (entry.eta) constants["eta"] = *entry.eta;
  if (entry.c_reg) constants["c"] = *entry.c_reg;
  if (entry.C_F) constants["C_F"] = *entry.C_F;
  if (res.solver == "ws") {
    WsSchedule s = ws_schedule_from_config(cfg);
    if (s.kind() == WsSchedule::Kind::Robust)
      constants["k0"] = compute_k0(1.5, s.theta(), entry.L, s.beta(0), 0.5, s.lambda());
    ControlSequence control = ControlSequence::uniform(entry.spec);
    WsValidationInputs vin;
    vin.eta = entry.eta;
    auto rep = validate_ws_assumptions(entry.problem, entry.spec, s, control, vin);
    auto& v = j["schedule_verdicts"];
    for (const auto& sv : rep.series)
      v[sv.name] = {{"partial_sum", sv.partial_sum}, {"converges", sv.converges}};
    v["asymptotics_applicable"] = rep.asymptotics_applicable;
    j["warnings"] = rep.warnings;
  } else {
    TykSchedule s = tyk_schedule_from_config(cfg, entry.problem.num_blocks());
    auto rep = validate_tyk_assumptions(s, 100000);
    auto& v = j["schedule_verdicts"];
    for (const auto& it : rep.items)
      v[it.name] = {{"value", it.value_at_horizon}, {"pass", it.pass}};
    v["eps_ratio_limsup"] = rep.eps_ratio_limsup;
    v["all_pass"] = rep.all_pass;
  }
  std::ofstream jf(out_base.string() + "_config.json", std::ios::binary);
  jf << j.dump(2) << "\n";

  // Saved ergodic-average points, input to the offline gap oracle.
  {
    std::ofstream f(out_base.string() + "_points.csv", std::ios::binary);
    f << "seed,k";
    for (Eigen::Index i = 0; i < entry.problem.layout.total_dim(); ++i) f << ",x" << i;
    f << "\n";
    for (const auto& r : res.records)
      for (const auto& [k, pt] : r.points) {
        f << r.seed << "," << k;
        for (Eigen::Index i = 0; i < pt.size(); ++i) f << "," << fmt17(pt[i]);
        f << "\n";
      }
  }
}

}  // namespace svi
