#include "svi/schedule.hpp"

#include <cmath>
#include <sstream>

#include "svi/errors.hpp"

namespace svi {

static void check_beta(Real b) {
  if (!(b > 0 && b < 2)) throw ConfigError("schedule: beta must lie in (0,2)");
}

WsSchedule WsSchedule::robust(Real theta, Real lambda, Real beta) {
  if (!(theta > 0)) throw ConfigError("robust schedule: theta > 0");
  if (!(lambda > 0)) throw ConfigError("robust schedule: lambda > 0");
  check_beta(beta);
  WsSchedule s(Kind::Robust);
  s.theta_ = theta;
  s.lambda_ = lambda;
  s.beta_ = beta;
  return s;
}

WsSchedule WsSchedule::constant(Real alpha, Real beta) {
  if (!(alpha > 0)) throw ConfigError("constant schedule: alpha > 0");
  check_beta(beta);
  WsSchedule s(Kind::Constant);
  s.const_alpha_ = alpha;
  s.theta_ = alpha;
  s.beta_ = beta;
  return s;
}

WsSchedule WsSchedule::horizon(Real theta, std::int64_t k_max, Real beta) {
  if (!(theta > 0) || k_max < 1) throw ConfigError("horizon schedule: theta > 0, K >= 1");
  check_beta(beta);
  WsSchedule s(Kind::Horizon);
  s.theta_ = theta;
  s.horizon_k_ = k_max;
  s.beta_ = beta;
  return s;
}

WsSchedule WsSchedule::custom(std::vector<Real> alphas, Real beta) {
  if (alphas.empty()) throw ConfigError("custom schedule: empty");
  for (Real a : alphas)
    if (!(a > 0)) throw ConfigError("custom schedule: alpha_k > 0");
  check_beta(beta);
  WsSchedule s(Kind::Custom);
  s.custom_ = std::move(alphas);
  s.beta_ = beta;
  return s;
}

Real WsSchedule::alpha(std::int64_t k) const {
  switch (kind_) {
    case Kind::Robust:
      if (k < 2) return theta_;
      return theta_ / std::sqrt(static_cast<Real>(k) *
                                std::pow(std::log(static_cast<Real>(k)), 1 + lambda_));
    case Kind::Constant:
      return const_alpha_;
    case Kind::Horizon:
      return theta_ / std::sqrt(static_cast<Real>(horizon_k_) + 1);
    case Kind::Custom: {
      size_t i = static_cast<size_t>(k);
      if (i >= custom_.size()) i = custom_.size() - 1;
      return custom_[i];
    }
  }
  throw UsageError("WsSchedule::alpha: unknown kind");
}

std::string WsSchedule::descriptor() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Robust:
      os << "ws-robust(theta=" << theta_ << ",lambda=" << lambda_ << ",beta=" << beta_ << ")";
      break;
    case Kind::Constant:
      os << "ws-constant(alpha=" << const_alpha_ << ",beta=" << beta_ << ")";
      break;
    case Kind::Horizon:
      os << "ws-horizon(theta=" << theta_ << ",K=" << horizon_k_ << ",beta=" << beta_ << ")";
      break;
    case Kind::Custom:
      os << "ws-custom(len=" << custom_.size() << ",beta=" << beta_ << ")";
      break;
  }
  return os.str();
}

WsSchedule::Sums WsSchedule::sums_to(std::int64_t k) const {
  Sums s;
  for (std::int64_t i = 0; i <= k; ++i) {
    Real a = alpha(i);
    Real Bi = B(i);
    s.S += a;
    s.Z += Bi;
    s.a += a * a;
    s.b += a * a / Bi;
  }
  return s;
}

TykSchedule TykSchedule::asynchronous(int m, Real delta, std::vector<Real> C,
                                      std::vector<Real> D, std::vector<Real> beta,
                                      Real s_alpha, Real s_eps) {
  if (m < 1) throw ConfigError("tyk schedule: m >= 1");
  if (!(delta > 0 && delta < 0.5)) throw ConfigError("tyk schedule: delta in (0, 1/2)");
  if (static_cast<int>(C.size()) != m || static_cast<int>(D.size()) != m ||
      static_cast<int>(beta.size()) != m)
    throw ConfigError("tyk schedule: C, D, beta must have one entry per agent");
  for (Real b : beta) check_beta(b);
  for (Real c : C)
    if (!(c > 0)) throw ConfigError("tyk schedule: C_j > 0");
  for (Real d : D)
    if (!(d > 0)) throw ConfigError("tyk schedule: D_j > 0");
  if (!(s_alpha > 0) || !(s_eps > 0)) throw ConfigError("tyk schedule: scales > 0");
  TykSchedule s(Kind::Asynchronous, m);
  s.delta_ = delta;
  s.C_ = std::move(C);
  s.D_ = std::move(D);
  s.betas_ = std::move(beta);
  s.s_alpha_ = s_alpha;
  s.s_eps_ = s_eps;
  std::ostringstream os;
  os << "tyk-async(m=" << m << ",delta=" << delta << ",s_alpha=" << s_alpha
     << ",s_eps=" << s_eps << ")";
  s.descriptor_ = os.str();
  return s;
}

TykSchedule TykSchedule::custom(int m, std::function<Real(std::int64_t, int)> alpha,
                                std::function<Real(std::int64_t, int)> beta,
                                std::function<Real(std::int64_t, int)> eps,
                                std::string descriptor) {
  if (m < 1) throw ConfigError("tyk schedule: m >= 1");
  TykSchedule s(Kind::Custom, m);
  s.alpha_fn_ = std::move(alpha);
  s.beta_fn_ = std::move(beta);
  s.eps_fn_ = std::move(eps);
  s.descriptor_ = std::move(descriptor);
  return s;
}

Real TykSchedule::alpha(std::int64_t k, int j) const {
  if (kind_ == Kind::Asynchronous)
    return s_alpha_ /
           std::pow(static_cast<Real>(k) + C_[static_cast<size_t>(j)], 0.5 + delta_);
  return alpha_fn_(k, j);
}

Real TykSchedule::beta(std::int64_t k, int j) const {
  if (kind_ == Kind::Asynchronous) return betas_[static_cast<size_t>(j)];
  return beta_fn_(k, j);
}

Real TykSchedule::eps(std::int64_t k, int j) const {
  if (k < 0) k = 0;  // formal eps_{-1,j} := eps_{0,j}
  if (kind_ == Kind::Asynchronous)
    return s_eps_ /
           std::pow(static_cast<Real>(k) + D_[static_cast<size_t>(j)], 0.5 - delta_);
  return eps_fn_(k, j);
}

#define SVI_AGENT_FOLD(expr, combine, init)          \
  Real acc = (init);                                 \
  for (int j = 0; j < m_; ++j) acc = combine(acc, (expr)); \
  return acc

Real TykSchedule::alpha_min(std::int64_t k) const {
  SVI_AGENT_FOLD(alpha(k, j), std::min<Real>, alpha(k, 0));
}
Real TykSchedule::alpha_max(std::int64_t k) const {
  SVI_AGENT_FOLD(alpha(k, j), std::max<Real>, alpha(k, 0));
}
Real TykSchedule::eps_min(std::int64_t k) const {
  SVI_AGENT_FOLD(eps(k, j), std::min<Real>, eps(k, 0));
}
Real TykSchedule::eps_max(std::int64_t k) const {
  SVI_AGENT_FOLD(eps(k, j), std::max<Real>, eps(k, 0));
}
Real TykSchedule::beta_min(std::int64_t k) const {
  SVI_AGENT_FOLD(beta(k, j), std::min<Real>, beta(k, 0));
}
Real TykSchedule::beta_max(std::int64_t k) const {
  SVI_AGENT_FOLD(beta(k, j), std::max<Real>, beta(k, 0));
}

#undef SVI_AGENT_FOLD

namespace {

// Dyadic ratio test on tail blocks: sums S(h..2h), S(2h..4h): convergent
// when the block sums decay geometrically.
bool numeric_series_converges(const std::function<Real(std::int64_t)>& term,
                              std::int64_t horizon, Real* partial) {
  Real total = 0;
  std::int64_t h1 = horizon / 4, h2 = horizon / 2;
  Real block1 = 0, block2 = 0;
  for (std::int64_t k = 0; k <= horizon; ++k) {
    Real t = term(k);
    total += t;
    if (k > h1 && k <= h2) block1 += t;
    if (k > h2) block2 += t;
  }
  *partial = total;
  if (block1 <= 0) return true;
  return block2 / block1 < 0.9;
}

bool numeric_limit_zero(const std::function<Real(std::int64_t)>& term,
                        std::int64_t horizon, Real* last) {
  Real lo = std::abs(term(horizon));
  Real mid = std::abs(term(horizon / 2));
  *last = lo;
  return lo < mid && lo < 0.5 * mid + 1e-12;
}

}  // namespace

TykValidationReport validate_tyk_assumptions(const TykSchedule& s, std::int64_t horizon) {
  if (horizon < 1000) throw UsageError("validate_tyk_assumptions: horizon >= 1e3");
  TykValidationReport rep;
  const bool analytic = s.kind() == TykSchedule::Kind::Asynchronous;

  auto ame = [&](std::int64_t k) { return s.alpha_min(k) * s.eps_min(k); };

  auto add_limit = [&](const std::string& name, std::function<Real(std::int64_t)> f) {
    TykValidationItem it;
    it.name = name;
    bool ok = numeric_limit_zero(f, horizon, &it.value_at_horizon);
    it.pass = analytic ? true : ok;
    it.note = analytic ? "analytic (asynchronous kind)" : (ok ? "trend to 0" : "no decay");
    if (analytic && !ok) it.note += "; numeric trend inconclusive at horizon";
    rep.items.push_back(it);
  };
  auto add_series = [&](const std::string& name, std::function<Real(std::int64_t)> f,
                        bool convergent_expected) {
    TykValidationItem it;
    it.name = name;
    bool ok = numeric_series_converges(f, horizon, &it.value_at_horizon);
    it.pass = analytic ? true : (ok == convergent_expected);
    it.note = ok ? "dyadic tail decays" : "dyadic tail does not decay";
    if (!convergent_expected) it.pass = !ok || analytic;
    rep.items.push_back(it);
  };

  // (i) eps decreasing to zero, per agent.
  {
    TykValidationItem it;
    it.name = "eps_j decreasing to 0";
    bool ok = true;
    for (int j = 0; j < s.num_agents(); ++j) {
      Real prev = s.eps(-1, j);
      for (std::int64_t k = 0; k <= horizon; k = (k < 64 ? k + 1 : k + k / 8)) {
        Real e = s.eps(k, j);
        if (e > prev + 1e-15 || !(e > 0)) ok = false;
        prev = e;
      }
      if (s.eps(horizon, j) > 0.9 * s.eps(0, j)) ok = false;
    }
    it.pass = ok;
    it.value_at_horizon = s.eps_max(horizon);
    rep.items.push_back(it);
  }

  // (ii) four vanishing limits.
  add_limit("alpha_max^2/(alpha_min eps_min) -> 0",
            [&](std::int64_t k) { return s.alpha_max(k) * s.alpha_max(k) / ame(k); });
  add_limit("alpha_max^2/(B_k alpha_min eps_min) -> 0", [&](std::int64_t k) {
    return s.alpha_max(k) * s.alpha_max(k) / (s.B(k) * ame(k));
  });
  add_limit("Delta_k/(alpha_min eps_min) -> 0",
            [&](std::int64_t k) { return s.Delta(k) / ame(k); });
  add_limit("alpha_min eps_min -> 0", ame);

  // (iii) divergent series.
  add_series("sum alpha_min eps_min = inf", ame, /*convergent_expected=*/false);

  // (iv) convergent series.
  add_series("sum alpha_max^2 < inf",
             [&](std::int64_t k) { return s.alpha_max(k) * s.alpha_max(k); }, true);
  add_series("sum alpha_max^2/B_k < inf",
             [&](std::int64_t k) { return s.alpha_max(k) * s.alpha_max(k) / s.B(k); },
             true);
  add_series("sum (Gamma_k/eps_min)^2 (1 + 1/(alpha_min eps_min)) < inf",
             [&](std::int64_t k) {
               Real r = s.Gamma(k) / s.eps_min(k);
               return r * r * (1 + 1 / ame(k));
             },
             true);
  add_series("sum Delta_k^2/(alpha_min eps_min) < inf",
             [&](std::int64_t k) { return s.Delta(k) * s.Delta(k) / ame(k); }, true);

  // (v) vanishing Gamma limit.
  add_limit("Gamma_k^2/(eps_min^3 alpha_min) (1 + 1/(alpha_min eps_min)) -> 0",
            [&](std::int64_t k) {
              Real g = s.Gamma(k);
              Real e = s.eps_min(k);
              return g * g / (e * e * e * s.alpha_min(k)) * (1 + 1 / ame(k));
            });

  // limsup eps_max/eps_min classification.
  Real sup_tail = 0;
  for (std::int64_t k = horizon / 2; k <= horizon; k += std::max<std::int64_t>(1, horizon / 256))
    sup_tail = std::max(sup_tail, s.eps_max(k) / s.eps_min(k));
  rep.eps_ratio_limsup = sup_tail;
  rep.eps_ratio_finite = std::isfinite(sup_tail);
  // Decreasing ratio trend => limit is 1 for the asynchronous kind.
  Real r_mid = s.eps_max(horizon / 2) / s.eps_min(horizon / 2);
  Real r_end = s.eps_max(horizon) / s.eps_min(horizon);
  rep.eps_ratio_le_one = r_end <= 1.0 + 1e-12 || (r_end < r_mid && r_end < 1.05);

  rep.all_pass = true;
  for (const auto& it : rep.items) rep.all_pass = rep.all_pass && it.pass;
  return rep;
}

}  // namespace svi
