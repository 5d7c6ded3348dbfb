#include "osp/solve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "osp/exp_poly.hpp"
#include "osp/generator.hpp"
#include "osp/numerics.hpp"

namespace osp {

namespace {

constexpr double kKinkScan = 1e3;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::pair<double, double> state_interval(const ProcessModel& p) {
  if (const auto* d = std::get_if<LinearDiffusion>(&p)) return {d->left, d->right};
  return {-kInf, kInf};
}

ConditionCheck bound_check(const std::string& name, double value, double tol, const std::string& what) {
  return {name, value <= tol, value, what + " <= " + fmt(tol)};
}

double exp_poly_distance(const ExpPoly& a, const ExpPoly& b) {
  double d = 0.0;
  for (const auto& t : a.terms())
    d = std::max(d, std::abs(t.coeff - b.coefficient(t.power, t.rate)) / std::max(1.0, std::abs(t.coeff)));
  for (const auto& t : b.terms())
    d = std::max(d, std::abs(t.coeff - a.coefficient(t.power, t.rate)) / std::max(1.0, std::abs(t.coeff)));
  return d;
}

Solution solve_chain(const Problem& p) {
  const auto& c = std::get<FiniteCTMC>(p.process);
  const auto& G = p.chain_reward;
  Solution out;
  out.problem = p;
  out.problem.side = SideChoice::two_sided;
  out.chain_ftilde = apply_generator_ctmc(c, G, p.beta).values;

  ChainOptions co;
  co.damping = p.options.damping;
  co.max_iterations = p.options.max_iterations;
  co.residual_tol = p.options.residual_tol;
  auto cs = invert_representation(c, G, p.beta, co);
  std::vector<int> order(static_cast<std::size_t>(c.n_states()));
  for (int i = 0; i < c.n_states(); ++i) order[i] = i;
  auto tr = check_two_sided(cs, G, order);
  out.chain_value = value_ctmc(cs, c, p.beta);

  out.conditions = tr.conditions;
  out.conditions.checks.push_back(
      bound_check("representation_residual", cs.residual, 1e-10, "sup |U(f_hat) - G|"));
  ConditionCheck maj{"majorant", true, 0.0, "(G - V) / max(1, |G|) <= 1e-12 in every state"};
  for (int i = 0; i < c.n_states(); ++i) {
    const double short_by = (G[i] - out.chain_value[i]) / std::max(1.0, std::abs(G[i]));
    maj.worst = std::max(maj.worst, short_by);
    if (short_by > 1e-12) maj.passed = false;
  }
  out.conditions.checks.push_back(maj);

  std::string region;
  for (int i : cs.stopping_region) region += (region.empty() ? "" : ",") + c.labels[i];
  out.headline = tr.stop_everywhere ? "immediate stopping: reward is β-excessive"
                                    : "stop on the state set {" + region + "}";
  if (cs.polished) out.notes.push_back("representation finished by an exact solve on the final level order");
  out.chain = std::move(cs);
  out.two_sided = std::move(tr);
  return out;
}

Solution solve_continuous(const Problem& p) {
  Solution out;
  out.problem = p;
  const Side side = p.side == SideChoice::right  ? Side::right
                    : p.side == SideChoice::left ? Side::left
                                                 : detect_side(p);
  out.problem.side = side == Side::right ? SideChoice::right : SideChoice::left;
  const bool mirrored = side == Side::left;
  const Problem w = mirrored ? mirror_left(out.problem) : out.problem;
  const auto& o = w.options;
  const double beta = w.beta;

  auto setup = std::make_shared<ContinuousSetup>();
  setup->process = w.process;
  setup->reward = w.reward;
  setup->beta = beta;
  setup->rel_tol = o.quad_rel_tol;
  setup->tail_rel = o.tail_rel;

  const auto [left, right] = state_interval(w.process);
  const auto g_kinks = w.reward.kinks(std::max(left, -kKinkScan), std::min(right, kKinkScan));

  double scale = 1.0;
  if (const auto* d = std::get_if<LinearDiffusion>(&w.process)) {
    double xref = g_kinks.empty() ? 0.0 : g_kinks.front();
    if (!(xref > left && xref < right)) xref = std::isfinite(left) ? left + 1.0 : right - 1.0;
    scale = d->local_scale(beta, xref);
  } else {
    const auto roots = std::get<LevyModel>(w.process).cramer_lundberg_roots(beta);
    double r = kInf;
    for (double v : roots) r = std::min(r, std::abs(v));
    scale = 1.0 / r;
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::runtime_error("solve: degenerate local scale");

  bool anchored = true;
  double lo;
  if (o.search_lo) lo = *o.search_lo;
  else if (std::isfinite(left)) lo = left;
  else if (!g_kinks.empty()) lo = g_kinks.front();
  else {
    lo = -o.search_scales * scale;
    anchored = false;
  }
  double hi = o.search_hi ? *o.search_hi : (anchored ? lo + o.search_scales * scale : o.search_scales * scale);
  const ThresholdSearch search{lo, hi, o.grid_points, o.threshold_tol};

  ThresholdSolution sol;
  std::vector<ConditionCheck> extra;
  if (const auto* d = std::get_if<LinearDiffusion>(&w.process)) {
    setup->ftilde = apply_generator_diffusion(*d, w.reward, beta);
    PairOptions po;
    po.lo = lo - 40.0 * scale;
    po.hi = hi + 40.0 * scale;
    po.step_fraction = o.step_fraction;
    auto fp = std::make_shared<const FundamentalPair>(fundamental_pair(*d, beta, po));
    QOptions qo;
    qo.lo = lo;
    qo.hi = hi + 30.0 * scale;
    qo.rel_tol = o.quad_rel_tol;
    qo.tail_rel = o.tail_rel;
    auto dq = std::make_shared<const DiffusionQ>(fp, setup->ftilde, beta, qo);
    sol = find_threshold([dq](double z) { return (*dq)(z); }, search);
    sol.tail_bound = dq->tail_bound();
    setup->pair = fp;
    setup->left_limit = dq->lower_limit();
    setup->right_limit = dq->upper_limit();
    setup->kinks = setup->ftilde.expr.kinks(dq->lower_limit(), dq->upper_limit());
    extra.push_back(bound_check("wronskian", fp->wronskian_spread(), o.condition_tol, "relative spread of the Wronskian"));
    extra.push_back(bound_check("normalization", dq->normalization_error(), o.condition_tol,
                                "|int psi m / (psi'/(beta s')) - 1|"));
    extra.push_back(bound_check("left_tail", dq->tail_bound(), 1e-10, "relative bound on the truncated left tail"));
  } else {
    const auto& l = std::get<LevyModel>(w.process);
    setup->ftilde = apply_generator_levy(l, w.reward, beta);
    const auto g = to_exp_poly(w.reward, true);
    if (!g) throw std::invalid_argument("solve: reward outside the exponential-polynomial class");
    const auto [mlaw, ilaw] = wh_factor_laws(l, beta);
    setup->max_law = mlaw;
    setup->min_law = ilaw;
    const ExpPoly q = q_levy_from_reward(l, *g, beta);
    sol = find_threshold([q](double z) { return q(z); }, search);
    sol.q_closed = q;
    if (resolvent_route_applicable(l, *g, beta)) {
      extra.push_back(bound_check("q_routes", exp_poly_distance(q, q_levy(l, setup->ftilde, beta)), 1e-10,
                                  "Q from E f~(z + I_T)/beta against Q from E Q(z + M_T) = G"));
    } else {
      out.notes.push_back("G has an exponential term with psi(a) >= beta; Q is taken from E Q(z + M_T) = G only");
    }
    const double target = l.mean() / beta;
    extra.push_back(bound_check("wh_mean", std::abs(mlaw.mean() + ilaw.mean() - target) / std::max(1.0, std::abs(target)),
                                1e-10, "|E M_T + E I_T - E X_1 / beta|"));
  }
  if (setup->ftilde.smooth_extension)
    out.notes.push_back("pos() replaced by its argument to apply the generator; valid on the stopping region only");
  sol.scale = scale;
  setup->scale = scale;

  ConditionOptions co;
  co.probe_points = o.probe_points;
  co.probe_scales = o.probe_scales;
  co.tol = o.condition_tol;
  co.domain_left = setup->domain_left();
  const auto& s = *setup;
  sol.conditions = validate_theorem_conditions(
      sol, [&s](double x) { return s.reward(x); }, [&s, &sol](double x) { return value_max_law(s, sol, x); }, co);

  out.conditions = sol.conditions;
  for (auto& c : extra) out.conditions.checks.push_back(std::move(c));
  {
    const auto rm = representing_measure(s, sol);
    out.conditions.checks.push_back({"measure_nonnegative", rm.nonnegative, std::max(0.0, -rm.min_density),
                                     "f~ >= 0 right of x* and atom at x* >= 0"});
  }

  auto vf = std::make_shared<const ValueFunction>(setup, sol, mirrored);
  const double xs = mirrored ? -sol.x_star : sol.x_star;
  const auto [oleft, oright] = state_interval(p.process);
  std::vector<double> grid;
  for (double x : linspace(xs - o.value_scales * scale, xs + o.value_scales * scale,
                           static_cast<std::size_t>(o.value_points)))
    if (x >= oleft && x <= oright) grid.push_back(x);
  out.value_grid = vf->table(grid);

  ConditionCheck routes{"route_agreement", true, 0.0, "max relative spread between value routes"};
  ConditionCheck maj{"majorant", true, 0.0, "(G - V) / max(1, |G|) <= " + fmt(o.route_tol) + " on the value grid"};
  for (const auto& r : out.value_grid) {
    out.max_route_spread = std::max(out.max_route_spread, r.spread);
    const double short_by = (r.reward - r.max_law) / std::max(1.0, std::abs(r.reward));
    maj.worst = std::max(maj.worst, short_by);
    if (short_by > o.route_tol) maj.passed = false;
  }
  routes.worst = out.max_route_spread;
  routes.passed = out.max_route_spread <= o.route_tol;
  routes.detail += " <= " + fmt(o.route_tol);
  out.conditions.checks.push_back(routes);
  out.conditions.checks.push_back(maj);

  out.value = vf;
  out.threshold = mirrored ? mirror_solution(sol) : sol;
  if (sol.immediate_stop) out.headline = "immediate stopping: reward is β-excessive";
  else
    out.headline = std::string("stop when X ") + (mirrored ? "<= " : ">= ") + "x* = " + fmt(out.threshold->x_star);
  return out;
}

}  // namespace

double Solution::reward(double x) const {
  if (is_chain()) return problem.chain_reward.at(static_cast<std::size_t>(std::lround(x)));
  return problem.reward(x);
}

double Solution::value_at(double x) const {
  if (is_chain()) return chain_value.at(static_cast<std::size_t>(std::lround(x)));
  return value->fast(x);
}

double Solution::scale() const { return threshold ? threshold->scale : 1.0; }

double Solution::domain_left() const {
  if (is_chain()) return 0.0;
  return state_interval(problem.process).first;
}

double Solution::domain_right() const {
  if (is_chain()) return static_cast<double>(std::get<FiniteCTMC>(problem.process).n_states() - 1);
  return state_interval(problem.process).second;
}

Side detect_side(const Problem& p) {
  if (p.is_chain()) throw std::invalid_argument("detect_side: chains use two-sided rules");
  const auto [left, right] = state_interval(p.process);
  const double a = std::isfinite(left) ? left : -10.0;
  const double b = std::isfinite(right) ? right : 10.0;
  bool up = true, down = true;
  double prev = p.reward(a);
  for (double x : linspace(a, b, 401)) {
    const double g = p.reward(x);
    const double tol = 1e-12 * std::max(1.0, std::abs(g));
    if (g < prev - tol) up = false;
    if (g > prev + tol) down = false;
    prev = g;
  }
  if (up) return Side::right;
  if (down) return Side::left;
  throw std::invalid_argument("cannot infer the side: G is not monotone on [" + fmt(a) + ", " + fmt(b) +
                              "]; set problem.side");
}

Solution solve(const Problem& p) {
  p.validate();
  if (p.is_chain()) return solve_chain(p);
  return solve_continuous(p);
}

}  // namespace osp
