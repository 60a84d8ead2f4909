#include "compact_markov/run.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "compact_markov/bounds.hpp"
#include "compact_markov/chain_spec.hpp"
#include "compact_markov/classify.hpp"
#include "compact_markov/errors.hpp"
#include "compact_markov/montecarlo.hpp"
#include "compact_markov/passage.hpp"
#include "compact_markov/tightness.hpp"

namespace compact_markov {

using nlohmann::json;

json to_json(const RunConfig& c) {
  json doc{{"subcommand", c.subcommand}, {"chain", c.chain},     {"state", c.state},   {"order", c.order},
           {"budget", c.budget},         {"seed", c.seed},       {"nmax", c.nmax},     {"z", c.z},
           {"trials", c.trials},         {"steps", c.steps},     {"cap", c.cap},       {"set", c.set},
           {"max_states", c.max_states}};
  doc["target"] = c.target ? json(*c.target) : json(nullptr);
  doc["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
  return doc;
}

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config", "must be a JSON object");
  RunConfig c;
  try {
    c.subcommand = doc.at("subcommand").get<std::string>();
    c.chain = doc.at("chain");
    c.state = doc.value("state", c.state);
    c.order = doc.value("order", c.order);
    c.budget = doc.value("budget", c.budget);
    c.seed = doc.value("seed", c.seed);
    c.nmax = doc.value("nmax", c.nmax);
    c.z = doc.value("z", c.z);
    c.trials = doc.value("trials", c.trials);
    c.steps = doc.value("steps", c.steps);
    c.cap = doc.value("cap", c.cap);
    c.set = doc.value("set", c.set);
    c.max_states = doc.value("max_states", c.max_states);
    if (doc.contains("target") && !doc.at("target").is_null()) c.target = doc.at("target").get<std::size_t>();
    if (doc.contains("epsilon") && !doc.at("epsilon").is_null()) c.epsilon = doc.at("epsilon").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError("config", e.what());
  }
  return c;
}

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::vector<StateId> to_states(const std::vector<std::size_t>& indices) {
  std::vector<StateId> out;
  for (std::size_t i : indices) out.push_back(StateId{i});
  return out;
}

json states_json(std::span<const StateId> states) {
  json out = json::array();
  for (StateId s : states) out.push_back(s.index);
  return out;
}

json check_json(const BoundCheck& c) {
  return {{"name", c.name}, {"lhs", c.lhs}, {"relation", c.relation}, {"rhs", c.rhs}, {"status", to_string(c.status)}};
}

json certificate_json(const TightnessCertificate& cert) {
  return {{"set", states_json(cert.set)},
          {"epsilon", cert.epsilon},
          {"achieved_tail", cert.achieved_tail},
          {"exhaustive", cert.exhaustive},
          {"states_explored", cert.states_explored}};
}

json abelian_json(const AbelianEstimate& a) {
  json samples = json::array();
  for (const auto& [z, g] : a.samples) samples.push_back({z, g});
  return {{"value", a.value}, {"infinite", a.infinite}, {"converged", a.converged}, {"samples", samples}};
}

json compactness_json(const CompactnessReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"epsilon", e.epsilon},
                       {"certified", e.certificate.has_value()},
                       {"certificate", e.certificate ? certificate_json(*e.certificate) : json(nullptr)},
                       {"refuted", e.refuted},
                       {"fallback_whole_space", e.fallback},
                       {"best_tail", e.best_tail}});
  }
  return {{"status", to_string(r.status)},
          {"summary", r.summary},
          {"satisfied_down_to", r.satisfied_down_to ? json(*r.satisfied_down_to) : json(nullptr)},
          {"refuted_at", r.refuted_at ? json(*r.refuted_at) : json(nullptr)},
          {"entries", entries}};
}

TruncationPolicy policy_of(const RunConfig& c) {
  TruncationPolicy policy;
  policy.max_states = c.max_states;
  policy.validate();
  return policy;
}

void require_state(const Kernel& k, std::size_t index, const char* field) {
  if (!k.contains(StateId{index})) throw ValidationError(field, "state " + std::to_string(index) + " is not in the chain");
}

void require_epsilon(const std::optional<double>& eps) {
  if (!eps) throw ValidationError("epsilon", "required for this subcommand");
  if (!(*eps > 0.0 && *eps < 1.0)) throw ValidationError("epsilon", "must lie in (0, 1)");
}

std::vector<StateId> require_set(const Kernel& k, const RunConfig& c) {
  if (c.set.empty()) throw ValidationError("set", "required for this subcommand");
  for (std::size_t i : c.set) require_state(k, i, "set");
  return to_states(c.set);
}

void run_classify(const Kernel& k, const RunConfig& c, RunResult& r) {
  require_state(k, c.state, "state");
  if (c.order < 1) throw ValidationError("order", "must be at least 1");
  const auto report = classify(k, StateId{c.state}, c.order, policy_of(c));
  r.report["state"] = c.state;
  r.report["verdict"] = to_string(report.verdict);
  r.report["F1_estimate"] = report.f1_estimate;
  r.report["F1_upper"] = report.f1_upper;
  r.report["tau_estimate"] = report.tau_estimate;
  r.report["tau_infinite"] = report.tau_infinite;
  r.report["tau_converged"] = report.tau_converged;
  r.report["tau_partial_sum"] = report.tau_partial_sum;
  r.report["abelian_tau"] = abelian_json(report.abelian_tau);
  r.report["order_used"] = report.order_used;
  r.report["notes"] = report.notes;
  std::ostringstream s;
  s << "state " << c.state << ": " << to_string(report.verdict) << "\n  F(x,x|1) >= " << report.f1_estimate
    << "\n  mean return time " << (report.tau_infinite ? std::string("infinite") : fmt(report.tau_estimate))
    << (report.tau_converged ? " (converged)" : "") << "\n  " << report.notes << "\n";
  r.summary = s.str();
}

std::string tail_rows_csv(const std::vector<TailCheckRow>& rows) {
  std::ostringstream csv;
  csv << "n,tail,pass\n";
  for (const auto& row : rows) csv << row.n << ',' << fmt(row.value) << ',' << (row.pass ? 1 : 0) << '\n';
  return csv.str();
}

json tail_rows_json(const std::vector<TailCheckRow>& rows) {
  json out = json::array();
  for (const auto& row : rows) out.push_back({{"n", row.n}, {"tail", row.value}, {"pass", row.pass}});
  return out;
}

void run_tightness(const Kernel& k, const RunConfig& c, RunResult& r) {
  std::ostringstream s;
  const TruncationPolicy policy = policy_of(c);
  if (c.epsilon && !(*c.epsilon > 0.0 && *c.epsilon < 1.0)) throw ValidationError("epsilon", "must lie in (0, 1)");
  std::optional<TightnessCertificate> cert;
  if (!c.set.empty()) {
    const auto set = require_set(k, c);
    const TailSup tail = tail_sup(k, set, c.budget);
    r.report["set"] = states_json(set);
    r.report["tail_sup"] = {{"value", tail.value}, {"exhaustive", tail.exhaustive}, {"states_examined", tail.states_examined}};
    s << "tail sup of A: " << tail.value << (tail.exhaustive ? " (certified)" : " (explored states only)") << "\n";
    if (c.epsilon) {
      const bool certified = tail.exhaustive && tail.value < *c.epsilon;
      r.report["certified"] = certified;
      if (certified) cert = certify(k, set, *c.epsilon, c.budget);
      s << "tightness at epsilon=" << *c.epsilon << ": " << (certified ? "certified" : "not certified") << "\n";
    }
  } else if (c.epsilon) {
    const TightSetSearch search = find_tight_set(k, *c.epsilon, c.budget);
    r.report["search"] = {{"found", search.certificate.has_value()},
                          {"certificate", search.certificate ? certificate_json(*search.certificate) : json(nullptr)},
                          {"structurally_refuted", search.structurally_refuted},
                          {"best_tail", search.best_tail},
                          {"states_explored", search.states_explored},
                          {"diagnostics", search.diagnostics}};
    cert = search.certificate;
    s << "search at epsilon=" << *c.epsilon << ": "
      << (cert ? "found A of size " + std::to_string(cert->set.size()) : "not found (" + search.diagnostics + ")") << "\n";
  }
  if (cert) {
    const auto rows = n_step_tail_check(k, cert->set, cert->epsilon, c.nmax, policy);
    r.report["n_step_tail_check"] = tail_rows_json(rows);
    r.csv["tail_check.csv"] = tail_rows_csv(rows);
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const TailCheckRow& row) { return row.pass; });
    s << "n-step tail check up to n=" << c.nmax << ": " << (ok ? "pass" : "FAIL") << "\n";
    if (!ok) r.exit_code = kExitViolation;
  }
  const CompactnessReport verdict = compactness_verdict(k, kDefaultEpsilonGrid, c.budget);
  r.report["compactness"] = compactness_json(verdict);
  s << "compactness criterion: " << verdict.summary << "\n";
  r.summary = s.str();
}

void run_bounds(const Kernel& k, const RunConfig& c, RunResult& r) {
  require_epsilon(c.epsilon);
  require_state(k, c.state, "state");
  if (!(c.z >= 0.0 && c.z < 1.0)) throw ValidationError("z", "must lie in [0, 1)");
  const auto set = require_set(k, c);
  const TruncationPolicy policy = policy_of(c);
  std::ostringstream s;
  std::vector<BoundCheck> checks;

  const TailSup tail = tail_sup(k, set, c.budget);
  r.report["set"] = states_json(set);
  r.report["tail_sup"] = {{"value", tail.value}, {"exhaustive", tail.exhaustive}};
  const bool certified = tail.exhaustive && tail.value < *c.epsilon;
  r.report["certified"] = certified;
  if (certified) {
    const TightnessCertificate cert = certify(k, set, *c.epsilon, c.budget);
    const ReturnTimeBounds rt = check_return_time_bounds(k, cert, c.order, policy);
    json taus = json::array();
    for (const auto& t : rt.terms) {
      taus.push_back({{"state", t.state.index}, {"tau", t.tau}, {"converged", t.converged}, {"exact", t.exact}});
    }
    r.report["return_times"] = taus;
    checks.insert(checks.end(), rt.checks.begin(), rt.checks.end());

    // Hitting-time bounds hold from every start; keep the worst start per check.
    const std::size_t sources = k.is_finite() ? std::min(*k.state_count(), c.budget) : c.budget;
    std::vector<BoundCheck> worst;
    json expectations = json::array();
    for (std::size_t x = 0; x < sources; ++x) {
      const auto dist = hitting_time_distribution(k, set, StateId{x}, c.nmax, policy);
      const auto hc = check_hitting_bounds(dist, cert);
      expectations.push_back({{"source", x}, {"expectation_lower", dist.expectation_lower()}, {"expectation_upper", hc[1].lhs}});
      if (worst.empty()) {
        worst = hc;
        continue;
      }
      for (std::size_t i = 0; i < hc.size(); ++i) {
        const bool failing = hc[i].status == CheckStatus::Fail && worst[i].status != CheckStatus::Fail;
        if (failing || (hc[i].status == worst[i].status && hc[i].lhs / hc[i].rhs > worst[i].lhs / worst[i].rhs)) worst[i] = hc[i];
      }
    }
    r.report["hitting_expectations"] = expectations;
    checks.insert(checks.end(), worst.begin(), worst.end());
  } else {
    s << "A is not a certified tightness set at epsilon=" << *c.epsilon << "; return-time and hitting bounds skipped\n";
  }

  if (const auto m = compute_reversibility_measure(k, policy)) {
    const StateId x{c.state};
    if (m->covers(x) && std::all_of(set.begin(), set.end(), [&](StateId a) { return m->covers(a); })) {
      const auto rows = n_step_rows(k, x, 2 * c.nmax, policy);
      BoundCheck sweep{"reversible_lower_bound", 0.0, ">=", 0.0, CheckStatus::Pass};
      double worst_margin = std::numeric_limits<double>::infinity();
      for (std::size_t n = 1; n <= c.nmax; ++n) {
        const ReturnLowerBound lc = reversible_lower_bound(rows, *m, set, x, n);
        const double margin = lc.lhs - lc.rhs;
        if (!lc.pass) sweep.status = CheckStatus::Fail;
        if (margin < worst_margin) {
          worst_margin = margin;
          sweep.name = "reversible_lower_bound_n" + std::to_string(n);
          sweep.lhs = lc.lhs;
          sweep.rhs = lc.rhs;
        }
      }
      checks.push_back(sweep);
      if (std::find(set.begin(), set.end(), x) != set.end()) {
        const GreenBoundCheck g = green_lower_bound(k, *m, set, x, c.z, c.order, policy);
        checks.push_back({"green_lower_bound", g.lhs, ">=", g.rhs, g.status});
      }
    }
    r.report["reversible"] = true;
  } else {
    r.report["reversible"] = false;
  }

  json table = json::array();
  std::ostringstream csv;
  csv << "check,lhs,relation,rhs,status\n";
  bool failed = false;
  for (const auto& check : checks) {
    table.push_back(check_json(check));
    csv << check.name << ',' << fmt(check.lhs) << ',' << check.relation << ',' << fmt(check.rhs) << ','
        << to_string(check.status) << '\n';
    s << "  " << check.name << ": " << check.lhs << ' ' << check.relation << ' ' << check.rhs << "  ["
      << to_string(check.status) << "]\n";
    failed = failed || check.status == CheckStatus::Fail;
  }
  r.report["checks"] = table;
  r.csv["bounds.csv"] = csv.str();
  if (failed) r.exit_code = kExitViolation;
  r.summary = s.str();
}

void run_simulate(const Kernel& k, const RunConfig& c, RunResult& r) {
  require_state(k, c.state, "state");
  if (c.trials < 1) throw ValidationError("trials", "must be at least 1");
  if (c.steps < 1) throw ValidationError("steps", "must be at least 1");
  if (c.cap < 1) throw ValidationError("cap", "must be at least 1");
  const StateId x0{c.state};
  const std::vector<StateId> set = c.set.empty() ? std::vector<StateId>{x0} : require_set(k, c);
  std::ostringstream s;

  const ReturnTimeEstimate rt = estimate_return_time(k, x0, c.trials, c.cap, c.seed);
  r.report["return_time"] = {{"mean", rt.estimate.mean},
                             {"half_width", rt.estimate.half_width},
                             {"trials", rt.estimate.trials},
                             {"censored", rt.censored_count}};
  const EstimateWithCI occ = occupation_fraction(k, set, x0, c.steps, c.seed);
  r.report["occupation_fraction"] = {{"mean", occ.mean}, {"half_width", occ.half_width}, {"steps", occ.trials}};

  std::optional<TightnessCertificate> cert;
  if (c.epsilon) {
    require_epsilon(c.epsilon);
    const TailSup tail = tail_sup(k, set, c.budget);
    if (tail.exhaustive && tail.value < *c.epsilon) cert = certify(k, set, *c.epsilon, c.budget);
    r.report["certified"] = cert.has_value();
  }
  const SurvivalCurve curve = hitting_time_samples(k, set, x0, c.trials, c.cap, c.seed, cert);
  r.report["hitting_time"] = {{"mean", curve.mean.mean},
                              {"half_width", curve.mean.half_width},
                              {"censored", curve.censored_count},
                              {"survival_violations", curve.violations ? json(*curve.violations) : json(nullptr)}};
  if (curve.violations && !curve.violations->empty()) r.exit_code = kExitViolation;

  std::ostringstream survival;
  survival << "n,survival\n";
  for (std::size_t n = 1; n <= curve.survival.size(); ++n) {
    survival << n << ',' << fmt(curve.survival[n - 1]) << '\n';
    if (curve.survival[n - 1] == 0.0) break;
  }
  r.csv["survival.csv"] = survival.str();
  std::ostringstream trace;
  trace << "step,fraction\n";
  for (const auto& [step, frac] : occupation_trace(k, set, x0, c.steps, std::max<std::size_t>(1, c.steps / 1000), c.seed)) {
    trace << step << ',' << fmt(frac) << '\n';
  }
  r.csv["occupation.csv"] = trace.str();

  s << "return time to " << c.state << ": " << rt.estimate.mean << " +/- " << rt.estimate.half_width << " ("
    << rt.censored_count << " censored)\n"
    << "occupation fraction of A: " << occ.mean << " +/- " << occ.half_width << "\n"
    << "hitting time of A: " << curve.mean.mean << " +/- " << curve.mean.half_width << "\n";
  r.summary = s.str();
}

void run_series(const Kernel& k, const RunConfig& c, RunResult& r) {
  require_state(k, c.state, "state");
  const std::size_t target = c.target.value_or(c.state);
  require_state(k, target, "target");
  if (c.order < 1) throw ValidationError("order", "must be at least 1");
  const TruncationPolicy policy = policy_of(c);
  const StateId x{c.state};
  const StateId y{target};
  const FirstReturnTable f = first_return_probs(k, x, y, c.order, policy);
  const TruncatedSeries gxy = green_series(k, x, y, c.order, policy);
  const TruncatedSeries gyy = x == y ? gxy : green_series(k, y, y, c.order, policy);
  const TruncatedSeries from_g = f_series_from_g(gxy, gyy, x == y);
  double max_gap = 0.0;
  for (std::size_t n = 0; n <= c.order; ++n) max_gap = std::max(max_gap, std::abs(from_g[n] - f.f[n]));

  std::ostringstream csv;
  csv << "n,f,p\n";
  for (std::size_t n = 0; n <= c.order; ++n) csv << n << ',' << fmt(f.f[n]) << ',' << fmt(gxy[n]) << '\n';
  r.csv["series.csv"] = csv.str();
  r.report["source"] = c.state;
  r.report["target"] = target;
  r.report["order"] = c.order;
  r.report["F_at_1_partial"] = f.total();
  r.report["defect"] = f.defect;
  r.report["max_gap_taboo_vs_green_division"] = max_gap;
  std::ostringstream s;
  s << "sum_{n<=" << c.order << "} f^(n)(" << c.state << ',' << target << ") = " << f.total()
    << "\nmax |F from G - taboo recursion| = " << max_gap << "\n";
  r.summary = s.str();
}

}  // namespace

RunResult run(const RunConfig& config) {
  RunResult r;
  r.report["config"] = to_json(config);
  r.report["subcommand"] = config.subcommand;
  try {
    const Kernel k = make_chain(config.chain);
    r.report["chain"] = k.info().label();
    if (config.subcommand == "classify") {
      run_classify(k, config, r);
    } else if (config.subcommand == "tightness") {
      run_tightness(k, config, r);
    } else if (config.subcommand == "bounds") {
      run_bounds(k, config, r);
    } else if (config.subcommand == "simulate") {
      run_simulate(k, config, r);
    } else if (config.subcommand == "series") {
      run_series(k, config, r);
    } else {
      throw ValidationError("subcommand", "unknown subcommand '" + config.subcommand + "'");
    }
  } catch (const ValidationError& e) {
    r = RunResult{kExitInvalidInput, {{"config", to_json(config)}, {"error", e.what()}, {"field", e.field()}}, {},
                  std::string("invalid input: ") + e.what() + "\n"};
  } catch (const DomainError& e) {
    r = RunResult{kExitInvalidInput, {{"config", to_json(config)}, {"error", e.what()}}, {},
                  std::string("invalid input: ") + e.what() + "\n"};
  } catch (const PreconditionError& e) {
    r = RunResult{kExitInvalidInput, {{"config", to_json(config)}, {"error", e.what()}}, {},
                  std::string("precondition not met: ") + e.what() + "\n"};
  }
  return r;
}

}  // namespace compact_markov
