#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kz/error.hpp"
#include "kz/functional.hpp"
#include "kz/interval.hpp"
#include "kz/laurent.hpp"
#include "kz/parallel.hpp"

namespace kz {

struct FormReport {
  std::string name;  // "H", "x-beta", "alpha-x", "(alpha-x)(x-beta)"
  int size = 0;      // 0 when the sequence is too short to test the form
  double min_eigenvalue = 0.0;
  bool psd = true;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<FormReport> forms;
  int failing_form = -1;  // index into forms, -1 when feasible
};

namespace detail {

// Pivoted Cholesky: PSD within thr. Stops once the remaining diagonal is below thr
// and then requires the leftover block to be PSD within thr as well.
inline bool pivoted_cholesky_psd(Eigen::MatrixXd a, double thr) {
  const int n = int(a.rows());
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (a(i, i) > a(p, p)) p = i;
    double d = a(p, p);
    if (d < -thr) return false;
    if (d <= thr) {
      int r = n - k;
      Eigen::MatrixXd rest = a.bottomRightCorner(r, r);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rest, Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff() >= -thr;
    }
    if (p != k) {
      a.row(p).swap(a.row(k));
      a.col(p).swap(a.col(k));
    }
    double l = std::sqrt(d);
    a.col(k).tail(n - k - 1) /= l;
    a.row(k).tail(n - k - 1) /= l;
    a.bottomRightCorner(n - k - 1, n - k - 1) -= a.col(k).tail(n - k - 1) * a.row(k).tail(n - k - 1);
  }
  return true;
}

// Moments of the pushforward under t = (x - c) / h.
inline std::vector<double> map_moments(const std::vector<double>& s, double c, double h) {
  std::vector<double> m(s.size(), 0.0);
  for (size_t k = 0; k < s.size(); ++k) {
    double binom = 1.0;
    for (size_t j = 0; j <= k; ++j) {
      // binom(k, j) (-c)^{k-j} s_j
      m[k] += binom * std::pow(-c, double(k - j)) * s[j];
      binom = binom * double(k - j) / double(j + 1);
    }
    m[k] /= std::pow(h, double(k));
  }
  return m;
}

}  // namespace detail

// Tests whether s_0, s_1, ... can be moments of a positive measure on [beta, alpha] through
// the Hankel form and its localized forms for (x - beta), (alpha - x), (alpha - x)(x - beta).
// The sequence is first mapped to [-1, 1].
inline FeasibilityReport hankel_feasible_on_interval(const std::vector<double>& s, double beta, double alpha,
                                                     double tol = 1e-10) {
  if (s.size() < 2) throw ValidationError("hankel_feasible_on_interval: need at least two moments");
  if (!(alpha > beta)) throw ValidationError("hankel_feasible_on_interval: empty interval");
  auto m = detail::map_moments(s, 0.5 * (alpha + beta), 0.5 * (alpha - beta));
  const int N = int(m.size());
  FeasibilityReport rep;
  auto add_form = [&](const std::string& name, int shift, auto entry) {
    FormReport f;
    f.name = name;
    int size = (N - 1 - shift) / 2 + 1;
    if (N - 1 - shift < 0) size = 0;
    f.size = size;
    if (size > 0) {
      Eigen::MatrixXd H(size, size);
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) H(i, j) = entry(i + j);
      double norm = std::max(H.norm(), std::abs(m[0]));
      double thr = tol * std::max(norm, 1e-300);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
      f.min_eigenvalue = es.eigenvalues().minCoeff();
      f.psd = detail::pivoted_cholesky_psd(H, thr);
    }
    rep.forms.push_back(f);
  };
  add_form("H", 0, [&](int k) { return m[k]; });
  add_form("x-beta", 1, [&](int k) { return m[k + 1] + m[k]; });
  add_form("alpha-x", 1, [&](int k) { return m[k] - m[k + 1]; });
  add_form("(alpha-x)(x-beta)", 2, [&](int k) { return m[k] - m[k + 2]; });
  for (size_t i = 0; i < rep.forms.size(); ++i)
    if (!rep.forms[i].psd) {
      rep.feasible = false;
      rep.failing_form = int(i);
      break;
    }
  return rep;
}

struct DeltaVerdict {
  SignConfiguration delta;
  FeasibilityReport report;
};

struct MarkovFeasibility {
  double L = 0.0;
  bool feasible = false;
  std::vector<DeltaVerdict> per_delta;
};

struct TrialRecord {
  double L = 0.0;
  int delta_index = 0;
  std::vector<double> min_eigenvalues;  // one per form
  bool feasible = false;
};

struct DualSolution {
  double L = 0.0;
  double lower = 0.0, upper = 0.0;  // infeasible / feasible brackets
  MarkovFeasibility at_lower, at_upper;
  std::vector<TrialRecord> trials;
  int steps = 0;
};

struct MarkovOptions {
  double tol = 1e-8;  // relative bracket width
  double lo = 1e-6, hi = 1e6;
  double hankel_tol = 1e-10;
  int threads = 0;
  int max_steps = 400;
};

// Every sign configuration must give an interval-feasible moment sequence.
inline MarkovFeasibility markov_feasible(const IntervalSystem& e, const LinearFunctional& lam, double L,
                                         const MarkovOptions& opt = {}) {
  auto configs = enumerate_sign_configurations(e.gap_count());
  MarkovFeasibility out;
  out.L = L;
  out.per_delta = parallel_map(
      int(configs.size()),
      [&](int i) {
        auto s = expand_dual_symbol(e, configs[i], lam, L);
        auto mu = dual_measure_moments(s);
        return DeltaVerdict{configs[i], hankel_feasible_on_interval(mu, e.left(), e.right(), opt.hankel_tol)};
      },
      opt.threads);
  out.feasible = std::all_of(out.per_delta.begin(), out.per_delta.end(),
                             [](const DeltaVerdict& d) { return d.report.feasible; });
  return out;
}

// Smallest L for which the dual problem is feasible, by geometric bisection.
inline DualSolution solve_markov_L(const IntervalSystem& e, const LinearFunctional& lam, int n,
                                   const MarkovOptions& opt = {}) {
  if (lam.degree() != n) throw ValidationError("solve_markov_L: functional degree differs from n");
  DualSolution sol;
  auto record = [&](const MarkovFeasibility& f) {
    for (size_t i = 0; i < f.per_delta.size(); ++i) {
      TrialRecord t;
      t.L = f.L;
      t.delta_index = int(i);
      t.feasible = f.per_delta[i].report.feasible;
      for (auto& fr : f.per_delta[i].report.forms) t.min_eigenvalues.push_back(fr.min_eigenvalue);
      sol.trials.push_back(std::move(t));
    }
  };
  auto hi = markov_feasible(e, lam, opt.hi, opt);
  record(hi);
  if (!hi.feasible)
    throw NumericalError("solve_markov_L: infeasible at the upper cap L = " + std::to_string(opt.hi));
  auto lo = markov_feasible(e, lam, opt.lo, opt);
  record(lo);
  if (lo.feasible)
    throw NumericalError("solve_markov_L: feasible already at the lower cap L = " + std::to_string(opt.lo));
  while (hi.L - lo.L > opt.tol * hi.L) {
    if (++sol.steps > opt.max_steps) throw NumericalError("solve_markov_L: bisection did not converge");
    auto mid = markov_feasible(e, lam, std::sqrt(lo.L * hi.L), opt);
    record(mid);
    (mid.feasible ? hi : lo) = std::move(mid);
  }
  sol.lower = lo.L;
  sol.upper = hi.L;
  sol.L = 0.5 * (lo.L + hi.L);
  sol.at_lower = std::move(lo);
  sol.at_upper = std::move(hi);
  return sol;
}

}  // namespace kz
