#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "kz/error.hpp"

namespace kz {

enum class RowSense { less_equal, greater_equal, equal };

// minimize c^T x  subject to  A x (sense) b,  lower <= x <= upper.
struct LPInstance {
  std::vector<double> objective;
  Eigen::MatrixXd A;
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  int vars() const { return int(objective.size()); }
  int rows() const { return int(rhs.size()); }

  void validate() const {
    int n = vars(), m = rows();
    if (A.rows() != m || (m > 0 && A.cols() != n) || int(sense.size()) != m)
      throw ValidationError("LP: inconsistent row dimensions");
    if (int(lower.size()) != n || int(upper.size()) != n) throw ValidationError("LP: bound vectors");
    for (int j = 0; j < n; ++j)
      if (!(lower[j] <= upper[j])) throw ValidationError("LP: lower bound above upper bound");
  }
};

enum class PricingRule { bland, dantzig_bland_fallback };

struct LPOptions {
  PricingRule pricing = PricingRule::dantzig_bland_fallback;
  int max_iterations = 500000;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-11;
  int refactor_every = 64;
  int degenerate_limit = 50;
  // Optional warm start: for each structural variable with two finite bounds,
  // start at the upper bound when the entry is nonzero.
  std::vector<signed char> start_at_upper;
};

struct LPResult {
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;          // y: reduced costs are c - A^T y
  std::vector<double> reduced_costs;  // structural variables
  std::vector<int> basis;             // basic variable per row (structural ids < vars())
  int iterations = 0;
  int bland_steps = 0;
  bool alternative_optima = false;    // some off-basis variable has zero reduced cost
};

namespace detail {

class BoundedSimplex {
 public:
  BoundedSimplex(const LPInstance& lp, const LPOptions& opt) : lp_(lp), opt_(opt) {
    lp.validate();
    n_ = lp.vars();
    m_ = lp.rows();
    int slacks = 0;
    for (auto s : lp.sense) slacks += s != RowSense::equal;
    N_ = n_ + slacks + m_;
    art0_ = n_ + slacks;
    Af_ = Eigen::MatrixXd::Zero(m_, N_);
    if (m_ > 0) Af_.leftCols(n_) = lp.A;
    lo_.assign(N_, 0.0);
    up_.assign(N_, inf());
    c_.assign(N_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp.lower[j];
      up_[j] = lp.upper[j];
      c_[j] = lp.objective[j];
    }
    int s = n_;
    for (int i = 0; i < m_; ++i) {
      if (lp.sense[i] == RowSense::less_equal) Af_(i, s++) = 1.0;
      if (lp.sense[i] == RowSense::greater_equal) Af_(i, s++) = -1.0;
    }
    b_ = Eigen::Map<const Eigen::VectorXd>(lp.rhs.data(), m_);
  }

  LPResult run() {
    start();
    std::vector<double> phase1(N_, 0.0);
    for (int i = 0; i < m_; ++i) phase1[art0_ + i] = 1.0;
    iterate(phase1, true);
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i) infeas += x_[art0_ + i];
    double bscale = 1.0;
    for (int i = 0; i < m_; ++i) bscale = std::max(bscale, std::abs(b_[i]));
    if (infeas > opt_.feasibility_tol * bscale * std::max(1, m_)) {
      std::ostringstream msg;
      msg << "LP infeasible: phase-1 residual " << infeas;
      throw LpInfeasible(msg.str());
    }
    for (int i = 0; i < m_; ++i) {
      int k = art0_ + i;
      up_[k] = 0.0;
      if (!basic_[k]) x_[k] = 0.0;
    }
    iterate(c_, false);

    LPResult r;
    r.iterations = iterations_;
    r.bland_steps = bland_steps_;
    r.x.assign(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) r.objective += c_[j] * x_[j];
    Eigen::VectorXd y = duals(c_);
    r.duals.assign(y.data(), y.data() + m_);
    Eigen::VectorXd d = reduced(c_, y);
    r.reduced_costs.assign(d.data(), d.data() + n_);
    r.basis = head_;
    double tol = dtol(c_);
    for (int j = 0; j < art0_; ++j)
      if (!basic_[j] && lo_[j] < up_[j] && std::abs(d[j]) <= tol) r.alternative_optima = true;
    return r;
  }

 private:
  static double inf() { return std::numeric_limits<double>::infinity(); }

  double dtol(const std::vector<double>& c) const {
    double s = 1.0;
    for (double v : c) s = std::max(s, std::abs(v));
    return opt_.optimality_tol * s;
  }

  void start() {
    x_.assign(N_, 0.0);
    basic_.assign(N_, false);
    for (int j = 0; j < art0_; ++j) {
      bool hint = j < n_ && j < int(opt_.start_at_upper.size()) && opt_.start_at_upper[j];
      if (std::isfinite(lo_[j]) && !(hint && std::isfinite(up_[j])))
        x_[j] = lo_[j];
      else if (std::isfinite(up_[j]))
        x_[j] = up_[j];
      else
        x_[j] = 0.0;
    }
    Eigen::VectorXd r = b_;
    for (int j = 0; j < art0_; ++j)
      if (x_[j] != 0.0) r -= Af_.col(j) * x_[j];
    head_.assign(m_, -1);
    Binv_ = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      double sgn = r[i] < 0 ? -1.0 : 1.0;
      int k = art0_ + i;
      Af_(i, k) = sgn;
      x_[k] = std::abs(r[i]);
      basic_[k] = true;
      head_[i] = k;
      Binv_(i, i) = sgn;
    }
  }

  Eigen::VectorXd duals(const std::vector<double>& c) const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = c[head_[i]];
    return Binv_.transpose() * cb;
  }

  Eigen::VectorXd reduced(const std::vector<double>& c, const Eigen::VectorXd& y) const {
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(c.data(), N_);
    if (m_ > 0) d.noalias() -= Af_.transpose() * y;
    return d;
  }

  void refactor() {
    if (m_ == 0) return;
    Eigen::MatrixXd B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = Af_.col(head_[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Binv_ = lu.inverse();
    Eigen::VectorXd r = b_;
    for (int j = 0; j < N_; ++j)
      if (!basic_[j] && x_[j] != 0.0) r -= Af_.col(j) * x_[j];
    Eigen::VectorXd xb = Binv_ * r;
    for (int i = 0; i < m_; ++i) x_[head_[i]] = xb[i];
  }

  void iterate(const std::vector<double>& c, bool phase1) {
    const double tol = dtol(c);
    int degenerate = 0;
    bool bland = opt_.pricing == PricingRule::bland;
    int since_refactor = 0;
    for (;;) {
      if (iterations_ >= opt_.max_iterations) {
        std::ostringstream msg;
        msg << "LP: iteration limit " << opt_.max_iterations << " reached (cycling guard)";
        throw LpIterationLimit(msg.str());
      }
      Eigen::VectorXd y = duals(c);
      Eigen::VectorXd d = reduced(c, y);
      int enter = -1;
      double best = 0.0, dir = 0.0;
      for (int j = 0; j < N_; ++j) {
        if (basic_[j] || !(lo_[j] < up_[j])) continue;
        if (!phase1 && j >= art0_) continue;
        double dj = d[j];
        double sdir = 0.0;
        bool at_lo = x_[j] == lo_[j], at_up = x_[j] == up_[j];
        if (dj < -tol && !at_up) sdir = 1.0;
        else if (dj > tol && !at_lo) sdir = -1.0;
        if (sdir == 0.0) continue;
        if (bland) {
          enter = j;
          dir = sdir;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          enter = j;
          dir = sdir;
        }
      }
      if (enter < 0) return;
      if (bland && opt_.pricing != PricingRule::bland) ++bland_steps_;

      Eigen::VectorXd alpha = m_ > 0 ? Eigen::VectorXd(Binv_ * Af_.col(enter)) : Eigen::VectorXd();
      double theta = inf();
      int leave = -1;
      double leave_piv = 0.0;
      for (int i = 0; i < m_; ++i) {
        double rate = -dir * alpha[i];  // d x_B[i] / d theta
        int k = head_[i];
        double lim = inf();
        if (rate < -opt_.pivot_tol && std::isfinite(lo_[k]))
          lim = std::max(0.0, (x_[k] - lo_[k]) / -rate);
        else if (rate > opt_.pivot_tol && std::isfinite(up_[k]))
          lim = std::max(0.0, (up_[k] - x_[k]) / rate);
        if (!std::isfinite(lim)) continue;
        double slack = 1e-12 * std::max(1.0, std::isfinite(theta) ? theta : 1.0);
        if (leave < 0 || lim < theta - slack) {
          theta = lim;
          leave = i;
          leave_piv = std::abs(alpha[i]);
        } else if (lim <= theta + slack) {
          bool take = bland ? k < head_[leave] : std::abs(alpha[i]) > leave_piv;
          if (take) {
            theta = std::min(theta, lim);
            leave = i;
            leave_piv = std::abs(alpha[i]);
          }
        }
      }
      double flip = up_[enter] - lo_[enter];
      bool do_flip = std::isfinite(flip) && flip <= theta;
      if (do_flip) theta = flip;
      if (!std::isfinite(theta)) {
        if (phase1) throw NumericalError("LP: unbounded direction in phase 1");
        throw LpUnbounded("LP unbounded");
      }

      ++iterations_;
      x_[enter] += dir * theta;
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * theta * alpha[i];
      if (do_flip) {
        x_[enter] = dir > 0 ? up_[enter] : lo_[enter];
      } else {
        int k = head_[leave];
        double rate = -dir * alpha[leave];
        x_[k] = rate < 0 ? lo_[k] : up_[k];
        basic_[k] = false;
        basic_[enter] = true;
        head_[leave] = enter;
        double piv = alpha[leave];
        Binv_.row(leave) /= piv;
        for (int i = 0; i < m_; ++i)
          if (i != leave && alpha[i] != 0.0) Binv_.row(i) -= alpha[i] * Binv_.row(leave);
        if (++since_refactor >= opt_.refactor_every) {
          refactor();
          since_refactor = 0;
        }
      }

      if (theta <= 1e-12) {
        if (++degenerate >= opt_.degenerate_limit) bland = true;
      } else {
        degenerate = 0;
        bland = opt_.pricing == PricingRule::bland;
      }
    }
  }

  const LPInstance& lp_;
  const LPOptions& opt_;
  int n_ = 0, m_ = 0, N_ = 0, art0_ = 0;
  Eigen::MatrixXd Af_;
  Eigen::VectorXd b_;
  std::vector<double> lo_, up_, c_, x_;
  std::vector<bool> basic_;
  std::vector<int> head_;
  Eigen::MatrixXd Binv_;
  int iterations_ = 0;
  int bland_steps_ = 0;
};

}  // namespace detail

// Bounded-variable revised simplex (two phases, explicit basis inverse with periodic
// refactorization). Dantzig pricing falls back to Bland's rule on degenerate streaks.
inline LPResult solve_dense_lp(const LPInstance& lp, const LPOptions& opt = {}) {
  detail::BoundedSimplex s(lp, opt);
  return s.run();
}

}  // namespace kz
