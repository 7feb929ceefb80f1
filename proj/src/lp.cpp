#include "sbf/lp.hpp"

#include <Eigen/LU>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace sbf::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-10;    // hard floor for an acceptable pivot
constexpr double kNoiseDelta = 1e-13;  // below this a column entry is treated as zero
constexpr double kStablePivot = 1e-7;  // below this, rebuild the inverse before trusting it
constexpr double kFeasTol = 1e-7;
constexpr double kDriftTol = 1e-4;  // mid-run rebuild residue worth repairing over
constexpr long kRefreshPeriod = 96;
constexpr long kCautiousRefresh = 24;
constexpr double kWildPivot = 1e6;   // refresh immediately after pivots this extreme
constexpr double kWildColumn = 1e8;  // transformed column too blown up to pivot on

enum class VarState { AtLower, AtUpper, Free, Basic };

// Dense revised simplex over bounded variables with an explicit basis
// inverse. Columns are the structural variables followed by one slack per
// row and then any artificials installed for an infeasible basis. The
// inverse is maintained by product-form updates and rebuilt from scratch
// periodically, after numerically shaky pivots, and before any claim of
// optimality, infeasibility or unboundedness is accepted.
class Simplex {
 public:
  explicit Simplex(const Problem& prob) {
    n_ = prob.c.size();
    m_ = prob.A.rows();
    if (prob.A.cols() != n_ || prob.rhs.size() != m_ ||
        static_cast<long>(prob.rel.size()) != m_ || prob.lower.size() != n_ ||
        prob.upper.size() != n_) {
      throw std::invalid_argument("lp problem dimensions are inconsistent");
    }
    A_.resize(m_, n_);
    rhs_.resize(m_);
    lo_.assign(n_ + m_, 0.0);
    hi_.assign(n_ + m_, kInf);
    for (long r = 0; r < m_; ++r) {
      const char rel = prob.rel[r];
      if (rel == '>') {
        A_.row(r) = -prob.A.row(r);
        rhs_[r] = -prob.rhs[r];
      } else if (rel == '<' || rel == '=') {
        A_.row(r) = prob.A.row(r);
        rhs_[r] = prob.rhs[r];
      } else {
        throw std::invalid_argument("lp relation must be '<', '>' or '='");
      }
      if (rel == '=') hi_[n_ + r] = 0.0;  // equality slack pinned to zero
    }
    for (long j = 0; j < n_; ++j) {
      lo_[j] = prob.lower[j];
      hi_[j] = prob.upper[j];
      if (lo_[j] > hi_[j]) throw std::invalid_argument("lp variable bounds cross");
    }
    state_.assign(n_ + m_, VarState::AtLower);
    value_.assign(n_ + m_, 0.0);
    for (long j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        state_[j] = VarState::AtLower;
        value_[j] = lo_[j];
      } else if (std::isfinite(hi_[j])) {
        state_[j] = VarState::AtUpper;
        value_[j] = hi_[j];
      } else {
        state_[j] = VarState::Free;
        value_[j] = 0.0;
      }
    }
    basic_.resize(m_);
    binv_ = Mat::Identity(m_, m_);
    xb_.resize(m_);
    for (long r = 0; r < m_; ++r) {
      basic_[r] = n_ + r;
      state_[n_ + r] = VarState::Basic;
      double v = rhs_[r];
      for (long j = 0; j < n_; ++j) v -= A_(r, j) * value_[j];
      xb_[r] = v;
    }
  }

  Solution run(const Vec& cost_in) {
    for (int round = 0; round < 8; ++round) {
      if (!make_feasible()) return {Status::Infeasible, Vec(), 0.0};
      Vec cost = Vec::Zero(total());
      cost.head(n_) = cost_in;
      const Outcome out = iterate(cost, false);
      if (out == Outcome::Unbounded) return {Status::Unbounded, Vec(), 0.0};
      if (out == Outcome::LostFeasibility) continue;  // repair and resume
      Solution sol;
      sol.status = Status::Optimal;
      sol.x.resize(n_);
      for (long j = 0; j < n_; ++j) sol.x[j] = current_value(j);
      sol.objective = cost_in.dot(sol.x);
      return sol;
    }
    throw std::runtime_error("lp solver failed to stabilize");
  }

 private:
  enum class Outcome { Optimal, Unbounded, LostFeasibility };

  long total() const { return static_cast<long>(lo_.size()); }

  double current_value(long j) const {
    if (state_[j] == VarState::Basic) {
      for (long r = 0; r < m_; ++r) {
        if (basic_[r] == j) return xb_[r];
      }
    }
    return value_[j];
  }

  Vec dense_column(long col) const {
    Vec out = Vec::Zero(m_);
    if (col < n_) {
      out = A_.col(col);
    } else if (col < n_ + m_) {
      out[col - n_] = 1.0;
    } else {
      const long k = col - n_ - m_;
      out[art_rows_[k]] = art_sgn_[k];
    }
    return out;
  }

  Vec entering_column(long col) const {
    if (col >= n_ && col < n_ + m_) return binv_.col(col - n_);
    if (col >= n_ + m_) {
      const long k = col - n_ - m_;
      return binv_.col(art_rows_[k]) * art_sgn_[k];
    }
    return binv_ * A_.col(col);
  }

  double max_basic_violation() const {
    if (!xb_.allFinite()) return kInf;
    double worst = 0.0;
    for (long r = 0; r < m_; ++r) {
      const long bj = basic_[r];
      if (std::isfinite(lo_[bj])) worst = std::max(worst, lo_[bj] - xb_[r]);
      if (std::isfinite(hi_[bj])) worst = std::max(worst, xb_[r] - hi_[bj]);
    }
    return worst;
  }

  // rebuild the basis inverse and basic values from scratch
  void refresh() {
    Mat B(m_, m_);
    for (long r = 0; r < m_; ++r) B.col(r) = dense_column(basic_[r]);
    binv_ = B.partialPivLu().inverse();
    // a singular basis slips through the factorization as a garbage inverse
    binv_wild_ = !binv_.allFinite() || binv_.cwiseAbs().maxCoeff() > 1e100;
    Vec rhs_eff = rhs_;
    for (long j = 0; j < total(); ++j) {
      if (state_[j] == VarState::Basic || value_[j] == 0.0) continue;
      rhs_eff -= dense_column(j) * value_[j];
    }
    xb_ = binv_ * rhs_eff;
    updates_ = 0;
  }

  // Discards the current basis and restarts from the all-slack one, exactly
  // as at construction. The escape hatch when repeated repairs of a
  // numerically wrecked basis go nowhere: recomputing basic values through a
  // near-singular basis re-rolls errors larger than the feasibility
  // tolerance, so patching such a basis in place can never converge.
  void reset_basis() {
    for (long j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        state_[j] = VarState::AtLower;
        value_[j] = lo_[j];
      } else if (std::isfinite(hi_[j])) {
        state_[j] = VarState::AtUpper;
        value_[j] = hi_[j];
      } else {
        state_[j] = VarState::Free;
        value_[j] = 0.0;
      }
    }
    for (long j = n_ + m_; j < total(); ++j) {
      hi_[j] = 0.0;
      state_[j] = VarState::AtLower;
      value_[j] = 0.0;
    }
    for (long r = 0; r < m_; ++r) {
      basic_[r] = n_ + r;
      state_[n_ + r] = VarState::Basic;
      double v = rhs_[r];
      for (long j = 0; j < n_; ++j) v -= A_(r, j) * value_[j];
      xb_[r] = v;
    }
    binv_ = Mat::Identity(m_, m_);
    binv_wild_ = false;
    updates_ = 0;
  }

  // Installs artificials for every basic variable outside its bounds and
  // minimizes their sum. True when a feasible basis is reached. The first
  // attempts repair the current basis in place; if those keep failing the
  // basis is rebuilt from scratch, in the last resort with Bland pricing and
  // frequent inverse rebuilds. An infeasibility verdict is only trusted when
  // no numerical trouble was seen or the basis was rebuilt first.
  bool make_feasible() {
    bool suspect = false;
    for (int attempt = 0; attempt < 6; ++attempt) {
      if (attempt >= 4) cautious_ = true;
      if (attempt >= 2) {
        reset_basis();
      } else {
        refresh();
        if (binv_wild_) reset_basis();  // singular basis: repair is hopeless
      }
      // stale artificials that sit off the basis must not wander back in
      for (long j = n_ + m_; j < total(); ++j) {
        if (state_[j] != VarState::Basic) {
          hi_[j] = 0.0;
          state_[j] = VarState::AtLower;
          value_[j] = 0.0;
        }
      }
      // Put every basic slack on its own row first. The artificial installed
      // for a repaired row is that row's unit column, which must not
      // duplicate a unit column already in the basis; after this relabeling
      // a row whose basic is not its own slack cannot have that slack basic
      // anywhere else. Swapping rows of the inverse keeps it valid.
      for (long r = 0; r < m_; ++r) {
        long bj = basic_[r];
        while (bj >= n_ && bj < n_ + m_ && bj - n_ != r) {
          const long q = bj - n_;
          std::swap(basic_[r], basic_[q]);
          std::swap(xb_[r], xb_[q]);
          binv_.row(r).swap(binv_.row(q));
          bj = basic_[r];
        }
      }
      bool any = false;
      for (long r = 0; r < m_; ++r) {
        const long bj = basic_[r];
        if (bj >= n_ + m_ && hi_[bj] > 0.0 && xb_[r] > kFeasTol) {
          any = true;  // a live artificial still carries residual
          continue;
        }
        int sgn = 0;
        if (xb_[r] < lo_[bj] - kFeasTol) sgn = -1;
        else if (xb_[r] > hi_[bj] + kFeasTol) sgn = +1;
        if (sgn == 0) continue;
        any = true;
        bool row_taken = false;  // an earlier artificial for this row, still basic
        for (size_t k = 0; k < art_rows_.size(); ++k) {
          if (art_rows_[k] == r && state_[n_ + m_ + k] == VarState::Basic) {
            row_taken = true;
            break;
          }
        }
        if (row_taken) continue;  // leave the row for a later attempt
        // park the variable on the violated bound; a fresh basic artificial
        // carries the residual, which its signed column makes positive
        const double target = sgn < 0 ? lo_[bj] : hi_[bj];
        const double gap = xb_[r] - target;
        state_[bj] = sgn < 0 ? VarState::AtLower : VarState::AtUpper;
        value_[bj] = target;
        const long col = total();
        art_rows_.push_back(r);
        art_sgn_.push_back(sgn);
        lo_.push_back(0.0);
        hi_.push_back(kInf);
        state_.push_back(VarState::Basic);
        value_.push_back(0.0);
        basic_[r] = col;
        xb_[r] = gap * sgn;
      }
      if (!any) {
        pin_artificials();
        return true;
      }
      refresh();
      Vec phase1 = Vec::Zero(total());
      for (long j = n_ + m_; j < total(); ++j) phase1[j] = 1.0;
      const Outcome out = iterate(phase1, true);
      if (out == Outcome::LostFeasibility) {
        suspect = true;
        continue;
      }
      double inf_sum = 0.0;
      for (long r = 0; r < m_; ++r) {
        if (basic_[r] >= n_ + m_) inf_sum += std::max(0.0, xb_[r]);
      }
      if (inf_sum > kFeasTol) {
        if (!suspect || attempt >= 2) return false;
        continue;
      }
      pin_artificials();
      return true;
    }
    throw std::runtime_error("lp solver failed to reach a feasible basis");
  }

  void pin_artificials() {
    for (long j = n_ + m_; j < total(); ++j) {
      hi_[j] = 0.0;
      if (state_[j] != VarState::Basic) {
        state_[j] = VarState::AtLower;
        value_[j] = 0.0;
      }
    }
  }

  Outcome iterate(const Vec& cost, bool phase1) {
    long degenerate_streak = 0;
    bool bland = cautious_;
    // columns whose transformed image blows up even on a fresh inverse are
    // set aside; the bans drop once the basis changes, and are overridden
    // when no other column improves
    std::vector<char> banned(total(), 0);
    bool force_banned = false;
    for (long iter = 0; iter < 200000; ++iter) {
      // a wrecked inverse poisons pricing with NaNs, which read as optimal
      if (binv_wild_) return Outcome::LostFeasibility;
      Vec cb(m_);
      for (long r = 0; r < m_; ++r) cb[r] = cost[basic_[r]];
      const Vec y = binv_.transpose() * cb;
      const Vec ya = A_.transpose() * y;

      long enter = -1;
      int dir = 0;
      bool saw_banned = false;
      double best = kCostTol;
      for (long j = 0; j < total(); ++j) {
        if (state_[j] == VarState::Basic) continue;
        if (hi_[j] - lo_[j] == 0.0) continue;  // fixed: pinned artificials, equality slacks
        double d = cost[j];
        if (j < n_) {
          d -= ya[j];
        } else if (j < n_ + m_) {
          d -= y[j - n_];
        } else {
          const long k = j - n_ - m_;
          d -= y[art_rows_[k]] * art_sgn_[k];
        }
        int cand_dir = 0;
        if (state_[j] == VarState::AtLower && d < -kCostTol) cand_dir = +1;
        else if (state_[j] == VarState::AtUpper && d > kCostTol) cand_dir = -1;
        else if (state_[j] == VarState::Free) {
          if (d < -kCostTol) cand_dir = +1;
          else if (d > kCostTol) cand_dir = -1;
        }
        if (cand_dir == 0) continue;
        if (banned[j] && !force_banned) {
          saw_banned = true;
          continue;
        }
        if (bland) {
          enter = j;
          dir = cand_dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter < 0) {
        if (saw_banned) {
          // nothing else improves; allow the shunned columns after all
          std::fill(banned.begin(), banned.end(), 0);
          force_banned = true;
          continue;
        }
        // only accept optimality certified by a freshly rebuilt inverse
        if (updates_ > 0) {
          refresh();
          if (max_basic_violation() > 10.0 * kFeasTol) return Outcome::LostFeasibility;
          continue;
        }
        return Outcome::Optimal;
      }

      Vec w = entering_column(enter);
      double winf = w.cwiseAbs().maxCoeff();
      double tmax = kInf;
      long leave = -1;
      int leave_state = 0;  // -1 lower, +1 upper
      bool stuck = false;
      for (bool retried = false;;) {
        const double span = hi_[enter] - lo_[enter];
        // pass one: the largest step with every basic variable allowed to
        // move the feasibility tolerance past its bound. The gap is floored
        // at zero so a basic already sitting beyond its bound still offers
        // headroom; otherwise such debris forces a degenerate pivot on
        // whatever tiny entry that row happens to carry. Every nonzero entry
        // blocks, including ones too small to ever pivot on; a long step
        // through them would silently carry their basics out of bounds.
        const double block_tol = force_banned ? kPivotTol : kNoiseDelta;
        double tlim = std::isfinite(span) ? span : kInf;
        for (long r = 0; r < m_; ++r) {
          const double delta = dir * w[r];
          const long bj = basic_[r];
          if (delta > block_tol) {
            if (!std::isfinite(lo_[bj])) continue;
            tlim = std::min(tlim, (std::max(xb_[r] - lo_[bj], 0.0) + kFeasTol) / delta);
          } else if (delta < -block_tol) {
            if (!std::isfinite(hi_[bj])) continue;
            tlim = std::min(tlim, (std::max(hi_[bj] - xb_[r], 0.0) + kFeasTol) / (-delta));
          }
        }
        // pass two: among the rows that block within that step, pivot on the
        // largest entry; tiny-pivot degenerate steps are what corrupt the
        // product-form inverse, and any runner-up row ends at most the
        // tolerance beyond its bound
        tmax = std::isfinite(span) ? span : kInf;
        leave = -1;
        leave_state = 0;
        double best_piv = 0.0;
        for (long r = 0; r < m_; ++r) {
          const double delta = dir * w[r];
          const long bj = basic_[r];
          if (delta > kPivotTol) {
            if (!std::isfinite(lo_[bj])) continue;
            const double t = (xb_[r] - lo_[bj]) / delta;
            if (t <= tlim && delta > best_piv) {
              best_piv = delta;
              tmax = std::max(t, 0.0);
              leave = r;
              leave_state = -1;
            }
          } else if (delta < -kPivotTol) {
            if (!std::isfinite(hi_[bj])) continue;
            const double t = (hi_[bj] - xb_[r]) / (-delta);
            if (t <= tlim && -delta > best_piv) {
              best_piv = -delta;
              tmax = std::max(t, 0.0);
              leave = r;
              leave_state = +1;
            }
          }
        }
        // blocked by a row too small to pivot on: no step, and flipping the
        // entering bound would overshoot that row
        stuck = leave < 0 && tlim < tmax - 1e-12;
        // a dubious ratio test is redone once on a rebuilt inverse: an
        // unbounded ray, a stuck column, a pivot too small to trust in
        // absolute or relative terms, or a blown-up column
        const bool shaky =
            !std::isfinite(tmax) || stuck ||
            (leave >= 0 && (std::abs(w[leave]) < kStablePivot ||
                            std::abs(w[leave]) * kWildPivot < winf || winf > kWildColumn));
        if (shaky && updates_ > 0 && !retried) {
          refresh();
          if (max_basic_violation() > kDriftTol) return Outcome::LostFeasibility;
          w = entering_column(enter);
          winf = w.cwiseAbs().maxCoeff();
          retried = true;
          continue;
        }
        break;
      }
      if ((stuck || winf > kWildColumn ||
           (leave >= 0 && std::abs(w[leave]) * kWildPivot < winf)) &&
          !force_banned) {
        if (updates_ > 0) {
          refresh();
          if (max_basic_violation() > kDriftTol) return Outcome::LostFeasibility;
          continue;
        }
        // even the fresh inverse leaves this column unusable: pivoting on it
        // would amplify roundoff by the growth ratio; steer around it
        banned[enter] = 1;
        continue;
      }
      if (!std::isfinite(tmax)) {
        if (phase1) throw std::runtime_error("phase 1 lp is unbounded");
        return Outcome::Unbounded;
      }
      if (tmax <= 1e-12) {
        if (++degenerate_streak > 40) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }

      if (leave < 0) {
        // bound flip, no basis change
        for (long r = 0; r < m_; ++r) xb_[r] -= dir * tmax * w[r];
        state_[enter] =
            (state_[enter] == VarState::AtLower) ? VarState::AtUpper : VarState::AtLower;
        value_[enter] = (state_[enter] == VarState::AtLower) ? lo_[enter] : hi_[enter];
        continue;
      }

      const double enter_value =
          (state_[enter] == VarState::Free ? 0.0 : value_[enter]) + dir * tmax;
      const long out_col = basic_[leave];
      for (long r = 0; r < m_; ++r) xb_[r] -= dir * tmax * w[r];
      state_[out_col] = leave_state < 0 ? VarState::AtLower : VarState::AtUpper;
      value_[out_col] = leave_state < 0 ? lo_[out_col] : hi_[out_col];
      basic_[leave] = enter;
      state_[enter] = VarState::Basic;
      xb_[leave] = enter_value;

      const double piv = w[leave];
      binv_.row(leave) /= piv;
      for (long r = 0; r < m_; ++r) {
        if (r == leave) continue;
        const double f = w[r];
        if (f != 0.0) binv_.row(r) -= f * binv_.row(leave);
      }
      ++updates_;
      std::fill(banned.begin(), banned.end(), 0);
      force_banned = false;
      const bool wild = std::abs(piv) > kWildPivot || std::abs(piv) < 1.0 / kWildPivot ||
                        winf > kWildPivot * std::abs(piv);
      const long period = cautious_ ? kCautiousRefresh : kRefreshPeriod;
      if (updates_ >= period || wild || max_basic_violation() > kDriftTol) {
        refresh();
        // ordinary update drift is left for the optimality gate to mop up;
        // only wholesale corruption warrants abandoning the pass
        if (max_basic_violation() > kDriftTol) return Outcome::LostFeasibility;
      }
    }
    throw std::runtime_error("simplex iteration limit exceeded");
  }

  long n_ = 0, m_ = 0;
  Mat A_;
  Vec rhs_;
  std::vector<double> lo_, hi_;
  std::vector<VarState> state_;
  std::vector<double> value_;  // resting value of nonbasic variables
  std::vector<long> basic_;
  Mat binv_;
  Vec xb_;
  std::vector<long> art_rows_;  // constraint row of each artificial column
  std::vector<double> art_sgn_;
  long updates_ = 0;       // product-form updates since the last rebuild
  bool cautious_ = false;  // Bland pricing and frequent rebuilds, once burned
  bool binv_wild_ = false;  // last rebuild produced a wrecked inverse
};

}  // namespace

namespace {

// TEMP DEBUG: dump each solved problem as jsonl when SBF_LP_DUMP is set
void dump_problem(const Problem& prob, const Solution& sol) {
  const char* path = std::getenv("SBF_LP_DUMP");
  if (!path) return;
  static FILE* f = std::fopen(path, "w");
  if (!f) return;
  static long counter = 0;
  std::fprintf(f, "{\"seed\":%ld,\"n\":%ld,\"m\":%ld,\"status\":\"%s\"", counter++,
               static_cast<long>(prob.c.size()), static_cast<long>(prob.A.rows()),
               sol.status == Status::Optimal
                   ? "Optimal"
                   : (sol.status == Status::Infeasible ? "Infeasible" : "Unbounded"));
  auto num = [&](double v) {
    if (std::isnan(v)) std::fprintf(f, "\"nan\"");
    else if (std::isinf(v)) std::fprintf(f, v > 0 ? "1e308" : "-1e308");
    else std::fprintf(f, "%.17g", v);
  };
  std::fprintf(f, ",\"c\":[");
  for (long j = 0; j < prob.c.size(); ++j) { if (j) std::fprintf(f, ","); num(prob.c[j]); }
  std::fprintf(f, "],\"lower\":[");
  for (long j = 0; j < prob.lower.size(); ++j) { if (j) std::fprintf(f, ","); num(prob.lower[j]); }
  std::fprintf(f, "],\"upper\":[");
  for (long j = 0; j < prob.upper.size(); ++j) { if (j) std::fprintf(f, ","); num(prob.upper[j]); }
  std::fprintf(f, "],\"rel\":\"");
  for (char c : prob.rel) std::fputc(c, f);
  std::fprintf(f, "\",\"rhs\":[");
  for (long r = 0; r < prob.rhs.size(); ++r) { if (r) std::fprintf(f, ","); num(prob.rhs[r]); }
  std::fprintf(f, "],\"A\":[");
  for (long r = 0; r < prob.A.rows(); ++r) {
    std::fprintf(f, r ? ",[" : "[");
    for (long j = 0; j < prob.A.cols(); ++j) { if (j) std::fprintf(f, ","); num(prob.A(r, j)); }
    std::fprintf(f, "]");
  }
  std::fprintf(f, "]");
  if (sol.status == Status::Optimal) {
    std::fprintf(f, ",\"objective\":");
    num(sol.objective);
    std::fprintf(f, ",\"x\":[");
    for (long j = 0; j < sol.x.size(); ++j) { if (j) std::fprintf(f, ","); num(sol.x[j]); }
    std::fprintf(f, "]");
  }
  std::fprintf(f, "}\n");
  std::fflush(f);
}

}  // namespace

Solution solve(const Problem& prob) {
  Simplex simplex(prob);
  dump_problem(prob, {});  // TEMP DEBUG: record before solving so throws are captured
  Solution sol = simplex.run(prob.c);
  dump_problem(prob, sol);
  return sol;
}

}  // namespace sbf::lp
