#pragma once

// Conservative currents W (signed type-i crossings per bond, oriented
// tail -> head) and non-conservative currents Q (net type-i creations per
// site, reaction and reservoir events kept apart), together with their
// compensators and predictable quadratic variations, integrated exactly
// along the trajectory.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bdcp/engine.hpp"
#include "bdcp/lattice.hpp"
#include "bdcp/params.hpp"
#include "bdcp/testfn.hpp"

namespace bdcp {

class CurrentLedger {
 public:
  explicit CurrentLedger(Geometry geometry);

  /// Throws std::invalid_argument if the event does not fit `before`.
  void apply(const EventRecord& e, const Configuration& before);
  void on_event(const EventRecord& e, const Configuration& before) { apply(e, before); }

  // Types are 1, 2, 3.
  std::int64_t W(BondIndex bond, int type) const { return w_[3 * bond + type - 1]; }
  std::int64_t Q_bulk(SiteIndex site, int type) const { return q_bulk_[3 * site + type - 1]; }
  std::int64_t Q_boundary(SiteIndex site, int type) const { return q_res_[3 * site + type - 1]; }

  /// Net type-i inflow through the bonds at `site` plus both creation ledgers.
  std::int64_t net_change(SiteIndex site, int type) const;

  /// Sum over sites and types of |eta_i(current) - eta_i(initial) - net_change|.
  std::int64_t continuity_defect(const Configuration& initial, const Configuration& current) const;

  /// Adds another replica's ledger (same geometry).
  void merge(const CurrentLedger& other);

  const Geometry& geometry() const noexcept { return geometry_; }

 private:
  Geometry geometry_;
  std::vector<std::int64_t> w_;
  std::vector<std::int64_t> q_bulk_;
  std::vector<std::int64_t> q_res_;
};

inline void ledger_apply(CurrentLedger& ledger, const EventRecord& e, const Configuration& before) {
  ledger.apply(e, before);
}

/// N^{-(d+1)} sum_i sum_bonds W(bond, i) G_{i, axis}(t, tail / N).
double current_pairing(const CurrentLedger& ledger, const VectorTestTriple& g, double t = 0.0);

/// N^{-d} sum_i sum_x H_i(t, x / N) Q(x, i); reservoir events only on request.
double creation_pairing(const CurrentLedger& ledger, const TestTriple& h,
                        bool include_boundary = false, double t = 0.0);

/// Keeps a ledger and a running copy of the configuration and checks the
/// continuity identity at the touched sites after every event. Throws
/// std::logic_error on the first violation.
class ContinuityAuditor {
 public:
  explicit ContinuityAuditor(const Configuration& initial);
  void on_event(const EventRecord& e, const Configuration& before);
  void on_finish(double t, const Configuration& config);

  const CurrentLedger& ledger() const noexcept { return ledger_; }
  std::uint64_t checks() const noexcept { return checks_; }

 private:
  void check_site(SiteIndex x);

  Configuration initial_;
  Configuration current_;
  CurrentLedger ledger_;
  std::uint64_t checks_ = 0;
};

/// Compensators A and predictable quadratic variations V of every W and Q,
/// so that W - A_W and Q - A_Q are martingales with E[(W - A)^2] = E[V].
/// Integrals are exact: the integrands are piecewise constant and are
/// flushed lazily at the sites and bonds an event touches.
class CompensatorTracker {
 public:
  CompensatorTracker(const Configuration& initial, const ModelParams& params, double t0 = 0.0);

  void on_event(const EventRecord& e, const Configuration& before);
  /// Brings every integral up to time t.
  void on_finish(double t, const Configuration& config);

  double W_drift(BondIndex b, int i) const { return w_drift_[3 * b + i - 1]; }
  double W_qv(BondIndex b, int i) const { return w_qv_[3 * b + i - 1]; }
  double Q_bulk_drift(SiteIndex x, int i) const { return qb_drift_[3 * x + i - 1]; }
  double Q_bulk_qv(SiteIndex x, int i) const { return qb_qv_[3 * x + i - 1]; }
  double Q_boundary_drift(SiteIndex x, int i) const { return qr_drift_[3 * x + i - 1]; }
  double Q_boundary_qv(SiteIndex x, int i) const { return qr_qv_[3 * x + i - 1]; }

  const Geometry& geometry() const noexcept { return geometry_; }

 private:
  void flush_site(SiteIndex x, double t, const Configuration& c);
  void flush_bond(BondIndex b, double t, const Configuration& c);

  Geometry geometry_;
  ModelParams params_;
  std::vector<double> site_time_, bond_time_;
  std::vector<double> w_drift_, w_qv_, qb_drift_, qb_qv_, qr_drift_, qr_qv_;
  std::vector<SiteIndex> touched_;
};

/// CSV with header bond_or_site,type,W_or_Q,compensator,quad_variation.
/// Rows "bond:k" (W), "site:x" (bulk Q) and "reservoir:x" (boundary Q, Gamma_N only).
void write_ledger_csv(std::ostream& out, const CurrentLedger& ledger,
                      const CompensatorTracker* tracker = nullptr);

}  // namespace bdcp
