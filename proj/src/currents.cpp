#include "bdcp/currents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bdcp/rates.hpp"

namespace bdcp {

namespace {

double lattice_scale(const Geometry& g) { return g.half_width() > 0 ? g.half_width() : 1.0; }

[[noreturn]] void inconsistent(const EventRecord& e, const char* what) {
  std::ostringstream os;
  os << "ledger: " << to_string(e.kind) << " event at t=" << e.time << " inconsistent: " << what;
  throw std::invalid_argument(os.str());
}

}  // namespace

CurrentLedger::CurrentLedger(Geometry geometry)
    : geometry_(std::move(geometry)),
      w_(3 * geometry_.bonds().size(), 0),
      q_bulk_(3 * geometry_.site_count(), 0),
      q_res_(3 * geometry_.site_count(), 0) {}

void CurrentLedger::apply(const EventRecord& e, const Configuration& before) {
  if (e.kind == EventKind::exchange) {
    if (e.bond >= geometry_.bonds().size()) inconsistent(e, "bond out of range");
    const Bond& b = geometry_.bonds()[e.bond];
    if (b.tail != e.site || b.head != e.other) inconsistent(e, "endpoints do not match the bond");
    if (before[b.tail] != e.from || before[b.head] != e.to) inconsistent(e, "states differ from config");
    if (e.from == e.to) inconsistent(e, "no-op exchange");
    if (e.from != 0) ++w_[3 * e.bond + e.from - 1];
    if (e.to != 0) --w_[3 * e.bond + e.to - 1];
    return;
  }
  if (e.site >= geometry_.site_count()) inconsistent(e, "site out of range");
  if (before[e.site] != e.from) inconsistent(e, "from-state differs from config");
  if (e.from == e.to || e.to > 3) inconsistent(e, "not a state change");
  std::vector<std::int64_t>& q = e.kind == EventKind::boundary ? q_res_ : q_bulk_;
  if (e.kind == EventKind::boundary && !geometry_.is_boundary(e.site))
    inconsistent(e, "reservoir event off Gamma_N");
  if (e.from != 0) --q[3 * e.site + e.from - 1];
  if (e.to != 0) ++q[3 * e.site + e.to - 1];
}

std::int64_t CurrentLedger::net_change(SiteIndex site, int type) const {
  std::int64_t n = Q_bulk(site, type) + Q_boundary(site, type);
  const auto bonds = geometry_.bonds();
  for (BondIndex k : geometry_.incident_bonds(site)) {
    if (bonds[k].head == site) n += W(k, type);
    if (bonds[k].tail == site) n -= W(k, type);
  }
  return n;
}

std::int64_t CurrentLedger::continuity_defect(const Configuration& initial,
                                              const Configuration& current) const {
  std::int64_t defect = 0;
  for (SiteIndex x = 0; x < geometry_.site_count(); ++x)
    for (int i = 1; i <= 3; ++i)
      defect += std::llabs(current.eta(x, i) - initial.eta(x, i) - net_change(x, i));
  return defect;
}

void CurrentLedger::merge(const CurrentLedger& other) {
  if (!(other.geometry_ == geometry_)) throw std::invalid_argument("ledger merge: geometry mismatch");
  for (std::size_t k = 0; k < w_.size(); ++k) w_[k] += other.w_[k];
  for (std::size_t k = 0; k < q_bulk_.size(); ++k) {
    q_bulk_[k] += other.q_bulk_[k];
    q_res_[k] += other.q_res_[k];
  }
}

double current_pairing(const CurrentLedger& ledger, const VectorTestTriple& g, double t) {
  const Geometry& geo = ledger.geometry();
  const auto bonds = geo.bonds();
  double sum = 0.0;
  for (BondIndex k = 0; k < bonds.size(); ++k) {
    const Point u = geo.macro(bonds[k].tail);
    for (int i = 1; i <= 3; ++i) {
      const std::int64_t w = ledger.W(k, i);
      if (w == 0) continue;
      const TestFunction& f = g[i - 1][bonds[k].axis];
      if (!f.is_zero()) sum += static_cast<double>(w) * f.value(t, u);
    }
  }
  return sum / std::pow(lattice_scale(geo), geo.dim() + 1);
}

double creation_pairing(const CurrentLedger& ledger, const TestTriple& h, bool include_boundary,
                        double t) {
  const Geometry& geo = ledger.geometry();
  double sum = 0.0;
  for (SiteIndex x = 0; x < geo.site_count(); ++x) {
    const Point u = geo.macro(x);
    for (int i = 1; i <= 3; ++i) {
      std::int64_t q = ledger.Q_bulk(x, i);
      if (include_boundary) q += ledger.Q_boundary(x, i);
      if (q != 0 && !h[i - 1].is_zero()) sum += static_cast<double>(q) * h[i - 1].value(t, u);
    }
  }
  return sum / std::pow(lattice_scale(geo), geo.dim());
}

ContinuityAuditor::ContinuityAuditor(const Configuration& initial)
    : initial_(initial), current_(initial), ledger_(initial.geometry()) {}

void ContinuityAuditor::check_site(SiteIndex x) {
  for (int i = 1; i <= 3; ++i) {
    if (current_.eta(x, i) - initial_.eta(x, i) != ledger_.net_change(x, i)) {
      std::ostringstream os;
      os << "continuity identity violated at site " << x << ", type " << i;
      throw std::logic_error(os.str());
    }
  }
  ++checks_;
}

void ContinuityAuditor::on_event(const EventRecord& e, const Configuration& before) {
  if (!(before == current_)) throw std::logic_error("auditor: configuration out of sync");
  ledger_.apply(e, before);
  if (e.kind == EventKind::exchange) {
    current_.swap_sites(e.site, e.other);
    check_site(e.site);
    check_site(e.other);
  } else {
    current_.set(e.site, e.to);
    check_site(e.site);
  }
}

void ContinuityAuditor::on_finish(double, const Configuration& config) {
  if (!(config == current_)) throw std::logic_error("auditor: final configuration out of sync");
  if (ledger_.continuity_defect(initial_, current_) != 0)
    throw std::logic_error("continuity identity violated at finish");
}

CompensatorTracker::CompensatorTracker(const Configuration& initial, const ModelParams& params,
                                       double t0)
    : geometry_(initial.geometry()),
      params_(params),
      site_time_(geometry_.site_count(), t0),
      bond_time_(geometry_.bonds().size(), t0),
      w_drift_(3 * geometry_.bonds().size(), 0.0),
      w_qv_(3 * geometry_.bonds().size(), 0.0),
      qb_drift_(3 * geometry_.site_count(), 0.0),
      qb_qv_(3 * geometry_.site_count(), 0.0),
      qr_drift_(3 * geometry_.site_count(), 0.0),
      qr_qv_(3 * geometry_.site_count(), 0.0) {}

void CompensatorTracker::flush_site(SiteIndex x, double t, const Configuration& c) {
  const double dt = t - site_time_[x];
  site_time_[x] = t;
  if (dt <= 0.0) return;
  const State s = c[x];
  // Every jump s -> j moves Q(x, s) by -1 and Q(x, j) by +1.
  auto accumulate = [&](const RateTable<>& rates, std::vector<double>& drift, std::vector<double>& qv) {
    for (int j = 0; j < 4; ++j) {
      const double q = rates[j] * dt;
      if (q == 0.0) continue;
      if (s != 0) {
        drift[3 * x + s - 1] -= q;
        qv[3 * x + s - 1] += q;
      }
      if (j != 0) {
        drift[3 * x + j - 1] += q;
        qv[3 * x + j - 1] += q;
      }
    }
  };
  if (params_.reaction_on) accumulate(reaction_rates(c, x, params_), qb_drift_, qb_qv_);
  if (params_.boundary_on && geometry_.is_boundary(x))
    accumulate(boundary_rates(c, x, params_), qr_drift_, qr_qv_);
}

void CompensatorTracker::flush_bond(BondIndex k, double t, const Configuration& c) {
  const double dt = t - bond_time_[k];
  bond_time_[k] = t;
  if (dt <= 0.0 || !params_.exchange_on) return;
  const Bond& b = geometry_.bonds()[k];
  const State a = c[b.tail];
  const State h = c[b.head];
  if (a == h) return;
  const double q = params_.speedup() * dt;
  if (a != 0) {
    w_drift_[3 * k + a - 1] += q;
    w_qv_[3 * k + a - 1] += q;
  }
  if (h != 0) {
    w_drift_[3 * k + h - 1] -= q;
    w_qv_[3 * k + h - 1] += q;
  }
}

void CompensatorTracker::on_event(const EventRecord& e, const Configuration& before) {
  touched_.clear();
  touched_.push_back(e.site);
  if (e.kind == EventKind::exchange) touched_.push_back(e.other);
  const std::size_t changed = touched_.size();
  for (std::size_t k = 0; k < changed; ++k) {
    for (SiteIndex y : geometry_.neighbors(touched_[k])) touched_.push_back(y);
    for (BondIndex b : geometry_.incident_bonds(touched_[k])) flush_bond(b, e.time, before);
  }
  for (SiteIndex y : touched_) flush_site(y, e.time, before);
}

void CompensatorTracker::on_finish(double t, const Configuration& config) {
  for (SiteIndex x = 0; x < geometry_.site_count(); ++x) flush_site(x, t, config);
  for (BondIndex b = 0; b < geometry_.bonds().size(); ++b) flush_bond(b, t, config);
}

void write_ledger_csv(std::ostream& out, const CurrentLedger& ledger,
                      const CompensatorTracker* tracker) {
  const Geometry& geo = ledger.geometry();
  if (tracker && !(tracker->geometry() == geo))
    throw std::invalid_argument("write_ledger_csv: geometry mismatch");
  out << "bond_or_site,type,W_or_Q,compensator,quad_variation\n";
  auto tail = [&](double a, double v) {
    if (tracker) out << ',' << a << ',' << v << '\n';
    else out << ",,\n";
  };
  for (BondIndex k = 0; k < geo.bonds().size(); ++k)
    for (int i = 1; i <= 3; ++i) {
      out << "bond:" << k << ',' << i << ',' << ledger.W(k, i);
      tail(tracker ? tracker->W_drift(k, i) : 0.0, tracker ? tracker->W_qv(k, i) : 0.0);
    }
  for (SiteIndex x = 0; x < geo.site_count(); ++x)
    for (int i = 1; i <= 3; ++i) {
      out << "site:" << x << ',' << i << ',' << ledger.Q_bulk(x, i);
      tail(tracker ? tracker->Q_bulk_drift(x, i) : 0.0, tracker ? tracker->Q_bulk_qv(x, i) : 0.0);
    }
  for (SiteIndex x : geo.boundary_sites())
    for (int i = 1; i <= 3; ++i) {
      out << "reservoir:" << x << ',' << i << ',' << ledger.Q_boundary(x, i);
      tail(tracker ? tracker->Q_boundary_drift(x, i) : 0.0,
           tracker ? tracker->Q_boundary_qv(x, i) : 0.0);
    }
}

}  // namespace bdcp
