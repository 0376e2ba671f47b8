#pragma once

// Reference computations written separately from the library, used as test oracles.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <algorithm>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "hvacmdp/enumerated.hpp"
#include "hvacmdp/policy.hpp"

namespace oracle {

// Fanger PMV in the layout of the reference listing that ships with ISO 7730 (Annex D).
// rh as a fraction; saturation pressure from the listing's exponential fit.
inline double iso_pmv(double ta, double tr, double vel, double rh, double met, double clo, double wme = 0.0) {
  const double pa = rh * 1000.0 * std::exp(16.6536 - 4030.183 / (ta + 235.0));
  const double icl = 0.155 * clo;
  const double m = met * 58.15;
  const double w = wme * 58.15;
  const double mw = m - w;
  const double fcl = icl <= 0.078 ? 1.0 + 1.29 * icl : 1.05 + 0.645 * icl;
  const double hcf = 12.1 * std::sqrt(vel);
  const double taa = ta + 273.0;
  const double tra = tr + 273.0;
  const double tcla = taa + (35.5 - ta) / (3.5 * icl + 0.1);
  const double p1 = icl * fcl;
  const double p2 = p1 * 3.96;
  const double p3 = p1 * 100.0;
  const double p4 = p1 * taa;
  const double p5 = 308.7 - 0.028 * mw + p2 * std::pow(tra / 100.0, 4);
  double xn = tcla / 100.0;
  double xf = tcla / 50.0;
  double hc = 0.0;
  int n = 0;
  do {
    xf = (xf + xn) / 2.0;
    const double hcn = 2.38 * std::pow(std::abs(100.0 * xf - taa), 0.25);
    hc = hcf > hcn ? hcf : hcn;
    xn = (p5 + p4 * hc - p2 * std::pow(xf, 4)) / (100.0 + p3 * hc);
    if (++n > 150) return std::numeric_limits<double>::quiet_NaN();
  } while (std::abs(xn - xf) > 0.00015);
  const double tcl = 100.0 * xn - 273.0;
  const double hl1 = 3.05 * 0.001 * (5733.0 - 6.99 * mw - pa);
  const double hl2 = mw > 58.15 ? 0.42 * (mw - 58.15) : 0.0;
  const double hl3 = 1.7 * 0.00001 * m * (5867.0 - pa);
  const double hl4 = 0.0014 * m * (34.0 - ta);
  const double hl5 = 3.96 * fcl * (std::pow(xn, 4) - std::pow(tra / 100.0, 4));
  const double hl6 = fcl * hc * (tcl - ta);
  const double ts = 0.303 * std::exp(-0.036 * m) + 0.028;
  return ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6);
}

// Dense action-probability table [t][s][a].
using ProbTable = std::vector<std::vector<std::vector<double>>>;

inline ProbTable probabilities(const hvacmdp::EnumeratedMdp& m, const hvacmdp::StochasticPolicy& p) {
  ProbTable out(m.n_stages, std::vector<std::vector<double>>(m.n_states, std::vector<double>(m.n_actions)));
  for (std::size_t t = 0; t < m.n_stages; ++t)
    for (std::size_t s = 0; s < m.n_states; ++s) {
      const auto row = p.row(t, s);
      double mass = 0.0;
      for (double x : row) mass += x;
      for (std::size_t a = 0; a < m.n_actions; ++a) out[t][s][a] = row[a] / mass;
    }
  return out;
}

// Expected total cost by pushing the state distribution forward stage by stage.
inline double forward_cost(const hvacmdp::EnumeratedMdp& m, const ProbTable& p) {
  std::vector<double> dist = m.initial;
  double j = 0.0;
  for (std::size_t t = 0; t < m.n_stages; ++t) {
    std::vector<double> next(m.n_states, 0.0);
    for (std::size_t s = 0; s < m.n_states; ++s) {
      if (dist[s] == 0.0) continue;
      for (std::size_t a = 0; a < m.n_actions; ++a) {
        const double w = dist[s] * p[t][s][a];
        j += w * m.r(t, s, a);
        for (const auto& tr : m.next(t, s, a)) next[tr.next] += w * tr.prob;
      }
    }
    dist = std::move(next);
  }
  return j;
}

inline double forward_cost(const hvacmdp::EnumeratedMdp& m, const hvacmdp::StochasticPolicy& p) {
  return forward_cost(m, probabilities(m, p));
}

// dJ/dsigma_t(s,a) by central differences on the unnormalized entry, the rest of the row held fixed.
inline double fd_gradient(const hvacmdp::EnumeratedMdp& m, const hvacmdp::StochasticPolicy& p, std::size_t t,
                          std::size_t s, std::size_t a, double h = 1e-6) {
  const auto row = p.row(t, s);
  auto cost_with = [&](double x) {
    ProbTable q = probabilities(m, p);
    auto r = row;
    r[a] = x;
    double mass = 0.0;
    for (double v : r) mass += v;
    for (std::size_t b = 0; b < r.size(); ++b) q[t][s][b] = r[b] / mass;
    return forward_cost(m, q);
  };
  return (cost_with(row[a] + h) - cost_with(row[a] - h)) / (2.0 * h);
}

// Optimal expected cost by backward induction over dense value vectors.
inline double optimal_value(const hvacmdp::EnumeratedMdp& m) {
  std::vector<double> v(m.n_states, 0.0);
  for (std::size_t t = m.n_stages; t-- > 0;) {
    std::vector<double> cur(m.n_states, std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < m.n_states; ++s)
      for (std::size_t a = 0; a < m.n_actions; ++a) {
        double q = m.r(t, s, a);
        for (const auto& tr : m.next(t, s, a)) q += tr.prob * v[tr.next];
        cur[s] = std::min(cur[s], q);
      }
    v = std::move(cur);
  }
  double j = 0.0;
  for (std::size_t s = 0; s < m.n_states; ++s) j += m.initial[s] * v[s];
  return j;
}

// Minimum over every deterministic Markov policy; feasible only for a handful of (t,s) pairs.
inline double brute_force_optimum(const hvacmdp::EnumeratedMdp& m) {
  const std::size_t cells = m.n_stages * m.n_states;
  std::vector<std::size_t> choice(cells, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    ProbTable p(m.n_stages, std::vector<std::vector<double>>(m.n_states, std::vector<double>(m.n_actions, 0.0)));
    for (std::size_t c = 0; c < cells; ++c) p[c / m.n_states][c % m.n_states][choice[c]] = 1.0;
    best = std::min(best, forward_cost(m, p));
    std::size_t k = 0;
    while (k < cells && ++choice[k] == m.n_actions) choice[k++] = 0;
    if (k == cells) break;
  }
  return best;
}

// Transition counts by a map keyed on (t, from, to), normalized per (t, from).
inline std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> count_transitions(
    const std::vector<std::vector<std::size_t>>& seqs) {
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> n;
  std::map<std::pair<std::size_t, std::size_t>, double> from;
  for (const auto& s : seqs)
    for (std::size_t t = 0; t + 1 < s.size(); ++t) {
      n[{t, s[t], s[t + 1]}] += 1.0;
      from[{t, s[t]}] += 1.0;
    }
  for (auto& [k, v] : n) v /= from[{std::get<0>(k), std::get<1>(k)}];
  return n;
}

}  // namespace oracle
