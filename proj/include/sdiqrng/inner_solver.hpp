// Copyright 2026 The sdiqrng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SDIQRNG_INNER_SOLVER_HPP
#define SDIQRNG_INNER_SOLVER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "sdiqrng/adversary.hpp"
#include "sdiqrng/bloch.hpp"
#include "sdiqrng/constraints.hpp"

/// Exact minimization over the classical-preprocessing weights for fixed
/// state and basis angles.
///
/// For fixed angles every success probability is affine in (p_z, q_z0) with
/// q_z1 = 1 - p_z - q_z0, and the constraints never couple the two settings
/// except through one linear sum in average mode. Each setting's feasible set
/// is therefore a convex polygon inside the unit triangle, obtained by
/// half-plane clipping, and the aggregate min-entropy is minimized at one of
/// its vertices.
namespace sdiqrng::detail {

struct Vec2 {
    double p = 0;
    double q = 0;
};

/// Convex polygon in the (p, q0) plane.
struct Polygon {
    std::array<Vec2, 32> v{};
    int n = 0;

    static Polygon unit_triangle() {
        Polygon t;
        t.v[0] = {0, 0};
        t.v[1] = {1, 0};
        t.v[2] = {0, 1};
        t.n = 3;
        return t;
    }

    bool empty() const {
        return n == 0;
    }

    /// Keeps the part where a_p * p + a_q * q <= rhs.
    void clip(double a_p, double a_q, double rhs) {
        constexpr double kEps = 1e-13;
        if (n == 0) {
            return;
        }
        Polygon out;
        for (int i = 0; i < n; ++i) {
            const Vec2 &cur = v[i];
            const Vec2 &nxt = v[(i + 1) % n];
            double dc = a_p * cur.p + a_q * cur.q - rhs;
            double dn = a_p * nxt.p + a_q * nxt.q - rhs;
            bool cur_in = dc <= kEps;
            bool nxt_in = dn <= kEps;
            if (cur_in) {
                out.v[out.n++] = cur;
            }
            if (cur_in != nxt_in && out.n < 32) {
                double t = std::clamp(dc / (dc - dn), 0.0, 1.0);
                out.v[out.n++] = {cur.p + t * (nxt.p - cur.p), cur.q + t * (nxt.q - cur.q)};
            }
            if (out.n >= 31) {
                break;
            }
        }
        *this = out;
    }

    /// Vertex with the smallest p.
    Vec2 min_p() const {
        Vec2 best = v[0];
        for (int i = 1; i < n; ++i) {
            if (v[i].p < best.p) {
                best = v[i];
            }
        }
        return best;
    }
};

/// Affine success probability a_p * p + a_q * q0 + a_c.
struct Affine {
    double a_p = 0;
    double a_q = 0;
    double a_c = 0;

    double at(Vec2 u) const {
        return a_p * u.p + a_q * u.q + a_c;
    }
};

/// Half-plane a_p * p + a_q * q <= rhs.
struct HalfPlane {
    double a_p = 0;
    double a_q = 0;
    double rhs = 0;
};

struct ConstraintList {
    std::array<HalfPlane, 10> h{};
    int n = 0;

    void add_at_least(const Affine &s, double lo) {
        h[n++] = {-s.a_p, -s.a_q, s.a_c - lo};
    }
    void add_at_most(const Affine &s, double hi) {
        h[n++] = {s.a_p, s.a_q, hi - s.a_c};
    }

    Polygon apply(double relax = 0) const {
        Polygon poly = Polygon::unit_triangle();
        for (int i = 0; i < n && !poly.empty(); ++i) {
            poly.clip(h[i].a_p, h[i].a_q, h[i].rhs + relax);
        }
        return poly;
    }

    /// Smallest uniform relaxation under which the constraints become
    /// satisfiable inside the triangle.
    double min_violation() const {
        if (!apply().empty()) {
            return 0;
        }
        double lo = 0;
        double hi = 1;
        for (int it = 0; it < 28; ++it) {
            double mid = 0.5 * (lo + hi);
            if (apply(mid).empty()) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return hi;
    }
};

struct InnerSolution {
    bool feasible = false;
    /// Aggregate min-entropy at the optimum (feasible only).
    double value = 0;
    /// Minimal constraint violation (infeasible only).
    double violation = 0;
    std::array<Vec2, 2> weights{};
    /// Setting that attains the worst-event minimum.
    int binding_setting = 0;
};

/// Angles of the 4 states followed by the 2 basis angles.
using AngleVector = std::array<double, 6>;

class InnerSolver {
   public:
    InnerSolver(const ConstraintSet &constraints, Aggregate aggregate, double entropy_cap)
        : constraints_(constraints), aggregate_(aggregate), cap_(entropy_cap) {
    }

    double entropy_cap() const {
        return cap_;
    }

    InnerSolution solve(const AngleVector &angles) const {
        Setup s = setup(angles);
        InnerSolution sol;
        switch (constraints_.mode) {
            case IndicatorMode::Vector:
                sol = solve_vector(s);
                break;
            case IndicatorMode::WorstCase:
                sol = solve_worst_case(s);
                break;
            default:
                sol = solve_average(s);
                break;
        }
        if (!sol.feasible) {
            // The violation is flat wherever the classical branch alone sets
            // it; a small pull toward larger overlaps breaks the tie.
            double shortfall = 0;
            for (unsigned c = 0; c < 8; ++c) {
                shortfall += std::max(0.0, lower_bound(c) - s.overlap[c]);
            }
            sol.violation += 1e-6 * shortfall;
        }
        return sol;
    }

    /// Lemma-family devices for the given angles and inner weights.
    static AdversaryParams to_params(const AngleVector &angles, const std::array<Vec2, 2> &weights) {
        AdversaryParams a;
        for (unsigned x = 0; x < 4; ++x) {
            a.states[x] = EquatorialState(angles[x]);
        }
        for (int z = 0; z < 2; ++z) {
            double p = std::clamp(weights[z].p, 0.0, 1.0);
            double q0 = std::clamp(weights[z].q, 0.0, 1.0 - p);
            double q1 = std::max(0.0, 1.0 - p - q0);
            a.measurements[z] = LemmaStrategy(q0, q1, MeasurementBasis(angles[4 + z]));
        }
        return a;
    }

   private:
    struct Setup {
        std::array<Affine, 8> success{};
        /// Per-event entropy per unit of p_z, capped.
        std::array<double, 8> entropy_rate{};
        std::array<double, 2> min_rate{};
        std::array<double, 2> sum_rate{};
        std::array<double, 8> overlap{};
    };

    double lower_bound(unsigned cell) const {
        return constraints_.mode == IndicatorMode::Vector ? constraints_.cells[cell].lo : constraints_.scalar_bound().lo;
    }

    Setup setup(const AngleVector &angles) const {
        Setup s;
        s.min_rate = {cap_, cap_};
        for (unsigned x = 0; x < 4; ++x) {
            for (int z = 0; z < 2; ++z) {
                int t = Input(x).bit(z);
                double target = angles[4 + z] + (t ? std::numbers::pi : 0.0);
                double o = overlap(angles[x], target);
                unsigned c = cell_index(x, z);
                s.overlap[c] = o;
                s.success[c] = t == 0 ? Affine{o, 1, 0} : Affine{o - 1, -1, 1};
                double rate = o > 0 ? std::min(cap_, -std::log2(o)) : cap_;
                rate = std::max(rate, 0.0);
                s.entropy_rate[c] = rate;
                s.min_rate[z] = std::min(s.min_rate[z], rate);
                s.sum_rate[z] += rate;
            }
        }
        return s;
    }

    /// Combines per-setting feasible polygons into the aggregate optimum.
    InnerSolution combine(const Setup &s, const Polygon &p0, const Polygon &p1) const {
        InnerSolution sol;
        sol.feasible = true;
        sol.weights = {p0.min_p(), p1.min_p()};
        if (aggregate_ == Aggregate::WorstEvent) {
            double v0 = sol.weights[0].p * s.min_rate[0];
            double v1 = sol.weights[1].p * s.min_rate[1];
            sol.binding_setting = v1 < v0 ? 1 : 0;
            sol.value = std::min(v0, v1);
        } else {
            sol.value = (sol.weights[0].p * s.sum_rate[0] + sol.weights[1].p * s.sum_rate[1]) / 8;
        }
        return sol;
    }

    InnerSolution solve_vector(const Setup &s) const {
        std::array<ConstraintList, 2> lists{};
        for (unsigned c = 0; c < 8; ++c) {
            auto &l = lists[c % 2];
            l.add_at_least(s.success[c], constraints_.cells[c].lo);
            l.add_at_most(s.success[c], constraints_.cells[c].hi);
        }
        Polygon p0 = lists[0].apply();
        Polygon p1 = lists[1].apply();
        if (p0.empty() || p1.empty()) {
            InnerSolution sol;
            sol.violation = lists[0].min_violation() + lists[1].min_violation();
            return sol;
        }
        return combine(s, p0, p1);
    }

    InnerSolution solve_worst_case(const Setup &s) const {
        Bound b = constraints_.scalar_bound();
        std::array<ConstraintList, 2> base{};
        for (unsigned c = 0; c < 8; ++c) {
            base[c % 2].add_at_least(s.success[c], b.lo);
        }
        std::array<Polygon, 2> base_poly = {base[0].apply(), base[1].apply()};
        if (base_poly[0].empty() || base_poly[1].empty()) {
            InnerSolution sol;
            sol.violation = base[0].min_violation() + base[1].min_violation();
            return sol;
        }
        InnerSolution best;
        bool any = false;
        double closest = std::numeric_limits<double>::infinity();
        // Some event must sit at or below the upper end; try each.
        for (unsigned c = 0; c < 8; ++c) {
            int z = static_cast<int>(c % 2);
            const Affine &e = s.success[c];
            Polygon top = base_poly[z];
            top.clip(e.a_p, e.a_q, b.hi - e.a_c);
            if (top.empty()) {
                double lowest = e.at(base_poly[z].v[0]);
                for (int i = 1; i < base_poly[z].n; ++i) {
                    lowest = std::min(lowest, e.at(base_poly[z].v[i]));
                }
                closest = std::min(closest, lowest - b.hi);
                continue;
            }
            InnerSolution sol = z == 0 ? combine(s, top, base_poly[1]) : combine(s, base_poly[0], top);
            if (!any || sol.value < best.value) {
                best = sol;
                any = true;
            }
        }
        if (!any) {
            best.violation = std::max(closest, 1e-12);
        }
        return best;
    }

    InnerSolution solve_average(const Setup &s) const {
        Bound b = constraints_.scalar_bound();
        double lo_sum = 8 * b.lo;
        double hi_sum = 8 * b.hi;
        // Sum of the 4 success probabilities of setting z, affine in (p, q0).
        std::array<Affine, 2> sum{};
        for (unsigned c = 0; c < 8; ++c) {
            Affine &a = sum[c % 2];
            a.a_p += s.success[c].a_p;
            a.a_q += s.success[c].a_q;
            a.a_c += s.success[c].a_c;
        }
        static constexpr std::array<Vec2, 3> corners{{{0, 0}, {1, 0}, {0, 1}}};
        std::array<double, 2> smin{}, smax{};
        for (int z = 0; z < 2; ++z) {
            smin[z] = smax[z] = sum[z].at(corners[0]);
            for (const auto &v : corners) {
                smin[z] = std::min(smin[z], sum[z].at(v));
                smax[z] = std::max(smax[z], sum[z].at(v));
            }
        }
        double gap = std::max({0.0, lo_sum - (smax[0] + smax[1]), (smin[0] + smin[1]) - hi_sum});
        if (gap > 0) {
            InnerSolution sol;
            sol.violation = gap / 8;
            return sol;
        }
        if (aggregate_ == Aggregate::WorstEvent) {
            return average_worst_event(s, sum, smin, smax, lo_sum, hi_sum);
        }
        return average_uniform(s, sum, lo_sum, hi_sum);
    }

    InnerSolution average_worst_event(const Setup &s, const std::array<Affine, 2> &sum,
                                      const std::array<double, 2> &smin, const std::array<double, 2> &smax,
                                      double lo_sum, double hi_sum) const {
        InnerSolution best;
        bool any = false;
        for (int z = 0; z < 2; ++z) {
            int o = 1 - z;
            ConstraintList own;
            own.add_at_least(sum[z], lo_sum - smax[o]);
            own.add_at_most(sum[z], hi_sum - smin[o]);
            Polygon poly = own.apply();
            if (poly.empty()) {
                continue;
            }
            Vec2 u = poly.min_p();
            double su = sum[z].at(u);
            ConstraintList rest;
            rest.add_at_least(sum[o], lo_sum - su);
            rest.add_at_most(sum[o], hi_sum - su);
            Polygon other = rest.apply();
            if (other.empty()) {
                continue;
            }
            InnerSolution sol;
            sol.feasible = true;
            sol.value = u.p * s.min_rate[z];
            sol.binding_setting = z;
            sol.weights[z] = u;
            sol.weights[o] = other.min_p();
            if (!any || sol.value < best.value) {
                best = sol;
                any = true;
            }
        }
        if (!any) {
            best.violation = 1e-12;
        }
        return best;
    }

    /// Vertex enumeration of (triangle x triangle) cut by the slab on the
    /// summed success probability.
    InnerSolution average_uniform(const Setup &s, const std::array<Affine, 2> &sum, double lo_sum,
                                  double hi_sum) const {
        static constexpr std::array<Vec2, 3> corners{{{0, 0}, {1, 0}, {0, 1}}};
        constexpr double kEps = 1e-13;
        InnerSolution best;
        auto consider = [&](Vec2 u0, Vec2 u1) {
            double total = sum[0].at(u0) + sum[1].at(u1);
            if (total < lo_sum - kEps || total > hi_sum + kEps) {
                return;
            }
            double value = (u0.p * s.sum_rate[0] + u1.p * s.sum_rate[1]) / 8;
            if (!best.feasible || value < best.value) {
                best.feasible = true;
                best.value = value;
                best.weights = {u0, u1};
            }
        };
        for (const auto &a : corners) {
            for (const auto &b : corners) {
                consider(a, b);
            }
        }
        // A vertex of one triangle paired with the point on an edge of the
        // other where the sum hits a slab face.
        for (int z = 0; z < 2; ++z) {
            int o = 1 - z;
            for (const auto &fixed : corners) {
                double s_fixed = sum[z].at(fixed);
                for (int e = 0; e < 3; ++e) {
                    Vec2 a = corners[e];
                    Vec2 b = corners[(e + 1) % 3];
                    double sa = sum[o].at(a);
                    double sb = sum[o].at(b);
                    if (sa == sb) {
                        continue;
                    }
                    for (double face : {lo_sum, hi_sum}) {
                        double t = (face - s_fixed - sa) / (sb - sa);
                        if (t < -kEps || t > 1 + kEps) {
                            continue;
                        }
                        t = std::clamp(t, 0.0, 1.0);
                        Vec2 point{a.p + t * (b.p - a.p), a.q + t * (b.q - a.q)};
                        if (z == 0) {
                            consider(fixed, point);
                        } else {
                            consider(point, fixed);
                        }
                    }
                }
            }
        }
        if (!best.feasible) {
            best.violation = 1e-12;
        }
        return best;
    }

    ConstraintSet constraints_;
    Aggregate aggregate_;
    double cap_;
};

}  // namespace sdiqrng::detail

#endif
