#pragma once

// Receiver-side pulse chasing: how fast receive beams must be switched to
// follow a pulse, how pulse-volume corners inside the blanking region are
// moved onto its boundary, which face of a four-panel array should track
// the pulse, and how many receive-beam grid cells the pulse occupies.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "core_geometry.hpp"
#include "surfaces.hpp"

namespace bistatic {

// Unit-folding factor of the switching-rate formula below: distances in km,
// beamwidth in degrees, result in beams per microsecond.
inline constexpr double kBeamSwitchFactor = 17.2;

// Beams per microsecond crossed by the receive boresight while it follows a
// pulse at range r_t and azimuth phi_t from the transmitter (horizontal
// plane). Odd in phi_t; callers that want a magnitude take |rate|.
inline double beam_switch_rate(double l_km, double r_t_km, double phi_t,
                               double bw_r_az_deg) {
    if (!(l_km > 0.0) || !(r_t_km > 0.0))
        throw std::domain_error("beam_switch_rate: distances must be positive");
    if (!(bw_r_az_deg > 0.0))
        throw std::domain_error("beam_switch_rate: beamwidth must be positive");
    const double sy = r_t_km * std::sin(phi_t);
    const double cx = l_km - r_t_km * std::cos(phi_t);
    // The bracket is the squared distance from the pulse to the receiver.
    return kBeamSwitchFactor * l_km * std::sin(phi_t) /
           (bw_r_az_deg * (sy * sy + cx * cx));
}

// Thrown when no single array face can see the whole pulse volume.
struct split_coverage_error : std::runtime_error {
    split_coverage_error()
        : std::runtime_error("pulse volume spans more than one array face") {}
};

namespace detail {

// The 8 corners form a combinatorial cube over three half-axis bits:
// radial (trailing/leading face), azimuth side, elevation side. Two corners
// are edge-adjacent exactly when their bit triples differ in one position.
inline int radial_bit(int i) { return i >> 2; }
inline int azimuth_bit(int i) { return (i % 4 == 1 || i % 4 == 2) ? 1 : 0; }
inline int elevation_bit(int i) { return (i % 4 >= 2) ? 1 : 0; }

inline int corner_index(int radial, int azimuth, int elevation) {
    static constexpr int j_of[2][2] = {{0, 3}, {1, 2}};  // [azimuth][elevation]
    return 4 * radial + j_of[azimuth][elevation];
}

inline int flip_radial(int i) {
    return corner_index(1 - radial_bit(i), azimuth_bit(i), elevation_bit(i));
}
inline int flip_azimuth(int i) {
    return corner_index(radial_bit(i), 1 - azimuth_bit(i), elevation_bit(i));
}
inline int flip_elevation(int i) {
    return corner_index(radial_bit(i), azimuth_bit(i), 1 - elevation_bit(i));
}

inline int bit_distance(int i, int j) {
    return (radial_bit(i) != radial_bit(j)) + (azimuth_bit(i) != azimuth_bit(j)) +
           (elevation_bit(i) != elevation_bit(j));
}

// Smallest s >= -1e-12 with p + s*d on the surface (x/a)^2 + (y^2+z^2)/b^2 = 1
// (the blanking ellipsoid in its principal frame). From an interior start the
// forward root always exists.
inline double forward_ellipsoid_intersection(const Vec3& p, const Vec3& d, double a,
                                             double b) {
    const double wa = 1.0 / (a * a);
    const double wb = 1.0 / (b * b);
    const double qa = wa * d.x * d.x + wb * (d.y * d.y + d.z * d.z);
    const double qb = 2.0 * (wa * p.x * d.x + wb * (p.y * d.y + p.z * d.z));
    const double qc = wa * p.x * p.x + wb * (p.y * p.y + p.z * p.z) - 1.0;
    double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) {
        if (disc < -1e-12 * qb * qb)
            throw std::domain_error("vertex relocation: translation line misses the surface");
        disc = 0.0;
    }
    const double sq = std::sqrt(disc);
    // Numerically stable pair of roots.
    const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
    const double r1 = q / qa;
    const double r2 = (q == 0.0) ? r1 : qc / q;
    const double lo = std::min(r1, r2);
    const double hi = std::max(r1, r2);
    const double eps = -1e-12;
    if (lo >= eps) return lo;
    if (hi >= eps) return hi;
    throw std::domain_error("vertex relocation: surface lies behind the translation line");
}

}  // namespace detail

enum class RelocationCase { kNone, kOne, kTwo, kThree, kFour };

struct RelocationReport {
    int moved_count = 0;
    std::array<int, 4> moved_indices{};  // first moved_count entries are valid
    RelocationCase case_tag = RelocationCase::kNone;
    PulseBox new_box{};
};

// Moves corners that fall inside the blanking region onto its boundary so
// the receiver only ever points at observable volume. The translation
// direction depends on how many corners are affected:
//   1 corner:  along the diagonal of its constant-elevation face;
//   2 corners (edge-adjacent): each along the diagonal of the box face
//              perpendicular to the shared edge, toward the interior;
//   3 corners (an L of edges): all along the direction from the middle
//              corner to its unaffected neighbour;
//   4 corners (one face): each along its edge toward the opposite face,
//              compressing the box.
// Each moved corner lands on the nearest boundary intersection along its
// line. The representative pulse centre may be supplied explicitly (the
// corner centroid sits behind the true centre by half a pulse length);
// it must be outside the blanking region.
inline RelocationReport relocate_vertices(const PulseBox& box, const BistaticGeometry& geom,
                                          double tau_p,
                                          const std::optional<Vec3>& center = std::nullopt) {
    const ProlateEllipsoid ell = eclipse_ellipsoid(geom, tau_p);

    RelocationReport rep;
    rep.new_box = box;

    int eclipsed[8];
    int k = 0;
    for (int i = 0; i < 8; ++i)
        if (ell.contains(box.vertices[static_cast<std::size_t>(i)])) eclipsed[k++] = i;
    if (k == 0) return rep;
    if (k > 4)
        throw std::domain_error("vertex relocation: more than four corners in the blanking region");

    Vec3 ctr;
    if (center) {
        ctr = *center;
    } else {
        ctr = {0.0, 0.0, 0.0};
        for (const Vec3& v : box.vertices) ctr = ctr + v;
        ctr = (1.0 / 8.0) * ctr;
    }
    if (ell.contains(ctr))
        throw std::domain_error("vertex relocation: pulse centre inside the blanking region");

    const auto vertex = [&box](int i) -> const Vec3& {
        return box.vertices[static_cast<std::size_t>(i)];
    };
    const auto is_hit = [&](int i) {
        for (int n = 0; n < k; ++n)
            if (eclipsed[n] == i) return true;
        return false;
    };

    // Translation direction per affected corner.
    std::array<Vec3, 4> dir{};
    switch (k) {
        case 1: {
            const int i = eclipsed[0];
            const int opp = detail::corner_index(1 - detail::radial_bit(i),
                                                 1 - detail::azimuth_bit(i),
                                                 detail::elevation_bit(i));
            dir[0] = vertex(opp) - vertex(i);
            rep.case_tag = RelocationCase::kOne;
            break;
        }
        case 2: {
            const int i = eclipsed[0];
            const int j = eclipsed[1];
            if (detail::bit_distance(i, j) != 1)
                throw std::domain_error("vertex relocation: two affected corners do not share an edge");
            for (int n = 0; n < 2; ++n) {
                const int v = eclipsed[n];
                int target;
                if (detail::radial_bit(i) != detail::radial_bit(j))
                    target = detail::flip_elevation(detail::flip_azimuth(v));
                else if (detail::azimuth_bit(i) != detail::azimuth_bit(j))
                    target = detail::flip_elevation(detail::flip_radial(v));
                else
                    target = detail::flip_azimuth(detail::flip_radial(v));
                dir[static_cast<std::size_t>(n)] = vertex(target) - vertex(v);
            }
            rep.case_tag = RelocationCase::kTwo;
            break;
        }
        case 3: {
            // The middle corner of the L has both of its affected peers as
            // edge neighbours; the direction points at its free neighbour.
            int middle = -1;
            for (int n = 0; n < 3; ++n) {
                int adjacent = 0;
                for (int m = 0; m < 3; ++m)
                    if (m != n && detail::bit_distance(eclipsed[n], eclipsed[m]) == 1) ++adjacent;
                if (adjacent == 2) {
                    if (middle >= 0)
                        throw std::domain_error("vertex relocation: ambiguous three-corner pattern");
                    middle = eclipsed[n];
                }
            }
            if (middle < 0)
                throw std::domain_error("vertex relocation: three affected corners form no path");
            const int nbrs[3] = {detail::flip_radial(middle), detail::flip_azimuth(middle),
                                 detail::flip_elevation(middle)};
            int free_nbr = -1;
            for (int nb : nbrs)
                if (!is_hit(nb)) free_nbr = nb;
            if (free_nbr < 0)
                throw std::domain_error("vertex relocation: middle corner has no free neighbour");
            const Vec3 d = vertex(free_nbr) - vertex(middle);
            dir[0] = dir[1] = dir[2] = d;
            rep.case_tag = RelocationCase::kThree;
            break;
        }
        default: {
            // Four corners must form one box face (a constant bit).
            bool same_radial = true, same_azimuth = true, same_elevation = true;
            for (int n = 1; n < 4; ++n) {
                same_radial &= detail::radial_bit(eclipsed[n]) == detail::radial_bit(eclipsed[0]);
                same_azimuth &= detail::azimuth_bit(eclipsed[n]) == detail::azimuth_bit(eclipsed[0]);
                same_elevation &=
                    detail::elevation_bit(eclipsed[n]) == detail::elevation_bit(eclipsed[0]);
            }
            int (*flip)(int) = nullptr;
            if (same_radial)
                flip = detail::flip_radial;
            else if (same_azimuth)
                flip = detail::flip_azimuth;
            else if (same_elevation)
                flip = detail::flip_elevation;
            else
                throw std::domain_error("vertex relocation: four affected corners are not one face");
            for (int n = 0; n < 4; ++n)
                dir[static_cast<std::size_t>(n)] =
                    vertex(flip(eclipsed[n])) - vertex(eclipsed[n]);
            rep.case_tag = RelocationCase::kFour;
            break;
        }
    }

    const double a = ell.semi_major();
    const double b = ell.semi_minor();
    const Vec3 f1 = geom.tx_position();
    const Vec3 f2 = geom.rx_position();
    for (int n = 0; n < k; ++n) {
        const int i = eclipsed[n];
        const Vec3& p = vertex(i);
        const double len = norm(dir[static_cast<std::size_t>(n)]);
        if (!(len > 0.0))
            throw std::domain_error("vertex relocation: degenerate translation direction");
        const Vec3 d = (1.0 / len) * dir[static_cast<std::size_t>(n)];
        double s = detail::forward_ellipsoid_intersection(p, d, a, b);
        // Polish on the range-sum equation itself.
        for (int it = 0; it < 2; ++it) {
            const Vec3 q = p + s * d;
            const double n1 = norm(q - f1);
            const double n2 = norm(q - f2);
            const double f = n1 + n2 - ell.range_sum;
            const double df = dot(d, (1.0 / n1) * (q - f1) + (1.0 / n2) * (q - f2));
            if (df != 0.0) s -= f / df;
        }
        rep.new_box.vertices[static_cast<std::size_t>(i)] = p + s * d;
        rep.moved_indices[static_cast<std::size_t>(n)] = i;
    }
    rep.moved_count = k;
    std::sort(rep.moved_indices.begin(), rep.moved_indices.begin() + k);
    return rep;
}

// The receive array has four identical faces, boresights a quarter turn
// apart around +z; face 0 looks along +x. Returns the face whose worst
// corner direction cosine (w, depth in front of the face) is largest;
// ties take the smallest index. Throws split_coverage_error when even the
// best face has a corner at or behind its plane.
inline int select_panel(const PulseBox& box, const BistaticGeometry& geom) {
    const Vec3 rx = geom.rx_position();
    double best = -2.0;
    int best_k = 0;
    for (int kq = 0; kq < 4; ++kq) {
        double wmin = 2.0;
        for (const Vec3& v : box.vertices) {
            const Vec3 q = rotate_about_z(v - rx, (4 - kq) % 4);
            wmin = std::min(wmin, to_uvw(q).w);
        }
        if (wmin > best) {
            best = wmin;
            best_k = kq;
        }
    }
    if (best <= 0.0) throw split_coverage_error();
    return best_k;
}

namespace detail {

struct Uv {
    double u = 0.0;
    double v = 0.0;
};

// Direction cosines of all corners on the selected single face.
struct PanelProjection {
    int panel = 0;
    std::array<Uv, 8> uv{};
};

inline Uv project_on_panel(const Vec3& p_rel_rx, int panel) {
    const UvwPoint q = to_uvw(rotate_about_z(p_rel_rx, (4 - panel) % 4));
    return {q.u, q.v};
}

inline PanelProjection project_to_panel(const PulseBox& box, const BistaticGeometry& geom) {
    PanelProjection out;
    out.panel = select_panel(box, geom);
    const Vec3 rx = geom.rx_position();
    for (std::size_t i = 0; i < 8; ++i)
        out.uv[i] = project_on_panel(box.vertices[i] - rx, out.panel);
    return out;
}

// Per-face corner subsets (strictly in front of each face) for pulses no
// single face can hold.
inline std::array<std::vector<Uv>, 4> project_panel_subsets(const PulseBox& box,
                                                            const BistaticGeometry& geom) {
    std::array<std::vector<Uv>, 4> out;
    const Vec3 rx = geom.rx_position();
    for (int panel = 0; panel < 4; ++panel) {
        for (const Vec3& v : box.vertices) {
            const UvwPoint q = to_uvw(rotate_about_z(v - rx, (4 - panel) % 4));
            if (q.w > 0.0) out[static_cast<std::size_t>(panel)].push_back({q.u, q.v});
        }
    }
    return out;
}

// Convex hull (monotone chain); collinear points dropped. Works for any
// point count; 1- and 2-point hulls come back as-is.
inline std::vector<Uv> convex_hull(std::vector<Uv> pts) {
    std::sort(pts.begin(), pts.end(), [](const Uv& a, const Uv& b) {
        return a.u < b.u || (a.u == b.u && a.v < b.v);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Uv& a, const Uv& b) { return a.u == b.u && a.v == b.v; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    const auto cross = [](const Uv& o, const Uv& a, const Uv& b) {
        return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
    };
    std::vector<Uv> hull(2 * n);
    std::size_t h = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (h >= 2 && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0.0) --h;
        hull[h++] = pts[i];
    }
    const std::size_t lower = h + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (h >= lower && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0.0) --h;
        hull[h++] = pts[i];
    }
    hull.resize(h - 1);
    return hull;
}

// Separating-axis data for one convex polygon: candidate axes (edge normals)
// with the polygon's projection interval on each, plus its bounding box.
struct HullSat {
    std::vector<Uv> hull;
    std::vector<Uv> axes;
    std::vector<std::pair<double, double>> hull_interval;
    double umin = 0.0, umax = 0.0, vmin = 0.0, vmax = 0.0;
};

inline HullSat build_hull_sat(const Uv* pts, std::size_t n) {
    HullSat s;
    s.hull = convex_hull(std::vector<Uv>(pts, pts + n));
    s.umin = s.vmin = std::numeric_limits<double>::infinity();
    s.umax = s.vmax = -std::numeric_limits<double>::infinity();
    for (const Uv& p : s.hull) {
        s.umin = std::min(s.umin, p.u);
        s.umax = std::max(s.umax, p.u);
        s.vmin = std::min(s.vmin, p.v);
        s.vmax = std::max(s.vmax, p.v);
    }
    const std::size_t h = s.hull.size();
    if (h >= 2) {
        const std::size_t edges = (h == 2) ? 1 : h;
        for (std::size_t i = 0; i < edges; ++i) {
            const Uv& a = s.hull[i];
            const Uv& b = s.hull[(i + 1) % h];
            const Uv axis{-(b.v - a.v), b.u - a.u};
            if (axis.u == 0.0 && axis.v == 0.0) continue;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const Uv& p : s.hull) {
                const double d = axis.u * p.u + axis.v * p.v;
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            s.axes.push_back(axis);
            s.hull_interval.emplace_back(lo, hi);
        }
    }
    return s;
}

// Closed-set overlap test between the polygon and an axis-aligned rectangle;
// boundary contact counts as overlap.
inline bool hull_intersects_rect(const HullSat& s, double ru0, double ru1, double rv0,
                                 double rv1) {
    if (ru0 > s.umax || ru1 < s.umin || rv0 > s.vmax || rv1 < s.vmin) return false;
    for (std::size_t i = 0; i < s.axes.size(); ++i) {
        const Uv& ax = s.axes[i];
        const double lo = (ax.u >= 0.0 ? ax.u * ru0 : ax.u * ru1) +
                          (ax.v >= 0.0 ? ax.v * rv0 : ax.v * rv1);
        const double hi = (ax.u >= 0.0 ? ax.u * ru1 : ax.u * ru0) +
                          (ax.v >= 0.0 ? ax.v * rv1 : ax.v * rv0);
        if (lo > s.hull_interval[i].second || hi < s.hull_interval[i].first) return false;
    }
    return true;
}

// Visits every active cell of a grid anchored at (u0, v0): cell (iu, iv)
// covers [u0+iu*du, u0+(iu+1)*du] x [v0+iv*dv, v0+(iv+1)*dv] and is active
// when the corner hull touches it. The anchor must not exceed the corner
// minimum, so indices are never negative.
template <class Visit>
inline void for_each_active_cell(const Uv* pts, std::size_t n, double du, double dv,
                                 double u0, double v0, Visit&& visit) {
    if (!(du > 0.0) || !(dv > 0.0))
        throw std::domain_error("beam grid: cell sizes must be positive");
    const HullSat sat = build_hull_sat(pts, n);
    const int iu_lo = std::max(0, static_cast<int>(std::floor((sat.umin - u0) / du)));
    const int iv_lo = std::max(0, static_cast<int>(std::floor((sat.vmin - v0) / dv)));
    const int iu_hi = static_cast<int>(std::floor((sat.umax - u0) / du)) + 1;
    const int iv_hi = static_cast<int>(std::floor((sat.vmax - v0) / dv)) + 1;
    for (int iu = iu_lo; iu <= iu_hi; ++iu) {
        const double ru0 = u0 + iu * du;
        for (int iv = iv_lo; iv <= iv_hi; ++iv) {
            const double rv0 = v0 + iv * dv;
            if (hull_intersects_rect(sat, ru0, ru0 + du, rv0, rv0 + dv))
                visit(iu, iv);
        }
    }
}

}  // namespace detail

// One face's receive-beam raster: cells of size (du, dv) in direction
// cosines, anchored at the projected corner minimum.
struct BeamGrid {
    double u_origin = 0.0;
    double v_origin = 0.0;
    double du = 0.0;
    double dv = 0.0;
    std::vector<std::pair<int, int>> active_cells;
};

namespace detail {

inline BeamGrid count_cells(const Uv* pts, std::size_t n, double du, double dv) {
    BeamGrid grid;
    grid.du = du;
    grid.dv = dv;
    grid.u_origin = std::numeric_limits<double>::infinity();
    grid.v_origin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        grid.u_origin = std::min(grid.u_origin, pts[i].u);
        grid.v_origin = std::min(grid.v_origin, pts[i].v);
    }
    for_each_active_cell(pts, n, du, dv, grid.u_origin, grid.v_origin,
                         [&grid](int iu, int iv) { grid.active_cells.emplace_back(iu, iv); });
    return grid;
}

}  // namespace detail

struct BeamCount {
    std::size_t count = 0;
    BeamGrid grid;       // for split pulses: the face contributing most cells
    int panel = 0;       // likewise
    bool split = false;  // true when counted as a per-face sum
};

// Number of receive beams needed to cover the pulse volume: corners are
// projected onto the tracking face, and a beam cell counts when the corner
// hull touches its rectangle. A pulse no single face can hold is counted
// per face on the corners in front of each face, and the counts summed.
inline BeamCount count_active_beams(const PulseBox& box, const BistaticGeometry& geom,
                                    const BeamSpec& beams) {
    const double du = std::sin(beams.bw_r_az);
    const double dv = std::sin(beams.bw_r_el);
    if (!(du > 0.0) || !(dv > 0.0))
        throw std::domain_error("count_active_beams: receive beamwidths must be in (0, pi)");
    BeamCount out;
    try {
        const detail::PanelProjection proj = detail::project_to_panel(box, geom);
        out.grid = detail::count_cells(proj.uv.data(), proj.uv.size(), du, dv);
        out.count = out.grid.active_cells.size();
        out.panel = proj.panel;
        return out;
    } catch (const split_coverage_error&) {
        out.split = true;
    }
    const auto subsets = detail::project_panel_subsets(box, geom);
    for (int panel = 0; panel < 4; ++panel) {
        const auto& pts = subsets[static_cast<std::size_t>(panel)];
        if (pts.empty()) continue;
        BeamGrid grid = detail::count_cells(pts.data(), pts.size(), du, dv);
        out.count += grid.active_cells.size();
        if (grid.active_cells.size() > out.grid.active_cells.size()) {
            out.grid = std::move(grid);
            out.panel = panel;
        }
    }
    return out;
}

}  // namespace bistatic
