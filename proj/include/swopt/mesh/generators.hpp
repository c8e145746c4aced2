#pragma once
/**
 * @file generators.hpp
 * @brief scripted meshers for test and demo domains
 *
 * - structured rectangles and annuli
 * - the half-circle bay with a circular obstacle: the right half is
 *   triangulated by Bowyer-Watson on a graded point cloud and mirrored about
 *   x = 0, so the mesh is exactly mirror-symmetric
 */

#include "swopt/mesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <unordered_map>
#include <vector>

namespace swopt::meshgen {

/// tag for an outer boundary edge given its midpoint
using EdgeTagger = std::function<BoundaryTag(const Point&)>;

inline Mesh rectangle(double x0, double x1, double y0, double y1, int nx, int ny,
                      const EdgeTagger& tagger = [](const Point&) { return BoundaryTag::Shore; }) {
  std::vector<Point> v;
  v.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      v.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      // alternate the diagonal so the mesh has no preferred direction
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }
  std::vector<BoundaryEdge> be;
  auto add = [&](int a, int b) { be.push_back({{a, b}, tagger(0.5 * (v[a] + v[b]))}); };
  for (int i = 0; i < nx; ++i) {
    add(id(i, 0), id(i + 1, 0));
    add(id(i + 1, ny), id(i, ny));
  }
  for (int j = 0; j < ny; ++j) {
    add(id(nx, j), id(nx, j + 1));
    add(id(0, j + 1), id(0, j));
  }
  return Mesh(std::move(v), std::move(tris), be);
}

/**
 * @brief structured annulus between radii r_in and r_out around center
 *
 * Inner loop tagged Obstacle, outer loop tagged outer_tag. Rings are spaced
 * geometrically when graded is set (roughly square cells).
 */
inline Mesh annulus(const Point& center, double r_in, double r_out, int nr, int ntheta,
                    BoundaryTag outer_tag = BoundaryTag::OpenSea, bool graded = true) {
  std::vector<Point> v;
  std::vector<double> radii(nr + 1);
  for (int i = 0; i <= nr; ++i) {
    const double s = static_cast<double>(i) / nr;
    radii[i] = graded ? r_in * std::pow(r_out / r_in, s) : r_in + (r_out - r_in) * s;
  }
  radii.back() = r_out;
  for (int i = 0; i <= nr; ++i)
    for (int j = 0; j < ntheta; ++j) {
      const double th = 2.0 * std::numbers::pi * j / ntheta;
      v.push_back(center + radii[i] * Vec2(std::cos(th), std::sin(th)));
    }
  auto id = [ntheta](int i, int j) { return i * ntheta + (j % ntheta); };
  std::vector<std::array<int, 3>> tris;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < ntheta; ++j) {
      const int a = id(i, j), b = id(i, j + 1), c = id(i + 1, j + 1), d = id(i + 1, j);
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }
  std::vector<BoundaryEdge> be;
  for (int j = 0; j < ntheta; ++j) {
    be.push_back({{id(0, j + 1), id(0, j)}, BoundaryTag::Obstacle});
    be.push_back({{id(nr, j), id(nr, j + 1)}, outer_tag});
  }
  return Mesh(std::move(v), std::move(tris), be);
}

/// structured disk with a center vertex; all boundary edges tagged `tag`
inline Mesh disk(const Point& center, double radius, int nr, int ntheta0 = 6,
                 BoundaryTag tag = BoundaryTag::Shore) {
  // ring i has ntheta0 * i vertices so cells stay roughly equilateral
  std::vector<Point> v{center};
  std::vector<int> ring_start{0};
  for (int i = 1; i <= nr; ++i) {
    ring_start.push_back(static_cast<int>(v.size()));
    const int n = ntheta0 * i;
    const double r = radius * i / nr;
    for (int j = 0; j < n; ++j) {
      const double th = 2.0 * std::numbers::pi * j / n;
      v.push_back(center + r * Vec2(std::cos(th), std::sin(th)));
    }
  }
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < ntheta0; ++j) tris.push_back({0, 1 + j, 1 + (j + 1) % ntheta0});
  for (int i = 1; i < nr; ++i) {
    const int n_in = ntheta0 * i, n_out = ntheta0 * (i + 1);
    // merge the two rings by angle
    int a = 0, b = 0;
    while (a < n_in || b < n_out) {
      const double ta = 2.0 * std::numbers::pi * (a + 1) / n_in;
      const double tb = 2.0 * std::numbers::pi * (b + 1) / n_out;
      const int ia = ring_start[i] + a % n_in, ia1 = ring_start[i] + (a + 1) % n_in;
      const int ob = ring_start[i + 1] + b % n_out, ob1 = ring_start[i + 1] + (b + 1) % n_out;
      if (b < n_out && (a >= n_in || tb <= ta + 1e-12)) {
        tris.push_back({ia, ob, ob1});
        ++b;
      } else {
        tris.push_back({ia, ob, ia1});
        ++a;
      }
    }
  }
  std::vector<BoundaryEdge> be;
  const int n = ntheta0 * nr;
  for (int j = 0; j < n; ++j) be.push_back({{ring_start[nr] + j, ring_start[nr] + (j + 1) % n}, tag});
  return Mesh(std::move(v), std::move(tris), be);
}

/**
 * @brief remove the cells whose centroid satisfies `remove`
 *
 * Existing boundary edges keep their tags; edges exposed by the removal get
 * new_tag. Unused vertices are dropped (order of the survivors is kept).
 */
inline Mesh carve(const Mesh& mesh, const std::function<bool(const Point&)>& remove,
                  BoundaryTag new_tag = BoundaryTag::Obstacle) {
  std::vector<std::array<int, 3>> kept;
  std::vector<char> removed(mesh.num_cells(), 0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    removed[c] = remove(mesh.geometry().centroid[c]);
    if (!removed[c]) kept.push_back(mesh.triangle(int(c)));
  }
  std::vector<BoundaryEdge> be;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(int(f));
    if (face.is_boundary()) {
      if (!removed[face.left]) be.push_back({face.v, face.boundary_tag()});
    } else if (removed[face.left] != removed[face.right]) {
      // orient counter-clockwise in the surviving cell
      if (removed[face.right]) be.push_back({face.v, new_tag});
      else be.push_back({{face.v[1], face.v[0]}, new_tag});
    }
  }
  std::vector<int> id(mesh.num_vertices(), -1);
  for (const auto& t : kept)
    for (int v : t) id[v] = 0;
  std::vector<Point> pts;
  for (std::size_t v = 0; v < id.size(); ++v)
    if (id[v] == 0) {
      id[v] = int(pts.size());
      pts.push_back(mesh.vertex(int(v)));
    }
  for (auto& t : kept)
    for (int& v : t) v = id[v];
  for (auto& e : be)
    for (int& v : e.v) v = id[v];
  return Mesh(std::move(pts), std::move(kept), be);
}

namespace detail {

/// Bowyer-Watson Delaunay triangulation of a point set (no constraints)
inline std::vector<std::array<int, 3>> delaunay(const std::vector<Point>& pts) {
  const int n = static_cast<int>(pts.size());
  Point lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const Point mid = 0.5 * (lo + hi);
  std::vector<Point> all(pts);
  all.push_back(mid + Vec2(-20 * span, -10 * span));
  all.push_back(mid + Vec2(20 * span, -10 * span));
  all.push_back(mid + Vec2(0, 20 * span));

  struct Tri {
    std::array<int, 3> v;
    Point cc;
    double r2;
    bool alive;
  };
  auto make = [&](int a, int b, int c) {
    const Point& A = all[a];
    const Point& B = all[b];
    const Point& C = all[c];
    const long double ax = A.x(), ay = A.y(), bx = B.x(), by = B.y(), cx = C.x(), cy = C.y();
    const long double d = 2.0L * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    const long double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) +
                            (cx * cx + cy * cy) * (ay - by)) / d;
    const long double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) +
                            (cx * cx + cy * cy) * (bx - ax)) / d;
    const long double dx = ax - ux, dy = ay - uy;
    return Tri{{a, b, c}, Point(double(ux), double(uy)), double(dx * dx + dy * dy), true};
  };
  std::vector<Tri> tris{make(n, n + 1, n + 2)};
  for (int p = 0; p < n; ++p) {
    const Point& P = all[p];
    std::vector<std::array<int, 2>> edges;
    for (auto& t : tris) {
      if (!t.alive) continue;
      if ((P - t.cc).squaredNorm() < t.r2 * (1.0 - 1e-12)) {
        t.alive = false;
        for (int k = 0; k < 3; ++k) edges.push_back({t.v[k], t.v[(k + 1) % 3]});
      }
    }
    // boundary of the cavity: edges seen once
    std::vector<std::array<int, 2>> boundary;
    for (const auto& e : edges) {
      int count = 0;
      for (const auto& f : edges)
        if ((f[0] == e[0] && f[1] == e[1]) || (f[0] == e[1] && f[1] == e[0])) ++count;
      if (count == 1) boundary.push_back(e);
    }
    std::erase_if(tris, [](const Tri& t) { return !t.alive; });
    for (const auto& e : boundary) tris.push_back(make(e[0], e[1], p));
  }
  std::vector<std::array<int, 3>> out;
  for (const auto& t : tris) {
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    std::array<int, 3> v = t.v;
    if (predicates::orient2d(pts[v[0]], pts[v[1]], pts[v[2]]) < 0) std::swap(v[1], v[2]);
    out.push_back(v);
  }
  return out;
}

/// points along a curve c(s), s in [0,1], spaced according to sizing h
inline std::vector<Point> distribute(const std::function<Point(double)>& curve,
                                     const std::function<double(const Point&)>& h,
                                     int min_segments = 2) {
  constexpr int m = 4000;
  std::vector<double> cum(m + 1, 0.0);
  Point prev = curve(0.0);
  for (int i = 1; i <= m; ++i) {
    const Point cur = curve(static_cast<double>(i) / m);
    cum[i] = cum[i - 1] + (cur - prev).norm() / h(0.5 * (cur + prev));
    prev = cur;
  }
  const int nseg = std::max(min_segments, static_cast<int>(std::lround(cum[m])));
  std::vector<Point> out{curve(0.0)};
  int i = 0;
  for (int k = 1; k < nseg; ++k) {
    const double target = cum[m] * k / nseg;
    while (cum[i + 1] < target) ++i;
    const double s = (i + (target - cum[i]) / (cum[i + 1] - cum[i])) / m;
    out.push_back(curve(s));
  }
  out.push_back(curve(1.0));
  return out;
}

inline double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

} // namespace detail

/// geometry and resolution of the half-circle bay
struct HalfCircleSpec {
  double radius = 2.0;           ///< outer half-circle radius, centered at the origin
  Point obstacle_center{0.0, 0.5};
  double obstacle_radius = 0.25;
  double h_near = 0.06;          ///< target edge length on the obstacle
  double h_far = 0.2;            ///< target edge length far away
  double grading = 1.0;          ///< distance over which h grows from near to far
  int smoothing_passes = 4;
  unsigned seed = 7;
};

struct SymmetricMesh {
  Mesh mesh;
  std::vector<int> mirror_vertex; ///< vertex index of the reflection about x = 0
  std::vector<int> mirror_cell;
};

/**
 * @brief half disk {y >= 0, |x| <= R} minus a circular obstacle on the axis
 *
 * Shore is the diameter y = 0, open sea the arc, obstacle the inner circle.
 * Throws MeshError if the Delaunay triangulation does not recover the
 * boundary (increase resolution).
 */
inline SymmetricMesh half_circle_with_obstacle(const HalfCircleSpec& spec) {
  using std::numbers::pi;
  const double R = spec.radius, r = spec.obstacle_radius;
  const Point oc = spec.obstacle_center;
  if (std::abs(oc.x()) > 0.0 || oc.y() - r <= 0.0 || oc.y() + r >= R)
    throw MeshError("obstacle must sit on the symmetry axis strictly inside the bay");
  auto h = [&](const Point& p) {
    const double d = std::max(0.0, (p - oc).norm() - r);
    return spec.h_near + (spec.h_far - spec.h_near) * std::min(1.0, d / spec.grading);
  };

  // boundary chains of the right half, each from start to end
  auto shore = detail::distribute([&](double s) { return Point(R * s, 0.0); }, h);
  auto arc = detail::distribute(
      [&](double s) { return Point(R * std::cos(0.5 * pi * s), R * std::sin(0.5 * pi * s)); }, h);
  auto axis_top = detail::distribute([&](double s) { return Point(0.0, R - s * (R - oc.y() - r)); }, h);
  auto obst = detail::distribute(
      [&](double s) {
        const double th = 0.5 * pi - pi * s; // top -> bottom through x > 0
        return Point(oc.x() + r * std::cos(th), oc.y() + r * std::sin(th));
      },
      h, 4);
  auto axis_bottom = detail::distribute([&](double s) { return Point(0.0, (oc.y() - r) * (1.0 - s)); }, h);
  arc.back() = Point(0.0, R);
  obst.front() = Point(0.0, oc.y() + r);
  obst.back() = Point(0.0, oc.y() - r);

  std::vector<Point> pts;
  struct Seg {
    int a, b;
    int tag; // 0 symmetry axis, else BoundaryTag
  };
  std::vector<Seg> segs;
  auto add_chain = [&](const std::vector<Point>& chain, int tag) {
    // consecutive chains share endpoints; drop the duplicated first point
    int prev = -1;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      int idx = -1;
      if (i == 0 && !pts.empty() && (pts.back() - chain[0]).norm() < 1e-12) idx = static_cast<int>(pts.size()) - 1;
      if (idx < 0) {
        if (i + 1 == chain.size() && (pts.front() - chain.back()).norm() < 1e-12) idx = 0;
        else {
          idx = static_cast<int>(pts.size());
          pts.push_back(chain[i]);
        }
      }
      if (prev >= 0) segs.push_back({prev, idx, tag});
      prev = idx;
    }
  };
  add_chain(shore, static_cast<int>(BoundaryTag::Shore));
  add_chain(arc, static_cast<int>(BoundaryTag::OpenSea));
  add_chain(axis_top, 0);
  add_chain(obst, static_cast<int>(BoundaryTag::Obstacle));
  add_chain(axis_bottom, 0);
  const int nboundary = static_cast<int>(pts.size());

  auto inside = [&](const Point& p) {
    return p.x() > 0.0 && p.y() > 0.0 && p.norm() < R && (p - oc).norm() > r;
  };
  auto boundary_distance = [&](const Point& p) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : segs) d = std::min(d, detail::segment_distance(p, pts[s.a], pts[s.b]));
    return d;
  };

  // greedy Poisson-disk sampling of the interior, nearest to the obstacle first
  std::mt19937 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  const double dx = 0.5 * spec.h_near;
  std::vector<Point> cand;
  for (double y = 0.5 * dx; y < R; y += dx * std::sqrt(3.0) / 2.0) {
    const double shift = (std::lround(y / (dx * std::sqrt(3.0) / 2.0)) % 2) * 0.5 * dx;
    for (double x = shift + 0.5 * dx; x < R; x += dx) {
      Point p(x + jitter(rng) * dx, y + jitter(rng) * dx);
      if (inside(p)) cand.push_back(p);
    }
  }
  std::stable_sort(cand.begin(), cand.end(),
                   [&](const Point& a, const Point& b) { return h(a) < h(b); });
  const double cell = spec.h_far;
  auto hkey = [&](const Point& p) {
    return (static_cast<long long>(std::floor(p.x() / cell)) << 32) ^
           static_cast<long long>(std::floor(p.y() / cell) + 1e6);
  };
  std::unordered_map<long long, std::vector<int>> grid;
  auto insert = [&](int i) { grid[hkey(pts[i])].push_back(i); };
  for (int i = 0; i < nboundary; ++i) insert(i);
  for (const auto& p : cand) {
    const double hp = h(p);
    if (boundary_distance(p) < 0.7 * hp) continue;
    bool ok = true;
    const long long cx = static_cast<long long>(std::floor(p.x() / cell));
    const long long cy = static_cast<long long>(std::floor(p.y() / cell));
    for (long long ix = cx - 1; ix <= cx + 1 && ok; ++ix)
      for (long long iy = cy - 1; iy <= cy + 1 && ok; ++iy) {
        auto it = grid.find((ix << 32) ^ static_cast<long long>(iy + 1e6));
        if (it == grid.end()) continue;
        for (int j : it->second)
          if ((pts[j] - p).norm() < 0.9 * std::max(hp, h(pts[j]) * 0.8)) {
            ok = false;
            break;
          }
      }
    if (!ok) continue;
    pts.push_back(p);
    insert(static_cast<int>(pts.size()) - 1);
  }

  auto keep = [&](const std::array<int, 3>& t) {
    const Point c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
    return inside(c);
  };
  std::vector<std::array<int, 3>> tris;
  for (int pass = 0; pass <= spec.smoothing_passes; ++pass) {
    tris = detail::delaunay(pts);
    std::erase_if(tris, [&](const auto& t) { return !keep(t); });
    if (pass == spec.smoothing_passes) break;
    // Laplacian smoothing of interior points over the current triangulation
    std::vector<Point> sum(pts.size(), Point::Zero());
    std::vector<int> cnt(pts.size(), 0);
    for (const auto& t : tris)
      for (int k = 0; k < 3; ++k) {
        sum[t[k]] += pts[t[(k + 1) % 3]] + pts[t[(k + 2) % 3]];
        cnt[t[k]] += 2;
      }
    for (int i = nboundary; i < static_cast<int>(pts.size()); ++i) {
      if (cnt[i] == 0) continue;
      const Point np = sum[i] / cnt[i];
      if (inside(np) && boundary_distance(np) > 0.4 * h(np)) pts[i] = np;
    }
  }

  // boundary recovery check
  {
    std::unordered_map<long long, int> edges;
    auto ek = [](int a, int b) { return (static_cast<long long>(std::min(a, b)) << 32) | std::max(a, b); };
    for (const auto& t : tris)
      for (int k = 0; k < 3; ++k) edges[ek(t[k], t[(k + 1) % 3])]++;
    for (const auto& s : segs)
      if (!edges.count(ek(s.a, s.b)))
        throw MeshError("half-circle mesher failed to recover a boundary segment; refine h_near");
  }

  // mirror about x = 0
  const int nh = static_cast<int>(pts.size());
  std::vector<int> mirror(nh, -1);
  std::vector<Point> all(pts);
  for (int i = 0; i < nh; ++i) {
    if (pts[i].x() == 0.0) {
      mirror[i] = i;
    } else {
      mirror[i] = static_cast<int>(all.size());
      all.emplace_back(-pts[i].x(), pts[i].y());
    }
  }
  const int ncell_half = static_cast<int>(tris.size());
  std::vector<std::array<int, 3>> cells(tris);
  for (const auto& t : tris) cells.push_back({mirror[t[0]], mirror[t[2]], mirror[t[1]]});
  std::vector<BoundaryEdge> be;
  for (const auto& s : segs) {
    if (s.tag == 0) continue;
    const auto tag = static_cast<BoundaryTag>(s.tag);
    be.push_back({{s.a, s.b}, tag});
    be.push_back({{mirror[s.b], mirror[s.a]}, tag});
  }
  SymmetricMesh out{Mesh(all, cells, be), {}, {}};
  out.mirror_vertex.resize(all.size());
  for (int i = 0; i < nh; ++i) {
    out.mirror_vertex[i] = mirror[i];
    out.mirror_vertex[mirror[i]] = i;
  }
  out.mirror_cell.resize(cells.size());
  for (int c = 0; c < ncell_half; ++c) {
    out.mirror_cell[c] = c + ncell_half;
    out.mirror_cell[c + ncell_half] = c;
  }
  return out;
}

} // namespace swopt::meshgen
