#pragma once
/**
 * @file bathymetry_io.hpp
 * @brief scattered (x, y, z) samples and nearest-neighbor transfer to mesh vertices
 */

#include "swopt/swe/residual.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace swopt {

struct BathymetryScatter {
  std::vector<Point> xy;
  std::vector<double> z;

  std::size_t size() const { return z.size(); }

  void validate() const {
    if (z.empty()) throw DomainError("bathymetry scatter: at least one sample required");
    if (xy.size() != z.size()) throw DomainError("bathymetry scatter: coordinate and value counts differ");
    for (std::size_t i = 0; i < z.size(); ++i)
      if (!xy[i].allFinite() || !std::isfinite(z[i]))
        throw DomainError("bathymetry scatter: non-finite sample at row " + std::to_string(i));
  }

  /// header x,y,z after optional '#' comment lines; blank lines are skipped
  static BathymetryScatter read_csv(std::istream& in, const std::string& name = "<stream>") {
    BathymetryScatter s;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        std::string h;
        for (char ch : line)
          if (!std::isspace(static_cast<unsigned char>(ch))) h += ch;
        if (h != "x,y,z") throw ParseError(name + ":" + std::to_string(lineno) + ": expected header x,y,z");
        header = true;
        continue;
      }
      std::istringstream ls(line);
      double v[3];
      for (int k = 0; k < 3; ++k) {
        std::string cell;
        if (!std::getline(ls, cell, ',')) throw ParseError(name + ":" + std::to_string(lineno) + ": expected 3 columns");
        std::size_t used = 0;
        try {
          v[k] = std::stod(cell, &used);
        } catch (const std::exception&) {
          throw ParseError(name + ":" + std::to_string(lineno) + ": not a number '" + cell + "'");
        }
        for (std::size_t i = used; i < cell.size(); ++i)
          if (!std::isspace(static_cast<unsigned char>(cell[i])))
            throw ParseError(name + ":" + std::to_string(lineno) + ": not a number '" + cell + "'");
        if (!std::isfinite(v[k])) throw ParseError(name + ":" + std::to_string(lineno) + ": non-finite value");
      }
      std::string rest;
      if (std::getline(ls, rest) && rest.find_first_not_of(" \t") != std::string::npos)
        throw ParseError(name + ":" + std::to_string(lineno) + ": expected 3 columns");
      s.xy.emplace_back(v[0], v[1]);
      s.z.push_back(v[2]);
    }
    if (!header) throw ParseError(name + ": missing header x,y,z");
    if (s.z.empty()) throw ParseError(name + ": no samples");
    return s;
  }

  static BathymetryScatter load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open bathymetry file " + path.string());
    return read_csv(in, path.string());
  }
};

/**
 * @brief uniform bucket grid for nearest-sample queries
 *
 * Ties in distance go to the lowest sample index.
 */
class NearestSample {
public:
  explicit NearestSample(const std::vector<Point>& pts) : pts_(pts) {
    lo_ = hi_ = pts.front();
    for (const auto& p : pts) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    const Vec2 ext = hi_ - lo_;
    const double area = std::max(ext.x(), 1e-300) * std::max(ext.y(), 1e-300);
    cell_ = std::sqrt(area / double(pts.size()));
    if (!(cell_ > 0.0) || !std::isfinite(cell_)) cell_ = std::max({ext.x(), ext.y(), 1.0});
    nx_ = std::max(1, std::min(int(ext.x() / cell_) + 1, 4096));
    ny_ = std::max(1, std::min(int(ext.y() / cell_) + 1, 4096));
    cell_ = std::max({ext.x() / nx_, ext.y() / ny_, 1e-300});
    start_.assign(std::size_t(nx_) * ny_ + 1, 0);
    for (const auto& p : pts) ++start_[bucket(p) + 1];
    for (std::size_t i = 1; i < start_.size(); ++i) start_[i] += start_[i - 1];
    items_.resize(pts.size());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) items_[fill[bucket(pts[i])]++] = int(i); // ascending per bucket
  }

  int query(const Point& q) const {
    const int cx = clampi(int(std::floor((q.x() - lo_.x()) / cell_)), nx_);
    const int cy = clampi(int(std::floor((q.y() - lo_.y()) / cell_)), ny_);
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int r = 0;; ++r) {
      for (int j = cy - r; j <= cy + r; ++j) {
        if (j < 0 || j >= ny_) continue;
        const bool edge_row = j == cy - r || j == cy + r;
        for (int i = cx - r; i <= cx + r; i += (edge_row ? 1 : 2 * std::max(r, 1))) {
          if (i < 0 || i >= nx_) continue;
          const std::size_t b = std::size_t(j) * nx_ + i;
          for (int k = start_[b]; k < start_[b + 1]; ++k) {
            const int s = items_[k];
            const double d = (pts_[s] - q).squaredNorm();
            if (d < bd || (d == bd && s < best)) {
              bd = d;
              best = s;
            }
          }
        }
      }
      // unvisited buckets are at least r cells away
      const double reach = r * cell_;
      if ((best >= 0 && bd < reach * reach) || (r >= nx_ && r >= ny_)) break;
    }
    return best;
  }

private:
  static int clampi(int i, int n) { return std::min(std::max(i, 0), n - 1); }
  std::size_t bucket(const Point& p) const {
    const int i = clampi(int(std::floor((p.x() - lo_.x()) / cell_)), nx_);
    const int j = clampi(int(std::floor((p.y() - lo_.y()) / cell_)), ny_);
    return std::size_t(j) * nx_ + i;
  }

  const std::vector<Point>& pts_;
  Point lo_, hi_;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<int> start_, items_;
};

/// every vertex takes z of its nearest sample (Euclidean, ties by lowest row)
inline Bathymetry ingest_bathymetry(const Mesh& mesh, const BathymetryScatter& s) {
  s.validate();
  const NearestSample nn(s.xy);
  Bathymetry b;
  b.z.reserve(mesh.num_vertices());
  for (const auto& v : mesh.vertices()) b.z.push_back(s.z[nn.query(v)]);
  return b;
}

} // namespace swopt
