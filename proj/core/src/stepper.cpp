#include "stepper.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "switchgrid/util/errors.hpp"
#include "switchgrid/util/parallel.hpp"

namespace switchgrid::detail {

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int ceil_div(int a, int b) { return -floor_div(-a, b); }

}  // namespace

Stepper::Stepper(const ProblemSpec& spec, const GridConfig& grid,
                 std::shared_ptr<const GridGeometry> geometry, double epsilon)
    : spec_(spec), grid_(grid), geo_(std::move(geometry)), epsilon_(epsilon) {
  if (geo_->kind() == SolveKind::kPenalized && !(epsilon_ > 0.0)) {
    throw ConfigError("grid.epsilon_list", "penalty parameter must be positive");
  }
  build_lines();
  build_candidates();
}

void Stepper::build_lines() {
  const GridGeometry& g = *geo_;
  const bool constrained = g.kind() == SolveKind::kConstrained;
  const int ju = constrained ? 1 : g.j_lo();
  const int nx = g.nx();
  for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
    const int top = g.j_hi(z);
    const int s = z * g.shear();
    const double ghost = spec_.utility(g.y(z, top + 1) - spec_.cost(-z));
    if (s == 0) {
      for (int j = ju; j <= top; ++j) lines_.push_back({z, j, 0, nx});
      continue;
    }
    const int k_min = ju - std::max(0, s * nx);
    const int k_max = top - std::min(0, s * nx);
    for (int k = k_min; k <= k_max; ++k) {
      int ib = 0;
      int ie = 0;
      if (s > 0) {
        ib = ceil_div(ju - k, s);
        ie = floor_div(top - k, s);
      } else {
        ib = ceil_div(top - k, s);
        ie = floor_div(ju - k, s);
      }
      ib = std::max(ib, 0);
      ie = std::min(ie, nx);
      if (ib > ie) continue;
      Line line{z, k, ib, ie};
      // The neighbour past an end is a Dirichlet node when it falls below
      // the unknown rows (value 0, or the floor at fractional distance) or
      // above the top row. The top boundary is the ghost row top + 1 for
      // every line, at fractional distance, with value U(y - c(-z)).
      auto classify = [&](int i_out, int i_in, Side& side, double& h, double& value) {
        if (i_out < 0 || i_out > nx) return;
        const int j_out = k + s * i_out;
        const int j_in = k + s * i_in;
        side = Side::kDirichlet;
        if (j_out > top) {
          h = static_cast<double>(top + 1 - j_in) / std::abs(s);
          value = ghost;
        } else if (constrained) {
          h = static_cast<double>(j_in) / std::abs(s);
        } else {
          h = 1.0;
        }
      };
      classify(ib - 1, ib, line.left, line.h_left, line.g_left);
      classify(ie + 1, ie, line.right, line.h_right, line.g_right);
      lines_.push_back(line);
    }
  }
}

void Stepper::build_candidates() {
  const GridGeometry& g = *geo_;
  const auto& k = g.positions();
  const bool constrained = g.kind() == SolveKind::kConstrained;
  candidates_.resize(static_cast<std::size_t>(k.size()));
  std::vector<int> order{0};
  for (int r = 1; r <= k.c2 + k.c3; ++r) {
    order.push_back(-r);
    order.push_back(r);
  }
  for (int z = k.lowest(); z <= k.highest(); ++z) {
    auto& rows = candidates_[static_cast<std::size_t>(k.index(z))];
    rows.resize(static_cast<std::size_t>(g.rows(z)));
    for (int j = g.j_lo(); j <= g.j_hi(z); ++j) {
      if (g.dirichlet(j)) continue;
      const double y = g.y(z, j);
      auto& list = rows[static_cast<std::size_t>(j - g.j_lo())];
      for (int zt : order) {
        if (zt == z || !k.contains(zt)) continue;
        if (constrained && !in_gamma(spec_, y, z, zt)) continue;
        list.push_back({zt, (y - spec_.cost(zt - z) - g.floor(zt)) / g.dy()});
      }
      if (!list.empty()) any_candidates_ = true;
    }
  }
}

void Stepper::line_coefficients(const Line& line, double, Coefficients& c, const std::vector<double>& b,
                                const std::vector<double>& a) const {
  const GridGeometry& g = *geo_;
  const std::size_t len = static_cast<std::size_t>(line.i_end - line.i_begin + 1);
  c.cl.assign(len, 0.0);
  c.cr.assign(len, 0.0);
  c.absorb.assign(len, 0.0);
  const double dx = g.dx();
  const int s = line.z * g.shear();
  const double floor = g.floor(line.z);
  for (int i = line.i_begin; i <= line.i_end; ++i) {
    const std::size_t p = static_cast<std::size_t>(i - line.i_begin);
    const bool has_l = i > line.i_begin || line.left == Side::kDirichlet;
    const bool has_r = i < line.i_end || line.right == Side::kDirichlet;
    const double hl = (i > line.i_begin ? 1.0 : line.h_left) * dx;
    const double hr = (i < line.i_end ? 1.0 : line.h_right) * dx;
    const double bi = b[static_cast<std::size_t>(i)];
    const double ai = a[static_cast<std::size_t>(i)];
    double cl = 0.0;
    double cr = 0.0;
    if (has_l && has_r) {
      const double dl = 2.0 * ai / (hl * (hl + hr));
      const double dr = 2.0 * ai / (hr * (hl + hr));
      cl = dl - bi * hr / (hl * (hl + hr));
      cr = dr + bi * hl / (hr * (hl + hr));
      if (cl < 0.0 || cr < 0.0) {
        cl = dl + (bi < 0.0 ? -bi / hl : 0.0);
        cr = dr + (bi > 0.0 ? bi / hr : 0.0);
      }
    } else if (has_r) {
      cr = bi > 0.0 ? bi / hr : 0.0;
    } else if (has_l) {
      cl = bi < 0.0 ? -bi / hl : 0.0;
    }
    c.cl[p] = cl;
    c.cr[p] = cr;
    if (g.kind() == SolveKind::kPenalized) {
      const double y = floor + (line.k + s * i) * g.dy();
      c.absorb[p] = std::max(0.0, floor - y) / epsilon_;
    }
  }
}

void Stepper::solve_line_implicit(const Line& line, const Coefficients& c, const FieldSlice& next,
                                  FieldSlice& out) const {
  const GridGeometry& g = *geo_;
  const double dt = g.dt();
  const int s = line.z * g.shear();
  const std::size_t len = c.cl.size();
  // Thomas algorithm on an M-matrix: no pivoting needed.
  std::vector<double> upper(len, 0.0);
  std::vector<double> rhs(len, 0.0);
  double prev_upper = 0.0;
  double prev_rhs = 0.0;
  for (std::size_t p = 0; p < len; ++p) {
    const int i = line.i_begin + static_cast<int>(p);
    const int j = line.k + s * i;
    const double lower = p > 0 ? -dt * c.cl[p] : 0.0;
    const double diag = 1.0 + dt * (c.cl[p] + c.cr[p] + c.absorb[p]);
    const double up = p + 1 < len ? -dt * c.cr[p] : 0.0;
    double b = next.at(line.z, i, j);
    if (p == 0) b += dt * c.cl[p] * line.g_left;
    if (p + 1 == len) b += dt * c.cr[p] * line.g_right;
    const double denom = diag - lower * prev_upper;
    upper[p] = up / denom;
    rhs[p] = (b - lower * prev_rhs) / denom;
    prev_upper = upper[p];
    prev_rhs = rhs[p];
  }
  double u = 0.0;
  for (std::size_t p = len; p-- > 0;) {
    u = rhs[p] - (p + 1 < len ? upper[p] * u : 0.0);
    const int i = line.i_begin + static_cast<int>(p);
    out.at(line.z, i, line.k + s * i) = u;
  }
}

int Stepper::explicit_substeps(const std::vector<Coefficients>& coeffs) const {
  double worst = 0.0;
  for (std::size_t l = 0; l < lines_.size(); ++l) {
    const auto& c = coeffs[l];
    const std::size_t len = c.cl.size();
    for (std::size_t p = 0; p < len; ++p) {
      const double free_l = p > 0 ? c.cl[p] : 0.0;
      const double free_r = p + 1 < len ? c.cr[p] : 0.0;
      worst = std::max(worst, free_l + free_r);
    }
  }
  const double steps = std::ceil(geo_->dt() * worst * (1.0 + 1e-12));
  return std::max(1, static_cast<int>(steps));
}

void Stepper::advance_line_explicit(const Line& line, const Coefficients& c, int substeps,
                                    const FieldSlice& next, FieldSlice& out) const {
  const GridGeometry& g = *geo_;
  const double h = g.dt() / substeps;
  const int s = line.z * g.shear();
  const std::size_t len = c.cl.size();
  std::vector<double> u(len);
  std::vector<double> v(len);
  for (std::size_t p = 0; p < len; ++p) {
    const int i = line.i_begin + static_cast<int>(p);
    u[p] = next.at(line.z, i, line.k + s * i);
  }
  for (int step = 0; step < substeps; ++step) {
    for (std::size_t p = 0; p < len; ++p) {
      double flux = 0.0;
      double implicit = c.absorb[p];
      // Dirichlet neighbours enter semi-implicitly; free ends have zero
      // outward coefficients.
      if (p > 0) {
        flux += c.cl[p] * (u[p - 1] - u[p]);
      } else {
        flux += c.cl[p] * line.g_left;
        implicit += c.cl[p];
      }
      if (p + 1 < len) {
        flux += c.cr[p] * (u[p + 1] - u[p]);
      } else {
        flux += c.cr[p] * line.g_right;
        implicit += c.cr[p];
      }
      v[p] = (u[p] + h * flux) / (1.0 + h * implicit);
    }
    std::swap(u, v);
  }
  for (std::size_t p = 0; p < len; ++p) {
    const int i = line.i_begin + static_cast<int>(p);
    out.at(line.z, i, line.k + s * i) = u[p];
  }
}

void Stepper::pin_dirichlet(FieldSlice& slice) const {
  const GridGeometry& g = *geo_;
  if (g.kind() != SolveKind::kConstrained) return;
  for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
    for (int i = 0; i <= g.nx(); ++i) slice.at(z, i, 0) = 0.0;
  }
}

namespace {

struct RoundResult {
  double change = 0.0;
  NodeWitness worst;
  bool has_worst = false;
};

// Larger change wins; equal changes go to the first node in storage order.
void merge(RoundResult& into, const RoundResult& other) {
  if (!other.has_worst) return;
  if (!into.has_worst || other.change > into.change) into = other;
}

}  // namespace

int Stepper::intervene(FieldSlice& slice, int n) const {
  if (!any_candidates_) return 0;
  const GridGeometry& g = *geo_;
  const auto& k = g.positions();
  const Interpolation order = grid_.interpolation;
  const int ncols = g.nx() + 1;
  const std::size_t columns = static_cast<std::size_t>(k.size() * ncols);
  FieldSlice scratch = slice;

  auto round = [&](const FieldSlice& cur, FieldSlice& dst) {
    std::vector<RoundResult> partial(columns);
    parallel_for(columns, grid_.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t col = begin; col < end; ++col) {
        const int z = k.at(static_cast<int>(col) / ncols);
        const int i = static_cast<int>(col) % ncols;
        const auto& rows = candidates_[static_cast<std::size_t>(k.index(z))];
        RoundResult& res = partial[col];
        for (int j = g.j_lo(); j <= g.j_hi(z); ++j) {
          const auto& list = rows[static_cast<std::size_t>(j - g.j_lo())];
          const double u = cur.at(z, i, j);
          double best = u;
          for (const auto& c : list) best = std::max(best, cur.column_value(c.target, i, c.jf, order));
          dst.at(z, i, j) = best;
          const double change = best - u;
          if (change > 0.0 && (!res.has_worst || change > res.change)) {
            res.change = change;
            res.worst = {n, z, i, j, g.x(i), g.y(z, j), change};
            res.has_worst = true;
          }
        }
      }
    });
    RoundResult total;
    for (const auto& p : partial) merge(total, p);
    return total;
  };

  if (grid_.max_intervention_iters <= 0) {
    const RoundResult r = round(slice, scratch);
    NodeWitness w = r.has_worst ? r.worst : NodeWitness{n, 0, 0, 0, 0.0, 0.0, 0.0};
    throw NonConvergenceError(
        fmt::format("intervention iteration not converged at time index {}: iteration budget is 0", n), w);
  }
  for (int r = 1; r <= grid_.max_intervention_iters; ++r) {
    const RoundResult res = round(slice, scratch);
    std::swap(slice, scratch);
    if (res.change <= grid_.intervention_tol) return r;
    if (r == grid_.max_intervention_iters) {
      throw NonConvergenceError(
          fmt::format("intervention iteration not converged at time index {} after {} rounds "
                      "(worst change {:.3e} at z={}, x={}, y={})",
                      n, r, res.change, res.worst.z, res.worst.x, res.worst.y),
          res.worst);
    }
  }
  return grid_.max_intervention_iters;
}

void Stepper::step(const FieldSlice& next, FieldSlice& out, int n, StepStats* stats) const {
  const GridGeometry& g = *geo_;
  const double t = g.t(n);
  std::vector<double> b(static_cast<std::size_t>(g.nx() + 1));
  std::vector<double> a(b.size());
  for (int i = 0; i <= g.nx(); ++i) {
    b[static_cast<std::size_t>(i)] = spec_.market.drift(t, g.x(i));
    const double s = spec_.market.volatility(t, g.x(i));
    a[static_cast<std::size_t>(i)] = 0.5 * s * s;
  }
  std::vector<Coefficients> coeffs(lines_.size());
  parallel_for(lines_.size(), grid_.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t l = begin; l < end; ++l) line_coefficients(lines_[l], t, coeffs[l], b, a);
  });

  int substeps = 0;
  if (grid_.stepping == TimeStepping::kExplicit) substeps = explicit_substeps(coeffs);
  parallel_for(lines_.size(), grid_.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t l = begin; l < end; ++l) {
      if (substeps > 0) {
        advance_line_explicit(lines_[l], coeffs[l], substeps, next, out);
      } else {
        solve_line_implicit(lines_[l], coeffs[l], next, out);
      }
    }
  });
  pin_dirichlet(out);
  const int rounds = intervene(out, n);
  pin_dirichlet(out);
  if (stats) {
    stats->intervention_rounds = rounds;
    stats->explicit_substeps = substeps;
  }
}

}  // namespace switchgrid::detail
