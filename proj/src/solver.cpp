#include "scaleqm/solver.hpp"

#include <lapacke.h>

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "scaleqm/errors.hpp"

namespace scaleqm {

const char* boundary_tag_name(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Dirichlet: return "dirichlet";
    case BoundaryTag::ParityEven: return "even";
    case BoundaryTag::ParityOdd: return "odd";
    case BoundaryTag::RadialRegular: return "radial";
  }
  return "?";
}

int GridSpec::intervals() const { return static_cast<int>(std::lround((x_max - x_min) / h)); }

void GridSpec::validate() const {
  if (!(h > 0)) throw DomainError("grid step must be positive");
  if (!std::isfinite(x_min) || !std::isfinite(x_max)) throw DomainError("grid bounds must be finite");
  const double n = (x_max - x_min) / h;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    throw DomainError("grid span is not an integer number of steps");
  if (std::round(n) < 16) throw DomainError("grid needs at least 16 intervals");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBig = 1e200;

// ---------------------------------------------------------------- Numerov core

enum class Start { Dirichlet, Even, Odd, Radial };

// psi'' = k (V - E) psi on x_i = a + i h, i = 0..N, Dirichlet at x_N.
struct Line {
  double a = 0, h = 1e-3;
  int N = 0;
  double k = 2;
  std::vector<double> kv;  // k V(x_i)
  Start start = Start::Dirichlet;
  int l = 0;
  double mt = 1;
  int radial_first = 1;  // first index set from the series

  double x(int i) const { return a + h * i; }
  // h^2 g_i / 12 with g = k (V - E); z = 1 - w.
  double w(int i, double E) const { return h * h * (kv[static_cast<std::size_t>(i)] - k * E) / 12.0; }
  double z(int i, double E) const { return 1.0 - w(i, E); }
};

// One Numerov step written on y = (1 - w) psi so that the curvature term
// keeps full relative precision for small h.
inline double numerov_step(double pm, double p0, double wm, double w0, double wp) {
  const double ym = (1.0 - wm) * pm, y0 = (1.0 - w0) * p0;
  return (2.0 * y0 - ym + 12.0 * w0 * p0) / (1.0 - wp);
}

double radial_series(const Line& L, double E, double x) {
  // u = x^(l+1) sum c_j x^j for u'' = [l(l+1)/x^2 - 2 m/x - 2 m E] u
  const int J = 14;
  double c_prev2 = 0, c_prev = 1, sum = 1, xp = 1;
  for (int j = 1; j <= J; ++j) {
    const double c = -2.0 * L.mt * (c_prev + E * c_prev2) / (j * (j + 2.0 * L.l + 1));
    xp *= x;
    sum += c * xp;
    c_prev2 = c_prev;
    c_prev = c;
  }
  return std::pow(x, L.l + 1) * sum;
}

// Sets the starting values and returns the last preset index.
int start_values(const Line& L, double E, std::vector<double>& psi) {
  switch (L.start) {
    case Start::Dirichlet:
    case Start::Odd:
      psi[0] = 0;
      psi[1] = L.h;
      return 1;
    case Start::Even:
      psi[0] = 1;
      psi[1] = (1.0 + 5.0 * L.w(0, E)) / (1.0 - L.w(1, E));
      return 1;
    case Start::Radial: {
      const int s = L.radial_first;
      for (int i = 0; i < s; ++i) psi[static_cast<std::size_t>(i)] = 0;
      psi[static_cast<std::size_t>(s)] = radial_series(L, E, L.x(s));
      psi[static_cast<std::size_t>(s + 1)] = radial_series(L, E, L.x(s + 1));
      return s + 1;
    }
  }
  return 1;
}

// Outward solution on [0, upto]. Rescales the stored prefix on overflow.
void outward(const Line& L, double E, int upto, std::vector<double>& psi) {
  psi.assign(static_cast<std::size_t>(upto) + 1, 0.0);
  const int i0 = start_values(L, E, psi);
  double wm = L.w(i0 - 1, E), w0 = L.w(i0, E);
  for (int i = i0; i < upto; ++i) {
    const double wp = L.w(i + 1, E);
    const double next =
        numerov_step(psi[static_cast<std::size_t>(i - 1)], psi[static_cast<std::size_t>(i)], wm, w0, wp);
    psi[static_cast<std::size_t>(i + 1)] = next;
    if (std::abs(next) > kBig) {
      for (int j = 0; j <= i + 1; ++j) psi[static_cast<std::size_t>(j)] /= kBig;
    }
    wm = w0;
    w0 = wp;
  }
}

// Inward solution on [from, N] with psi_N = 0.
void inward(const Line& L, double E, int from, std::vector<double>& psi) {
  psi.assign(static_cast<std::size_t>(L.N) + 1, 0.0);
  psi[static_cast<std::size_t>(L.N)] = 0;
  psi[static_cast<std::size_t>(L.N - 1)] = L.h;
  double wp = L.w(L.N, E), w0 = L.w(L.N - 1, E);
  for (int i = L.N - 1; i > from; --i) {
    const double wm = L.w(i - 1, E);
    const double next =
        numerov_step(psi[static_cast<std::size_t>(i + 1)], psi[static_cast<std::size_t>(i)], wp, w0, wm);
    psi[static_cast<std::size_t>(i - 1)] = next;
    if (std::abs(next) > kBig) {
      for (int j = i - 1; j <= L.N; ++j) psi[static_cast<std::size_t>(j)] /= kBig;
    }
    wp = w0;
    w0 = wm;
  }
}

// Sign changes of the outward solution over the whole line: the number of
// Dirichlet eigenvalues below E.
int count_below(const Line& L, double E) {
  std::vector<double> tmp(static_cast<std::size_t>(L.radial_first) + 2);
  const int i0 = start_values(L, E, tmp);
  double pm = tmp[static_cast<std::size_t>(i0 - 1)], p0 = tmp[static_cast<std::size_t>(i0)];
  int count = 0;
  int sign = 0;
  auto see = [&](double v) {
    if (v == 0) return;
    const int s = v > 0 ? 1 : -1;
    if (sign != 0 && s != sign) ++count;
    sign = s;
  };
  for (int i = 0; i <= i0; ++i) see(tmp[static_cast<std::size_t>(i)]);
  double wm = L.w(i0 - 1, E), w0 = L.w(i0, E);
  for (int i = i0; i < L.N; ++i) {
    const double wp = L.w(i + 1, E);
    double next = numerov_step(pm, p0, wm, w0, wp);
    if (std::abs(next) > kBig) {
      next /= kBig;
      p0 /= kBig;
    }
    see(next);
    pm = p0;
    p0 = next;
    wm = w0;
    w0 = wp;
  }
  return count;
}

int matching_index(const Line& L, double E) {
  const int lo = std::max(2, L.radial_first + 2);
  int m = -1;
  for (int i = L.N - 2; i >= lo; --i)
    if (L.kv[static_cast<std::size_t>(i)] < L.k * E) {
      m = i;
      break;
    }
  if (m < 0) m = std::max(lo, L.N / 2);
  return std::min(m, L.N - 2);
}

// Casoratian of y = z psi for the outward and inward solutions, normalized
// by positive factors; its zero is the eigenvalue.
double wronskian(const Line& L, double E, int m) {
  std::vector<double> left, right;
  outward(L, E, m + 1, left);
  inward(L, E, m, right);
  const double zm = L.z(m, E), zp = L.z(m + 1, E);
  const double l0 = zm * left[static_cast<std::size_t>(m)], l1 = zp * left[static_cast<std::size_t>(m + 1)];
  const double r0 = zm * right[static_cast<std::size_t>(m)], r1 = zp * right[static_cast<std::size_t>(m + 1)];
  const double norm = (std::abs(l0) + std::abs(l1)) * (std::abs(r0) + std::abs(r1));
  if (norm == 0) return 0;
  return (l0 * r1 - l1 * r0) / norm;
}

struct Level {
  double E;
  bool converged;
};

// Eigenvalues with index 0..count-1 below `cap`, isolated by node counting
// and refined on the matching Wronskian.
std::vector<Level> find_levels(const Line& L, int count, double cap, std::optional<std::vector<double>> guesses = {}) {
  double vmin = kInf;
  for (int i = 0; i <= L.N; ++i)
    if (std::isfinite(L.kv[static_cast<std::size_t>(i)])) vmin = std::min(vmin, L.kv[static_cast<std::size_t>(i)]);
  double lo = vmin / L.k - 1.0;
  std::map<double, int> seen;
  auto counted = [&](double E) {
    const auto it = seen.find(E);
    if (it != seen.end()) return it->second;
    const int c = count_below(L, E);
    seen.emplace(E, c);
    return c;
  };
  for (int it = 0; counted(lo) > 0; ++it) {
    if (it == 8) throw NonConvergence("node count does not vanish below the potential minimum");
    lo -= std::max(1.0, std::abs(lo));
  }

  std::vector<Level> out;
  const bool finite_cap = std::isfinite(cap);
  if (finite_cap && counted(cap) == 0) return out;

  for (int j = 0; j < count; ++j) {
    // Largest known point with count <= j and smallest with count >= j + 1.
    double a = lo, b = kInf;
    int ca = counted(lo), cb = -1;
    if (guesses && j < static_cast<int>(guesses->size())) {
      const double g = (*guesses)[static_cast<std::size_t>(j)];
      const double d = 1e-6 * std::max(1.0, std::abs(g));
      counted(g - d);
      counted(g + d);
    }
    for (const auto& [E, c] : seen) {
      if (c <= j && E > a) {
        a = E;
        ca = c;
      }
      if (c >= j + 1 && E < b) {
        b = E;
        cb = c;
      }
    }
    if (!std::isfinite(b)) {
      if (finite_cap) {
        if (counted(cap) <= j) break;
        b = cap;
        cb = counted(cap);
      } else {
        double step = std::max(1.0, std::abs(a));
        b = a + step;
        while ((cb = counted(b)) <= j) {
          a = b;
          ca = cb;
          step *= 2;
          b = a + step;
          if (step > 1e12) throw NonConvergence("no upper bracket for level " + std::to_string(j));
        }
      }
    }
    (void)ca;
    while (!(counted(a) == j && cb == j + 1)) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      const int cm = counted(mid);
      if (cm <= j) a = mid;
      else {
        b = mid;
        cb = cm;
      }
    }
    if (finite_cap && b >= cap && counted(a) <= j && cb <= j) break;

    const int m = matching_index(L, b);
    auto f = [&](double E) { return wronskian(L, E, m); };
    double fa = f(a), fb = f(b);
    double E = 0.5 * (a + b);
    bool ok = false;
    if (fa == 0) {
      E = a;
      ok = true;
    } else if (fb == 0) {
      E = b;
      ok = true;
    } else if ((fa > 0) != (fb > 0)) {
      std::uintmax_t iters = 200;
      auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-14 * std::max(1.0, std::abs(x)); };
      const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
      E = 0.5 * (r.first + r.second);
      ok = iters < 200;
    } else {
      // Same sign at both ends: fall back to plain bisection on the count.
      for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        const double mid = 0.5 * (a + b);
        if (counted(mid) <= j) a = mid;
        else b = mid;
      }
      E = 0.5 * (a + b);
      ok = b - a <= 1e-10;
    }
    out.push_back({E, ok});
  }
  return out;
}

// Eigenfunction on the grid, normalized on the line (or half-line).
std::vector<double> eigenfunction(const Line& L, double E) {
  const int m = matching_index(L, E);
  std::vector<double> left, right;
  outward(L, E, m + 1, left);
  inward(L, E, m, right);
  int ref = m;
  if (std::abs(right[static_cast<std::size_t>(m)]) < std::abs(right[static_cast<std::size_t>(m + 1)]) * 1e-3) ref = m + 1;
  const double scale = right[static_cast<std::size_t>(ref)] == 0
                           ? 0
                           : left[static_cast<std::size_t>(ref)] / right[static_cast<std::size_t>(ref)];
  std::vector<double> psi(static_cast<std::size_t>(L.N) + 1);
  for (int i = 0; i <= L.N; ++i)
    psi[static_cast<std::size_t>(i)] = i <= m ? left[static_cast<std::size_t>(i)] : scale * right[static_cast<std::size_t>(i)];
  double peak = 0;
  for (double v : psi) peak = std::max(peak, std::abs(v));
  if (peak > 0 && std::isfinite(peak))
    for (auto& v : psi) v /= peak;
  double norm = 0;
  for (int i = 0; i <= L.N; ++i) {
    const double w = (i == 0 || i == L.N) ? 0.5 : 1.0;
    norm += w * psi[static_cast<std::size_t>(i)] * psi[static_cast<std::size_t>(i)];
  }
  norm *= L.h;
  if (L.start == Start::Even || L.start == Start::Odd) norm *= 2;
  const double s = norm > 0 ? 1.0 / std::sqrt(norm) : 1.0;
  for (auto& v : psi) v *= s;
  return psi;
}

int interior_nodes(const std::vector<double>& psi) {
  double peak = 0;
  for (double v : psi) peak = std::max(peak, std::abs(v));
  const double floor = 1e-7 * peak;
  int nodes = 0, sign = 0;
  for (std::size_t i = 1; i + 1 < psi.size(); ++i) {
    if (std::abs(psi[i]) <= floor) continue;
    const int s = psi[i] > 0 ? 1 : -1;
    if (sign != 0 && s != sign) ++nodes;
    sign = s;
  }
  return nodes;
}

// ---------------------------------------------------------------- problem setup

struct Setup {
  std::function<double(double)> V;
  double k = 2;
  double lo = -kInf, hi = kInf;  // domain
  bool lo_wall = false, hi_wall = false;
  bool radial = false;
  int l = 0;
  double mt = 1;
  bool parity = false;
  double threshold = kInf;
  double far_lo = kInf, far_hi = kInf;
};

Line make_line(const Setup& s, double a, double b, double h, Start start) {
  Line L;
  L.a = a;
  L.h = h;
  L.N = static_cast<int>(std::lround((b - a) / h));
  L.k = s.k;
  L.start = start;
  L.l = s.l;
  L.mt = s.mt;
  L.kv.resize(static_cast<std::size_t>(L.N) + 1);
  for (int i = 0; i <= L.N; ++i) {
    const double x = L.x(i);
    if (s.radial && i == 0) {
      L.kv[0] = kInf;
      continue;
    }
    L.kv[static_cast<std::size_t>(i)] = s.k * s.V(x);
  }
  if (start == Start::Radial) {
    int first = 1;
    while (s.l * (s.l + 1.0) > 6.0 * first * first) ++first;
    L.radial_first = first;
  }
  return L;
}

double far_value(const std::function<double(double)>& V, double x) {
  const double v = V(x);
  if (std::isnan(v)) return kInf;
  return v;
}

bool is_even(const std::function<double(double)>& V) {
  for (int i = 1; i <= 64; ++i) {
    const double x = 0.173 * i;
    const double a = V(x), b = V(-x);
    if (!(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)))) return false;
  }
  return true;
}

Setup setup_for(const ScaledProblem& p) {
  if (p.family == Family::AhmedBIC)
    throw DomainError("AhmedBIC potential is unbounded below; bound states are not computed");
  Setup s;
  s.V = [&p](double x) { return p.potential(x); };
  s.lo = p.domain_lo();
  s.hi = p.domain_hi();
  s.lo_wall = std::isfinite(s.lo);
  s.hi_wall = std::isfinite(s.hi);
  if (!s.lo_wall) s.far_lo = far_value(s.V, -1e6);
  if (!s.hi_wall) s.far_hi = far_value(s.V, 1e6);
  if (s.far_lo == -kInf || s.far_hi == -kInf || s.far_lo < -1e12 || s.far_hi < -1e12)
    throw DomainError("potential is unbounded below; bound states are not computed");
  s.threshold = std::min(s.far_lo, s.far_hi) + 0.0;
  s.parity = !s.lo_wall && !s.hi_wall && is_even(s.V);
  return s;
}

double snap_down(double x, double h) { return std::floor(x / h - 1e-9) * h; }
double snap_up(double x, double h) { return std::ceil(x / h + 1e-9) * h; }

// Outer edge on one side so that the decay integral reaches 20 and the
// potential clears E by 25 where it can.
double required_edge(const Setup& s, double E, double x_turn, int dir, double cap, double h, double bound) {
  const double far = dir > 0 ? s.far_hi : s.far_lo;
  const bool achievable = far - E >= 25;
  double x = x_turn, S = 0;
  double step = 0.01;
  for (int it = 0; it < 1000000; ++it) {
    double xn = x + dir * step;
    if ((dir > 0 && xn >= bound) || (dir < 0 && xn <= bound)) return bound;
    if (std::abs(xn) >= cap) return dir * cap;
    const double gap = s.V(xn) - E;
    if (!(h * h * s.k * gap / 12.0 <= 0.5)) return x;
    const double vm = s.V(0.5 * (x + xn));
    S += std::sqrt(std::max(s.k * (vm - E), 0.0)) * step;
    x = xn;
    if (S >= 20 && (!achievable || gap >= 25)) return x;
    step = std::min(0.5, 0.01 + 0.01 * std::abs(x - x_turn));
  }
  return x;
}

// Furthest point toward `target` from x0 before the Numerov step turns
// unstable at energy E.
double stable_extent(const Setup& s, double E, double x0, double target, double h) {
  const int dir = target > x0 ? 1 : -1;
  double x = x0;
  while (dir * (target - x) > 0) {
    const double xn = dir > 0 ? std::min(target, x + 0.01) : std::max(target, x - 0.01);
    if (!(h * h * s.k * (s.V(xn) - E) / 12.0 <= 0.5)) break;
    x = xn;
  }
  return x;
}

struct Window {
  double a, b;
  bool operator==(const Window&) const = default;
};

struct LevelSet {
  std::vector<BoundState> states;
  bool partial = false;
};

Start left_start(const Setup& s, bool odd) {
  if (s.radial) return Start::Radial;
  if (s.parity) return odd ? Start::Odd : Start::Even;
  return Start::Dirichlet;
}

// All requested levels on a fixed window.
LevelSet solve_window(const Setup& s, const Window& w, int count, double h,
                      const std::vector<BoundState>* guesses = nullptr) {
  LevelSet out;
  const double cap = std::isfinite(s.threshold) ? s.threshold : kInf;
  auto guess_list = [&](int parity_bit) {
    std::optional<std::vector<double>> g;
    if (!guesses) return g;
    g.emplace();
    for (const auto& st : *guesses)
      if (!s.parity || st.n % 2 == parity_bit) g->push_back(st.E);
    return g;
  };
  if (s.parity) {
    const int n_even = (count + 1) / 2, n_odd = count / 2;
    const Line even = make_line(s, 0, w.b, h, Start::Even);
    const Line odd = make_line(s, 0, w.b, h, Start::Odd);
    const auto ev = find_levels(even, n_even, cap, guess_list(0));
    const auto od = n_odd > 0 ? find_levels(odd, n_odd, cap, guess_list(1)) : std::vector<Level>{};
    for (int n = 0; n < count; ++n) {
      const auto& src = n % 2 == 0 ? ev : od;
      const std::size_t j = static_cast<std::size_t>(n / 2);
      if (j >= src.size()) {
        out.partial = true;
        break;
      }
      BoundState st;
      st.n = n;
      st.E = src[j].E;
      st.converged = src[j].converged;
      out.states.push_back(st);
    }
  } else {
    const Line line = make_line(s, w.a, w.b, h, left_start(s, false));
    const auto lv = find_levels(line, count, cap, guess_list(0));
    for (std::size_t j = 0; j < lv.size(); ++j) {
      BoundState st;
      st.n = static_cast<int>(j);
      st.E = lv[j].E;
      st.converged = lv[j].converged;
      out.states.push_back(st);
    }
    out.partial = static_cast<int>(lv.size()) < count;
  }
  return out;
}

Window initial_window(const Setup& s, double h) {
  Window w;
  w.a = s.lo_wall ? s.lo : (s.parity ? 0.0 : -8.0);
  w.b = s.hi_wall ? s.hi : std::max(8.0, w.a + 16 * h);
  if (!s.lo_wall && s.parity) w.a = -w.b;
  if (!s.lo_wall) w.a = snap_down(w.a, h);
  if (!s.hi_wall) w.b = snap_up(w.b, h);
  // Pull open ends in to where the Numerov step stays stable.
  double vmin = kInf;
  const int N = static_cast<int>(std::lround((w.b - w.a) / h));
  for (int i = 0; i <= N; i += 10) {
    const double v = s.V(w.a + i * h);
    if (std::isfinite(v)) vmin = std::min(vmin, v);
  }
  if (std::isfinite(vmin)) {
    auto stable = [&](double x) {
      const double v = s.V(x);
      return std::isfinite(v) && h * h * s.k * (v - vmin) / 12.0 <= 0.5;
    };
    const double mid = s.parity ? 0.0 : 0.5 * (w.a + w.b);
    if (!s.hi_wall)
      while (w.b - mid > 1 && !stable(w.b)) w.b = snap_up(mid + 0.9 * (w.b - mid), h);
    if (!s.lo_wall && !s.parity)
      while (mid - w.a > 1 && !stable(w.a)) w.a = snap_down(mid - 0.9 * (mid - w.a), h);
    if (s.parity) w.a = -w.b;
  }
  return w;
}

Window required_window(const Setup& s, const Window& cur, double E, double h, double cap) {
  Window w = cur;
  // Outermost classically allowed points inside the current window.
  const int N = static_cast<int>(std::lround((cur.b - cur.a) / h));
  double xl = 0.5 * (cur.a + cur.b), xr = xl;
  bool found = false;
  for (int i = 0; i <= N; ++i) {
    const double x = cur.a + i * h;
    if (s.radial && i == 0) continue;
    if (s.V(x) < E) {
      if (!found) xl = x;
      xr = x;
      found = true;
    }
  }
  if (!s.hi_wall) w.b = std::max(cur.b, snap_up(required_edge(s, E, xr, +1, cap, h, s.hi), h));
  if (!s.lo_wall && !s.parity) w.a = std::min(cur.a, snap_down(required_edge(s, E, xl, -1, cap, h, s.lo), h));
  if (s.parity) w.a = -w.b;
  return w;
}

BoundStateResult finish(const Setup& s, const Window& w, double h, int count, LevelSet levels, const SolveOptions& opts,
                        bool auto_window) {
  BoundStateResult res;
  res.threshold = s.threshold;
  res.grid.x_min = w.a;
  res.grid.x_max = w.b;
  res.grid.h = h;
  res.grid.lo = s.radial ? BoundaryTag::RadialRegular : BoundaryTag::Dirichlet;
  res.grid.hi = BoundaryTag::Dirichlet;
  res.partial = levels.partial;

  // Residual from the same window at h/2.
  LevelSet fine = solve_window(s, w, static_cast<int>(levels.states.size()), h / 2, &levels.states);
  for (std::size_t j = 0; j < levels.states.size(); ++j) {
    auto& st = levels.states[j];
    if (j < fine.states.size()) st.residual = std::abs(st.E - fine.states[j].E);
    else {
      st.residual = kInf;
      st.converged = false;
    }
  }

  for (auto& st : levels.states) {
    const Start start = left_start(s, st.n % 2 == 1);
    const Line line = s.parity ? make_line(s, 0, w.b, h, start) : make_line(s, w.a, w.b, h, start);
    std::vector<double> psi = eigenfunction(line, st.E);
    int nodes = interior_nodes(psi);
    if (s.parity) nodes = start == Start::Odd ? 2 * nodes + 1 : 2 * nodes;
    st.nodes = nodes;
    if (opts.keep_wavefunctions) {
      if (s.parity) {
        const double sign = start == Start::Odd ? -1.0 : 1.0;
        for (int i = line.N; i >= 1; --i) {
          st.x.push_back(-line.x(i));
          st.psi.push_back(sign * psi[static_cast<std::size_t>(i)]);
        }
        for (int i = 0; i <= line.N; ++i) {
          st.x.push_back(line.x(i));
          st.psi.push_back(psi[static_cast<std::size_t>(i)]);
        }
      } else {
        for (int i = 0; i <= line.N; ++i) st.x.push_back(line.x(i));
        st.psi = std::move(psi);
      }
    }
  }
  res.states = std::move(levels.states);
  if (res.partial) {
    std::ostringstream note;
    note << "found " << res.states.size() << " of " << count << " states below the threshold "
         << format_double(s.threshold);
    if (auto_window && w.b >= opts.max_extent - 2 * h) note << " (window capped at " << format_double(opts.max_extent) << ")";
    res.note = note.str();
  }
  return res;
}

// ---------------------------------------------------------------- FD backend

std::vector<double> fd_levels(const Setup& s, const Window& w, double h, int count) {
  const double a = s.parity ? -w.b : w.a;
  const int N = static_cast<int>(std::lround((w.b - a) / h));
  const int n = N - 1;
  if (n < count) throw DomainError("finite-difference grid too small");
  std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n > 1 ? n - 1 : 1));
  const double off = -1.0 / (s.k * h * h);
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = 2.0 / (s.k * h * h) + s.V(a + (i + 1) * h);
  for (int i = 0; i + 1 < n; ++i) e[static_cast<std::size_t>(i)] = off;
  lapack_int m = 0, nsplit = 0;
  std::vector<double> wv(static_cast<std::size_t>(n));
  std::vector<lapack_int> iblock(static_cast<std::size_t>(n)), isplit(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dstebz('I', 'E', n, 0.0, 0.0, 1, count, 0.0, d.data(), e.data(), &m, &nsplit,
                                         wv.data(), iblock.data(), isplit.data());
  if (info != 0) throw NonConvergence("dstebz failed with info " + std::to_string(info));
  wv.resize(static_cast<std::size_t>(m));
  return wv;
}

BoundStateResult fd_result(const Setup& s, const Window& w, double h, int count) {
  const auto coarse = fd_levels(s, w, h, count);
  const auto fine = fd_levels(s, w, h / 2, count);
  BoundStateResult res;
  res.threshold = s.threshold;
  res.grid = {s.parity ? -w.b : w.a, w.b, h, s.radial ? BoundaryTag::RadialRegular : BoundaryTag::Dirichlet,
              BoundaryTag::Dirichlet};
  for (int j = 0; j < count; ++j) {
    const double E = (4.0 * fine[static_cast<std::size_t>(j)] - coarse[static_cast<std::size_t>(j)]) / 3.0;
    if (E >= s.threshold) {
      res.partial = true;
      break;
    }
    BoundState st;
    st.n = j;
    st.E = E;
    st.residual = std::abs(fine[static_cast<std::size_t>(j)] - coarse[static_cast<std::size_t>(j)]);
    st.converged = true;
    res.states.push_back(st);
  }
  return res;
}

BoundStateResult solve(const Setup& s, int count, const SolveOptions& opts, std::optional<Window> fixed) {
  if (count < 1) throw DomainError("count must be at least 1");
  const double h = opts.h;
  if (!(h > 0)) throw DomainError("grid step must be positive");
  Window w = fixed ? *fixed : initial_window(s, h);
  LevelSet levels;
  if (!fixed) {
    for (int it = 0; it < 12; ++it) {
      levels = solve_window(s, w, count, h, levels.states.empty() ? nullptr : &levels.states);
      Window next = w;
      if (!levels.states.empty()) next = required_window(s, w, levels.states.back().E, h, opts.max_extent);
      if (levels.partial) {
        // States may be hiding near the threshold: widen the open ends.
        const double E = levels.states.empty() ? s.threshold : levels.states.back().E;
        if (!s.hi_wall)
          next.b = std::max(next.b, snap_down(stable_extent(s, E, w.b, std::min(2 * w.b, opts.max_extent), h), h));
        if (!s.lo_wall && !s.parity)
          next.a = std::min(next.a, snap_up(stable_extent(s, E, w.a, std::max(2 * w.a, -opts.max_extent), h), h));
        if (s.parity) next.a = -next.b;
      }
      if (next == w) break;
      w = next;
    }
  }
  if (opts.backend == Backend::FiniteDifference) return fd_result(s, w, h, count);
  if (fixed) levels = solve_window(s, w, count, h);
  return finish(s, w, h, count, std::move(levels), opts, !fixed);
}

}  // namespace

BoundStateResult bound_states(const ScaledProblem& problem, int count, const SolveOptions& opts) {
  Setup s = setup_for(problem);
  if (!opts.use_parity) s.parity = false;
  return solve(s, count, opts, std::nullopt);
}

BoundStateResult bound_states(const ScaledProblem& problem, const GridSpec& grid, int count,
                              const SolveOptions& opts) {
  grid.validate();
  Setup s = setup_for(problem);
  s.parity = grid.lo == BoundaryTag::ParityEven || grid.lo == BoundaryTag::ParityOdd;
  if (s.parity && grid.x_min != 0) throw DomainError("parity conditions need x_min = 0");
  if (s.parity && !is_even(s.V)) throw DomainError("parity conditions need an even potential");
  SolveOptions o = opts;
  o.h = grid.h;
  return solve(s, count, o, Window{s.parity ? -grid.x_max : grid.x_min, grid.x_max});
}

BoundStateResult radial_hydrogen(double m_tilde, int l, int count, const SolveOptions& opts) {
  if (!(m_tilde > 0 && m_tilde <= 1)) throw DomainError("effective mass must lie in (0, 1]");
  if (l < 0) throw DomainError("angular momentum must be nonnegative");
  Setup s;
  s.k = 2 * m_tilde;
  const double cent = l * (l + 1.0) / (2 * m_tilde);
  s.V = [cent](double x) { return -1.0 / x + cent / (x * x); };
  s.lo = 0;
  s.hi = kInf;
  s.lo_wall = true;
  s.radial = true;
  s.l = l;
  s.mt = m_tilde;
  s.far_hi = 0;
  s.threshold = 0;
  BoundStateResult r = solve(s, count, opts, std::nullopt);
  // Radial quantum number n_r = nodes; principal n = n_r + l + 1.
  return r;
}

int morse_state_count(double lambda) {
  if (!(lambda > 0)) return 0;
  const double s = std::sqrt(2 * lambda) - 0.5;
  if (s <= 0) return 0;
  return static_cast<int>(std::ceil(s));
}

double exact_reference(Family family, const ParamValues& couplings, int n) {
  switch (family) {
    case Family::Box:
      if (n < 1) throw NoSuchState("box states are numbered from n = 1");
      return n * n * std::numbers::pi * std::numbers::pi / 2.0;
    case Family::Harmonic:
      if (n < 0) throw NoSuchState("oscillator states are numbered from n = 0");
      return n + 0.5;
    case Family::Morse: {
      const auto it = couplings.find("lambda");
      if (it == couplings.end()) throw LookupError("Morse reference needs the coupling 'lambda'");
      const double lambda = it->second;
      if (n < 0 || n >= morse_state_count(lambda))
        throw NoSuchState("Morse potential with lambda = " + format_double(lambda) + " has no state n = " +
                          std::to_string(n));
      const double v = n + 0.5;
      return std::sqrt(2 * lambda) * v - v * v / 2;
    }
    default: break;
  }
  throw LookupError(std::string("no closed-form spectrum for ") + family_name(family));
}

Quantity to_physical(double E_tilde, const ScaledProblem& problem) { return problem.to_physical(E_tilde); }

// ---------------------------------------------------------------- scattering

TransmissionResult transmission_closed(double E, double lambda) {
  if (!(E > 0)) throw DomainError("transmission_closed needs E > 0");
  if (!(lambda > 0)) throw DomainError("transmission_closed needs lambda > 0");
  TransmissionResult r{E, lambda, 0, 0};
  if (E < 1) {
    const double a = 4 * E * (1 - E);
    const double s = std::sinh(std::sqrt(2 * lambda * (1 - E)));
    r.T = a / (a + s * s);
    r.R = s * s / (a + s * s);
  } else if (E == 1) {
    r.T = 2 / (2 + lambda);
    r.R = lambda / (2 + lambda);
  } else {
    const double a = 4 * E * (E - 1);
    const double s = std::sin(std::sqrt(2 * lambda * (E - 1)));
    r.T = a / (a + s * s);
    r.R = s * s / (a + s * s);
  }
  return r;
}

TransmissionResult transmission_numeric(const ScaledProblem& problem, double E, double h) {
  if (!(h > 0)) throw DomainError("slice width must be positive");
  const double lo = problem.domain_lo(), hi = problem.domain_hi();
  if (std::isfinite(lo) || std::isfinite(hi)) throw DomainError("scattering needs the whole line");
  auto V = [&](double x) { return problem.potential(x); };
  const double VL = V(-1e6), VR = V(1e6);
  if (!std::isfinite(VL) || !std::isfinite(VR)) throw NoScattering("potential has no finite asymptotic values");

  TransmissionResult res;
  res.E = E;
  const auto lam = problem.couplings.find("lambda");
  res.lambda = lam == problem.couplings.end() ? std::numeric_limits<double>::quiet_NaN() : lam->second;
  if (E <= VL && E <= VR) throw NoScattering("energy below both asymptotic values");
  if (E <= VL) throw NoScattering("energy below the left asymptotic value");
  if (E <= VR) {
    res.T = 0;
    res.R = 1;
    return res;
  }

  // Window: breakpoints if any, otherwise grow until V meets its asymptotes.
  std::vector<double> cuts = problem.ftilde.breakpoints(problem.couplings);
  double a = -8, b = 8;
  if (!cuts.empty()) {
    a = cuts.front();
    b = cuts.back();
  } else {
    auto settled = [&](double x, double v) { return std::abs(V(x) - v) <= 1e-14 * std::max(1.0, std::abs(v)); };
    while (!(settled(a, VL) && settled(b, VR)) && b < 1e4) {
      a *= 2;
      b *= 2;
    }
  }
  std::vector<double> edges{a};
  for (double c : cuts)
    if (c > a && c < b) edges.push_back(c);
  if (b > a) edges.push_back(b);

  struct Slice {
    double width, v;
  };
  std::vector<Slice> slices;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double len = edges[i + 1] - edges[i];
    const int n = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
    const double d = len / n;
    for (int j = 0; j < n; ++j) {
      const double v = V(edges[i] + (j + 0.5) * d);
      if (!slices.empty() && slices.back().v == v) slices.back().width += d;
      else slices.push_back({d, v});
    }
  }
  while (!slices.empty() && slices.front().v == VL) slices.erase(slices.begin());
  while (!slices.empty() && slices.back().v == VR) slices.pop_back();

  const double k = 2.0;
  // (psi, psi') transfer across every slice.
  double M11 = 1, M12 = 0, M21 = 0, M22 = 1;
  for (const auto& s : slices) {
    const double q2 = k * (s.v - E);
    double a11, a12, a21, a22;
    if (q2 > 0) {
      const double q = std::sqrt(q2);
      const double c = std::cosh(q * s.width), sn = std::sinh(q * s.width);
      a11 = c;
      a12 = sn / q;
      a21 = q * sn;
      a22 = c;
    } else if (q2 < 0) {
      const double p = std::sqrt(-q2);
      const double c = std::cos(p * s.width), sn = std::sin(p * s.width);
      a11 = c;
      a12 = sn / p;
      a21 = -p * sn;
      a22 = c;
    } else {
      a11 = 1;
      a12 = s.width;
      a21 = 0;
      a22 = 1;
    }
    const double n11 = a11 * M11 + a12 * M21, n12 = a11 * M12 + a12 * M22;
    const double n21 = a21 * M11 + a22 * M21, n22 = a21 * M12 + a22 * M22;
    M11 = n11;
    M12 = n12;
    M21 = n21;
    M22 = n22;
  }
  const double kL = std::sqrt(k * (E - VL)), kR = std::sqrt(k * (E - VR));
  const double dr = M21 - kL * kR * M12, di = kL * M22 + kR * M11;
  const double nr = M21 + kL * kR * M12, ni = kL * M22 - kR * M11;
  const double denom = dr * dr + di * di;
  res.T = 4 * kL * kR / denom;
  res.R = (nr * nr + ni * ni) / denom;
  return res;
}

// ---------------------------------------------------------------- CSV

std::string csv_header() { return "family,coupling_name,coupling_value,n,E_tilde,E_SI,residual"; }

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const CsvRow& row) {
  std::ostringstream o;
  o << csv_quote(row.family) << ',' << csv_quote(row.coupling_name) << ',' << csv_quote(row.coupling_value) << ','
    << row.n << ',' << format_double(row.E_tilde) << ',' << format_double(row.E_SI) << ','
    << format_double(row.residual);
  return o.str();
}

std::vector<CsvRow> csv_rows(const ScaledProblem& problem, const BoundStateResult& result) {
  std::string names, values;
  for (const auto& [name, v] : problem.couplings) {
    if (!names.empty()) {
      names += ';';
      values += ';';
    }
    names += name;
    values += format_double(v);
  }
  std::vector<CsvRow> rows;
  for (const auto& st : result.states)
    rows.push_back({family_name(problem.family), names, values, st.n, st.E, problem.to_physical(st.E).magnitude,
                    st.residual});
  return rows;
}

}  // namespace scaleqm
