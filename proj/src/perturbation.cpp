#include "scaleqm/perturbation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <thread>

#include "scaleqm/errors.hpp"

namespace scaleqm {

int Polynomial::degree() const {
  for (int d = static_cast<int>(coeffs.size()) - 1; d >= 0; --d)
    if (coeffs[static_cast<std::size_t>(d)] != 0) return d;
  return -1;
}

bool Polynomial::odd_only() const {
  for (std::size_t d = 0; d < coeffs.size(); d += 2)
    if (coeffs[d] != 0) return false;
  return degree() >= 0;
}

std::string Polynomial::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t d = 0; d < coeffs.size(); ++d) {
    if (coeffs[d] == 0) continue;
    if (!first) os << ",";
    os << d << ":" << scaleqm::to_string(coeffs[d]);
    first = false;
  }
  return first ? "0" : os.str();
}

Polynomial Polynomial::monomial(int d, const Rational& c) {
  if (d < 0) throw DomainError("negative polynomial degree");
  Polynomial p;
  p.coeffs.assign(static_cast<std::size_t>(d) + 1, Rational(0));
  p.coeffs[static_cast<std::size_t>(d)] = c;
  return p;
}

Polynomial Polynomial::parse(std::string_view text) {
  Polynomial p;
  std::size_t pos = 0;
  int column = 1;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string term(text.substr(pos, end - pos));
    term.erase(std::remove_if(term.begin(), term.end(), [](unsigned char c) { return std::isspace(c); }), term.end());
    const std::size_t colon = term.find(':');
    if (colon == std::string::npos || colon == 0)
      throw ParseError("polynomial term must read 'degree:coefficient'", 1, column);
    int d = 0;
    try {
      std::size_t used = 0;
      d = std::stoi(term.substr(0, colon), &used);
      if (used != colon || d < 0) throw std::invalid_argument("degree");
    } catch (const std::exception&) {
      throw ParseError("bad polynomial degree '" + term.substr(0, colon) + "'", 1, column);
    }
    Rational c;
    try {
      c = parse_rational(term.substr(colon + 1));
    } catch (const Error&) {
      throw ParseError("bad polynomial coefficient '" + term.substr(colon + 1) + "'", 1, column + static_cast<int>(colon) + 1);
    }
    if (p.coeffs.size() <= static_cast<std::size_t>(d)) p.coeffs.resize(static_cast<std::size_t>(d) + 1, Rational(0));
    p.coeffs[static_cast<std::size_t>(d)] += c;
    column += static_cast<int>(end - pos) + 1;
    pos = end + 1;
  }
  return p;
}

double RationalSeries::value(double lambda) const {
  double s = 0, lp = 1;
  for (const auto& c : coeffs) {
    s += to_double(c) * lp;
    lp *= lambda;
  }
  return s;
}

namespace {

// a + b sqrt(2)
struct QS {
  Rational a, b;
};

QS operator+(const QS& x, const QS& y) { return {x.a + y.a, x.b + y.b}; }
QS operator-(const QS& x, const QS& y) { return {x.a - y.a, x.b - y.b}; }
QS operator*(const QS& x, const QS& y) { return {x.a * y.a + 2 * x.b * y.b, x.a * y.b + x.b * y.a}; }
QS operator*(const QS& x, const Rational& r) { return {x.a * r, x.b * r}; }
bool is_zero(const QS& x) { return x.a == 0 && x.b == 0; }

using QVec = std::vector<QS>;

void check_args(int n, int J, int cap) {
  if (n < 0) throw DomainError("state index must be nonnegative");
  if (J < 0) throw DomainError("order must be nonnegative");
  if (J > cap)
    throw ExactnessCapError("order " + std::to_string(J) + " exceeds the exact-coefficient cap " + std::to_string(cap));
}

// a + a^dagger on the unnormalized basis |m) = sqrt(m!) |m>, where
// a^dagger |m) = |m+1) and a |m) = m |m-1).
QVec ladder_sum(const QVec& u) {
  const std::size_t N = u.size();
  QVec out(N);
  for (std::size_t m = 0; m < N; ++m) {
    if (m > 0) out[m] = out[m] + u[m - 1];
    if (m + 1 < N && !is_zero(u[m + 1])) out[m] = out[m] + u[m + 1] * Rational(static_cast<long long>(m + 1));
  }
  return out;
}

}  // namespace

RationalSeries rs_series(int n, int J, const Polynomial& perturbation, int cap) {
  check_args(n, J, cap);
  const int d = perturbation.degree();
  if (d > kMaxPerturbationDegree)
    throw DomainError("perturbation degree " + std::to_string(d) + " exceeds " + std::to_string(kMaxPerturbationDegree));

  RationalSeries s;
  s.n = n;
  s.order = J;
  s.perturbation = perturbation;
  s.coeffs.push_back(Rational(2 * n + 1, 2));
  if (J == 0) return s;
  if (d < 0) {
    s.coeffs.resize(static_cast<std::size_t>(J) + 1, Rational(0));
    return s;
  }

  // x = (a + a^dagger)/sqrt(2): the x^d coefficient picks up 2^(-d/2).
  std::vector<QS> c(static_cast<std::size_t>(d) + 1);
  for (int k = 0; k <= d; ++k) {
    const Rational& p = perturbation.coeffs[static_cast<std::size_t>(k)];
    if (p == 0) continue;
    const Rational half_pow = Rational(1) / Rational(BigInt(1) << ((k + 1) / 2));
    c[static_cast<std::size_t>(k)] = k % 2 == 0 ? QS{p * half_pow, 0} : QS{0, p * half_pow};
  }
  const std::size_t N = static_cast<std::size_t>(n + J * d + 1);
  auto apply_v = [&](const QVec& u) {
    QVec acc(N), pw = u;
    for (int k = 0; k <= d; ++k) {
      if (k > 0) pw = ladder_sum(pw);
      if (is_zero(c[static_cast<std::size_t>(k)])) continue;
      for (std::size_t m = 0; m < N; ++m)
        if (!is_zero(pw[m])) acc[m] = acc[m] + pw[m] * c[static_cast<std::size_t>(k)];
    }
    return acc;
  };

  std::vector<QVec> psi;
  psi.emplace_back(N);
  psi[0][static_cast<std::size_t>(n)] = QS{1, 0};
  std::vector<QS> E{QS{Rational(2 * n + 1, 2), 0}};
  for (int j = 1; j <= J; ++j) {
    const QVec v = apply_v(psi[static_cast<std::size_t>(j - 1)]);
    const QS Ej = v[static_cast<std::size_t>(n)];
    if (Ej.b != 0) throw ConsistencyError("irrational perturbation coefficient at order " + std::to_string(j));
    E.push_back(Ej);
    s.coeffs.push_back(Ej.a);
    if (j == J) break;
    QVec next(N);
    for (std::size_t m = 0; m < N; ++m) {
      if (m == static_cast<std::size_t>(n)) continue;
      QS r = v[m];
      for (int i = 1; i <= j; ++i) {
        const QS& p = psi[static_cast<std::size_t>(j - i)][m];
        if (!is_zero(p)) r = r - E[static_cast<std::size_t>(i)] * p;
      }
      if (!is_zero(r)) next[m] = r * (Rational(1) / Rational(n - static_cast<long long>(m)));
    }
    psi.push_back(std::move(next));
  }
  return s;
}

RationalSeries hypervirial_series(int n, int J, int cap) {
  check_args(n, J, cap);
  RationalSeries s;
  s.n = n;
  s.order = J;
  s.perturbation = Polynomial::quartic();
  // X[j][s] = order-j coefficient of <x^(2s)>.
  std::vector<std::vector<Rational>> X;
  std::vector<Rational> E;
  for (int j = 0; j <= J; ++j) {
    if (j == 0) E.push_back(Rational(2 * n + 1, 2));
    else E.push_back(X[static_cast<std::size_t>(j - 1)][2] / j);
    if (j == J) break;
    const int smax = J + 2 - j;
    std::vector<Rational> row(static_cast<std::size_t>(smax) + 1, Rational(0));
    row[0] = j == 0 ? Rational(1) : Rational(0);
    for (int t = 1; t <= smax; ++t) {
      // k = 2t - 1:
      // (k+1) X_{k+1} = 2k sum_i E_i X_{k-1} - (2k+4) X_{k+3}' + k(k-1)(k-2)/4 X_{k-3}
      const int k = 2 * t - 1;
      Rational rhs = 0;
      for (int i = 0; i <= j; ++i) {
        const auto& prev = i == 0 ? row : X[static_cast<std::size_t>(j - i)];
        rhs += 2 * k * E[static_cast<std::size_t>(i)] * prev[static_cast<std::size_t>(t - 1)];
      }
      if (j > 0) rhs -= (2 * k + 4) * X[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(t + 1)];
      if (t >= 2) rhs += Rational(k * (k - 1) * (k - 2), 4) * row[static_cast<std::size_t>(t - 2)];
      row[static_cast<std::size_t>(t)] = rhs / (k + 1);
    }
    X.push_back(std::move(row));
  }
  s.coeffs = std::move(E);
  return s;
}

std::vector<double> weak_coupling_eval(const RationalSeries& series, double lambda, int j_max) {
  if (!(lambda >= 0)) throw DomainError("weak-coupling evaluation needs lambda >= 0");
  const int top = std::min(j_max, static_cast<int>(series.coeffs.size()) - 1);
  std::vector<double> out;
  double s = 0, lp = 1;
  for (int j = 0; j <= top; ++j) {
    s += to_double(series.coeffs[static_cast<std::size_t>(j)]) * lp;
    lp *= lambda;
    out.push_back(s);
  }
  return out;
}

std::string series_report(const RationalSeries& series) {
  std::ostringstream os;
  for (std::size_t j = 0; j < series.coeffs.size(); ++j) {
    const Rational& c = series.coeffs[j];
    os << j << ", " << boost::multiprecision::numerator(c) << ", " << boost::multiprecision::denominator(c) << ", "
       << format_double(to_double(c)) << "\n";
  }
  return os.str();
}

ScaledProblem quartic_problem(double lambda, bool quartic_form) {
  if (!(lambda > 0)) throw DomainError("quartic coupling must be positive");
  ScaledProblem p;
  p.family = Family::PolyAnharmonic;
  p.rule = quartic_form ? "QuarticBased" : "HarmonicBalance";
  p.ftilde = parse_expr(quartic_form ? "x^2/(2*lambda^(2/3)) + x^4" : "0.5*x^2 + lambda*x^4");
  p.couplings = {{"lambda", lambda}};
  p.lo = parse_expr("-inf");
  p.hi = parse_expr("inf");
  return p;
}

StrongCouplingProbe strong_coupling_probe(const std::vector<double>& lambdas, int n, int threads,
                                          const SolveOptions& opts) {
  if (lambdas.size() < 3) throw DomainError("strong-coupling probe needs at least three samples");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0)) throw DomainError("coupling samples must be positive");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw DomainError("coupling samples must be increasing");
  }
  if (lambdas.back() < 1e3) throw DomainError("largest coupling sample must be at least 1e3");
  if (n < 0) throw DomainError("state index must be nonnegative");

  const std::size_t K = lambdas.size();
  std::vector<double> ratio(K);
  std::vector<std::string> failure(K);
  auto work = [&](std::size_t i) {
    try {
      const auto r = bound_states(quartic_problem(lambdas[i], true), n + 1, opts);
      if (static_cast<int>(r.states.size()) <= n || !r.states[static_cast<std::size_t>(n)].converged)
        failure[i] = "state " + std::to_string(n) + " did not converge at lambda = " + format_double(lambdas[i]);
      else
        ratio[i] = r.states[static_cast<std::size_t>(n)].E;
    } catch (const Error& e) {
      failure[i] = e.what();
    }
  };
  std::size_t T = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
  T = std::min(T, K);
  if (T <= 1) {
    for (std::size_t i = 0; i < K; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < T; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < K; i += T) work(i);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failure)
    if (!f.empty()) throw NonConvergence(f);

  StrongCouplingProbe p;
  p.n = n;
  p.lambdas = lambdas;
  p.ratios = ratio;
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < K; ++i) {
    if (ratio[i] < ratio[i - 1]) inc = false;
    if (ratio[i] > ratio[i - 1]) dec = false;
  }
  p.monotone = inc || dec;

  // Least squares of ratio = e0 + e1 t, t = lambda^(-2/3), on the top three.
  double st = 0, sr = 0, stt = 0, str = 0;
  for (std::size_t i = K - 3; i < K; ++i) {
    const double t = std::pow(lambdas[i], -2.0 / 3.0);
    st += t;
    sr += ratio[i];
    stt += t * t;
    str += t * ratio[i];
  }
  const double det = 3 * stt - st * st;
  p.e1 = (3 * str - st * sr) / det;
  p.e0 = (sr - p.e1 * st) / 3;
  return p;
}

AtomicSeries atomic_series(int N, int Z, int order) {
  if (order < 0) throw DomainError("order must be nonnegative");
  const ZScaledAtom atom = z_scaled_atom(N, Z);
  AtomicSeries s;
  s.electrons = N;
  s.Z = Z;
  s.order = order;
  s.expression = atom.series_template;
  s.coeffs.assign(static_cast<std::size_t>(order) + 1, std::nullopt);
  if (N == 1) {
    s.coeffs[0] = Rational(-1, 2);
    for (int j = 1; j <= order; ++j) s.coeffs[static_cast<std::size_t>(j)] = Rational(0);
  }
  return s;
}

std::string atomic_series_report(const AtomicSeries& s) {
  std::ostringstream os;
  os << s.expression << "\n";
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
    os << j << ", ";
    if (s.coeffs[j]) {
      const Rational& c = *s.coeffs[j];
      os << boost::multiprecision::numerator(c) << ", " << boost::multiprecision::denominator(c) << ", "
         << format_double(to_double(c));
    } else {
      os << "unknown(N=" << s.electrons << ")";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace scaleqm
