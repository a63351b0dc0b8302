#include "rkpair/derive.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rkpair/errors.hpp"
#include "rkpair/trees.hpp"

namespace rkpair {

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::c2: return "c^2";
    case Kind::c3: return "c^3";
    case Kind::c4: return "c^4";
    case Kind::cp_c: return "c'c";
    case Kind::cp_c2: return "c'c^2";
    case Kind::cp2: return "c'^2";
    case Kind::cpp_c: return "c''c";
  }
  return "?";
}

namespace {

const Rational& require(const Rational& x, const std::string& factor) {
  if (x == 0) throw DegenerateError(factor);
  return x;
}

Rational pw(const Rational& x, int n) {
  Rational r = 1;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

Rational solve_affine(const Rational& f0, const Rational& f1, const std::string& what) {
  const Rational slope = f1 - f0;
  if (slope == 0) throw DegenerateError(what);
  return -f0 / slope;
}

Rational det3(const std::array<std::array<Rational, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

int idx(Kind k) { return static_cast<int>(k); }

struct Rref {
  Matrix<Rational> m;
  std::vector<std::size_t> pivots;
};

Rref rref(Matrix<Rational> m) {
  Rref out;
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  std::size_t r = 0;
  for (std::size_t col = 0; col < cols && r < rows; ++col) {
    std::size_t piv = r;
    while (piv < rows && m[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[r]);
    const Rational inv = 1 / m[r][col];
    for (auto& x : m[r]) x *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][col] == 0) continue;
      const Rational f = m[i][col];
      for (std::size_t j = col; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    out.pivots.push_back(col);
    ++r;
  }
  out.m = std::move(m);
  return out;
}

// Rows 1..4 of the first row of M: gamma_4 + 5 c''4 eta.
std::array<Rational, 4> first_row(const AuxQuantities& x, const Rational& cpp4) {
  return {x.g(4, Kind::c2) + 5 * cpp4 * x.e(Kind::c2), x.g(4, Kind::c3) + 5 * cpp4 * x.e(Kind::c3),
          x.g(4, Kind::cp_c) + 5 * cpp4 * x.e(Kind::cp_c), x.gamma_ac2 + 5 * cpp4 * x.eta_ac2};
}

template <class T>
Matrix<T> condition_matrix(const Coefficients<T>& k) {
  Matrix<T> rows;
  for (const auto& e : enumerate_trees(4)) rows.push_back(elementary_weight(e.tree, k.a));
  return rows;
}

}  // namespace

int rank(Matrix<Rational> m) { return static_cast<int>(rref(std::move(m)).pivots.size()); }

AuxQuantities aux_quantities(const Vector<Rational>& c, const Vector<Rational>& cp,
                             const Vector<Rational>& cpp) {
  if (c.size() < 7 || cp.size() < 7 || cpp.size() < 7) {
    throw StructuralError("aux_quantities needs stage vectors of length 7");
  }
  AuxQuantities x;
  const Rational& c2 = c[1];
  const Rational& c3 = c[2];
  const Rational& c4 = c[3];
  const Rational& cp3 = cp[2];
  const Rational& cpp4 = cpp[3];
  for (int m = 4; m <= 7; ++m) {
    const std::size_t i = static_cast<std::size_t>(m - 1);
    auto& g = x.gamma[m - 4];
    for (int n = 1; n <= 3; ++n) {
      g[n - 1] = cp3 * c[i] * (pw(c[i], n) - pw(c2, n)) - cp[i] * c3 * (pw(c3, n) - pw(c2, n));
    }
    g[idx(Kind::cp_c)] = cp[i] * (c[i] - c3);
    g[idx(Kind::cp_c2)] = cp[i] * (c[i] * c[i] - c3 * c3);
    g[idx(Kind::cp2)] = cp[i] * (cp[i] - cp3);
    g[idx(Kind::cpp_c)] = cpp[i] * (c[i] - c4);
  }
  for (int m = 4; m <= 7; ++m) {
    const std::size_t i = static_cast<std::size_t>(m - 1);
    for (int k = 0; k < 7; ++k) {
      x.lambda[m - 4][k] = cpp4 * x.gamma[m - 4][k] - cpp[i] * x.gamma[0][k];
    }
    auto& u = x.mu[m - 4];
    const auto& g = x.gamma[m - 4];
    for (int n = 1; n <= 3; ++n) {
      u[n - 1] = g[n - 1] + 4 * cpp[i] * (c3 * (pw(c3, n) - pw(c2, n)) +
                                         3 * cp3 * (pw(c2, n) - Rational(2, n + 2)));
    }
    u[idx(Kind::cp_c)] = g[idx(Kind::cp_c)] + 4 * cpp[i] * (c3 - Rational(3, 4));
    u[idx(Kind::cp_c2)] = g[idx(Kind::cp_c2)] + 4 * cpp[i] * (c3 * c3 - Rational(3, 5));
    u[idx(Kind::cp2)] = g[idx(Kind::cp2)] + 4 * cpp[i] * (cp3 - Rational(3, 10));
    u[idx(Kind::cpp_c)] = cpp[i] * (c[i] - Rational(4, 5));
  }
  for (int n = 1; n <= 3; ++n) {
    x.eta[n - 1] = c3 * (pw(c3, n) - pw(c2, n)) + 4 * cp3 * (pw(c2, n) - Rational(3, 4 * n + 2));
  }
  x.eta[idx(Kind::cp_c)] = c3 - Rational(3, 5);
  x.gamma_ac2 = cpp4 * c3 * (c3 - c2);
  x.eta_ac2 = cp3 * (c2 - Rational(2, 5));
  return x;
}

ConstructionMatrix construction_matrix(const ExtendedNodes& nodes) {
  const AuxQuantities x = aux_quantities(nodes.c, nodes.cp, nodes.cpp);
  const Rational& cpp4 = nodes.cpp[3];
  const Rational& c2 = nodes.c[1];
  const Rational& c3 = nodes.c[2];
  ConstructionMatrix out;
  auto& m = out.m;
  const auto r1 = first_row(x, cpp4);
  for (int j = 0; j < 4; ++j) m[0][j] = r1[j];
  m[1] = {x.u(4, Kind::c2), x.u(4, Kind::c3), x.u(4, Kind::cp_c), cpp4 * x.e(Kind::c2)};
  const Rational g4 = x.g(4, Kind::c2);
  m[2] = {x.l(5, Kind::c2), x.l(5, Kind::c3), x.l(5, Kind::cp_c), nodes.cppp5 * g4};
  m[3] = {x.l(6, Kind::c2), x.l(6, Kind::c3), x.l(6, Kind::cp_c),
          nodes.cppp6 * g4 + nodes.a65 * x.l(5, Kind::c2)};
  m[4] = {x.l(7, Kind::c2), x.l(7, Kind::c3), x.l(7, Kind::cp_c),
          (g4 - x.u(4, Kind::c2)) / 24};

  Matrix54 t = m;
  for (auto& row : t) row[1] -= (c2 + c3) * row[0];
  if (cpp4 != 0 && c2 != 0) {
    const std::array<Rational, 3> cppm = {nodes.cpp[4], nodes.cpp[5], nodes.cpp[6]};
    for (int r = 2; r <= 4; ++r) {
      for (int j = 0; j < 4; ++j) t[r][j] = (t[r][j] + cppm[r - 2] * t[0][j]) / cpp4;
    }
    for (int j = 0; j < 4; ++j) t[1][j] = (t[0][j] - t[1][j]) / cpp4;
    for (int j = 0; j < 4; ++j) t[4][j] = (t[1][j] - 3 * t[4][j]) / c2;
    for (int j = 0; j < 4; ++j) t[1][j] += 2 * (1 - 4 * c2) * t[4][j];
  }
  out.reduced = t;
  return out;
}

Rational cp_from_node(const Rational& c2, const Rational& c3, const Rational& cp3,
                      const Rational& cm, const Rational& cppm) {
  const Rational s = c3 * c3 - 2 * cp3;
  const Rational den = pw(c3, 3) * (cm - c2) - c2 * (cm - c3) * s;
  require(den, "c3^3 (c_m - c2) - c2 (c_m - c3)(c3^2 - 2c'3)");
  return (cp3 * c3 * cm * cm * (cm - c2) + 3 * cppm * (c3 - c2) * s) / den;
}

ExtendedNodes extended_nodes(const GeneralParams& p) {
  const Rational &c2 = p.c2, &c3 = p.c3, &c4 = p.c4, &c5 = p.c5, &c6 = p.c6, &cp3 = p.cp3;
  require(c2, "c2");
  require(cp3, "c'3");
  const Vector<Rational> c = {0, c2, c3, c4, c5, c6, 1};
  const Rational den = c4 * (2 * cp3 * cp3 * c2 + c3 * pw(c3 - c2, 2) * (c3 * c3 - 2 * cp3)) -
                       cp3 * c2 * c3 * (2 * cp3 - c3 * (c3 - c2));
  require(den, "c'4 denominator");
  const Rational cp4 =
      cp3 * c4 * c4 * (c4 - c2) * (c3 * c3 * (c3 - c2) + cp3 * (3 * c2 - 2 * c3)) / den;
  const Rational cpp4 = cp3 * cp3 * c2 * c4 * c4 * (c4 - c2) * (c4 - c3) / den;
  require(cpp4, "c''4");

  struct Stage {
    Vector<Rational> cp, cpp;
    AuxQuantities x;
  };
  auto build = [&](const Rational& cpp5, const Rational& cpp6) {
    Stage s;
    s.cpp = {0, 0, 0, cpp4, cpp5, cpp6, Rational(1, 6)};
    s.cp = {0,   0,  cp3, cp4, cp_from_node(c2, c3, cp3, c5, cpp5),
            cp_from_node(c2, c3, cp3, c6, cpp6), Rational(1, 2)};
    s.x = aux_quantities(c, s.cp, s.cpp);
    return s;
  };
  auto third_order = [&](const AuxQuantities& x) {
    const Rational m11 = require(first_row(x, cpp4)[0], "m11");
    const Rational g4 = require(x.g(4, Kind::c2), "gamma_{4,c^2}");
    const Rational m14 = first_row(x, cpp4)[3];
    return x.l(5, Kind::c2) * m14 / (g4 * m11);
  };

  // c''5 from q3 = 0 (row 3 of the reduced matrix in the span of rows 2, 5).
  auto q3 = [&](const Rational& cpp5) {
    const Stage s = build(cpp5, 0);
    const auto& x = s.x;
    const auto r1 = first_row(x, cpp4);
    const Rational cppp5 = third_order(x);
    const Rational g4 = x.g(4, Kind::c2);
    const Rational m33 = (x.l(5, Kind::cp_c) + cpp5 * r1[2]) / cpp4;
    const Rational m34 = (cppp5 * g4 + cpp5 * r1[3]) / cpp4;
    const Rational m12 = r1[1] - (c2 + c3) * r1[0];
    const Rational m31 = (x.l(5, Kind::c2) + cpp5 * r1[0]) / cpp4;
    const Rational m32 =
        ((x.l(5, Kind::c3) - (c2 + c3) * x.l(5, Kind::c2)) + cpp5 * m12) / cpp4;
    const Rational alpha = m34 / (cp3 * c2);
    const Rational span = m32 + c3 * m31 - alpha * (2 * cp3 * c2 + c3 * c3 * (c3 - c2));
    return std::pair<Rational, Rational>(cp3 * c2 * m33 - c3 * m34, span);
  };
  const auto q0 = q3(0);
  const auto q1 = q3(1);
  Rational cpp5;
  if (q0.first == 0 && q1.first == 0) {
    cpp5 = solve_affine(q0.second, q1.second, "c''5 equation");
  } else {
    cpp5 = solve_affine(q0.first, q1.first, "c''5 equation");
  }

  // c''6, b5, b6 from mu_{4,k}/24 + b5 lambda_{5,k} + b6 lambda_{6,k} = 0.
  using Sys = std::array<std::array<Rational, 3>, 3>;
  auto system = [&](const Rational& cpp6, const std::array<Kind, 3>& kinds) {
    const Stage s = build(cpp5, cpp6);
    Sys m;
    for (int r = 0; r < 3; ++r) {
      m[r] = {s.x.u(4, kinds[r]) / 24, s.x.l(5, kinds[r]), s.x.l(6, kinds[r])};
    }
    return m;
  };
  std::array<Kind, 3> kinds = {Kind::c2, Kind::cp_c, Kind::c4};
  Rational d0 = det3(system(0, kinds));
  Rational d1 = det3(system(1, kinds));
  if (d0 == 0 && d1 == 0) {
    kinds = {Kind::c2, Kind::c4, Kind::cpp_c};
    d0 = det3(system(0, kinds));
    d1 = det3(system(1, kinds));
  }
  const Rational cpp6 = solve_affine(d0, d1, "c''6 equation");
  const Sys sys = system(cpp6, kinds);
  Rational b5, b6;
  bool solved = false;
  for (const auto& [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    const Rational det = sys[i][1] * sys[j][2] - sys[i][2] * sys[j][1];
    if (det == 0) continue;
    b5 = (-sys[i][0] * sys[j][2] + sys[i][2] * sys[j][0]) / det;
    b6 = (-sys[i][1] * sys[j][0] + sys[i][0] * sys[j][1]) / det;
    solved = true;
    break;
  }
  if (!solved) throw DegenerateError("b5, b6 system determinant");
  require(b6, "b6");

  const Stage fin = build(cpp5, cpp6);
  const Rational cppp5 = require(third_order(fin.x), "c'''5");
  const Rational m11 = first_row(fin.x, cpp4)[0];
  const Rational l5 = require(fin.x.l(5, Kind::c2), "lambda_{5,c^2}");
  const Rational a65 = require(-m11 / (120 * b6 * l5), "a65");
  const Rational cppp6 = (Rational(1, 120) - b5 * cppp5) / b6;

  ExtendedNodes nodes{c, fin.cp, fin.cpp, cppp5, cppp6, a65, b5, b6};
  const auto cm = construction_matrix(nodes);
  Matrix<Rational> mm;
  for (const auto& row : cm.m) mm.emplace_back(row.begin(), row.end());
  if (rank(mm) > 2) throw InconsistentError("construction matrix has rank above 2");
  return nodes;
}

Coefficients<Rational> back_substitute(const ExtendedNodes& n) {
  const auto& c = n.c;
  const auto& cp = n.cp;
  const auto& cpp = n.cpp;
  const Rational c2 = require(c[1], "c2");
  const Rational cp3 = require(cp[2], "c'3");
  const Rational cpp4 = require(cpp[3], "c''4");
  require(n.cppp5, "c'''5");
  require(n.a65, "a65");
  Coefficients<Rational> k;
  k.c = c;
  k.a.assign(7, Vector<Rational>(7, Rational(0)));
  auto& a = k.a;
  a[1][0] = c2;
  a[2][1] = cp3 / c2;
  a[3][2] = cpp4 / cp3;
  a[4][3] = n.cppp5 / cpp4;
  a[4][2] = (cpp[4] - a[4][3] * cp[3]) / cp3;
  a[5][4] = n.a65;
  a[5][3] = (n.cppp6 - n.a65 * cpp[4]) / cpp4;
  a[5][2] = (cpp[5] - a[5][3] * cp[3] - n.a65 * cp[4]) / cp3;
  a[3][1] = (cp[3] - a[3][2] * c[2]) / c2;
  a[4][1] = (cp[4] - a[4][2] * c[2] - a[4][3] * c[3]) / c2;
  a[5][1] = (cp[5] - a[5][2] * c[2] - a[5][3] * c[3] - n.a65 * c[4]) / c2;
  for (std::size_t i = 2; i < 6; ++i) {
    Rational s = 0;
    for (std::size_t j = 1; j < i; ++j) s += a[i][j];
    a[i][0] = c[i] - s;
  }
  auto& b = k.b;
  b.assign(7, Rational(0));
  b[4] = n.b5;
  b[5] = n.b6;
  b[3] = (Rational(1, 24) - n.b5 * cpp[4] - n.b6 * cpp[5]) / cpp4;
  b[2] = (Rational(1, 6) - b[3] * cp[3] - n.b5 * cp[4] - n.b6 * cp[5]) / cp3;
  b[1] = (Rational(1, 2) - b[2] * c[2] - b[3] * c[3] - n.b5 * c[4] - n.b6 * c[5]) / c2;
  b[0] = 1 - (b[1] + b[2] + b[3] + b[4] + b[5]);
  a[6] = b;
  k.d.assign(7, Rational(0));
  return k;
}

Vector<Rational> normalize_d(Vector<Rational> d) {
  Rational big = 0;
  for (const auto& x : d) big = std::max(big, Rational(abs(x)));
  if (big == 0) return d;
  Rational scale = 1 / big;
  for (const auto& x : d) {
    if (x != 0) {
      if (x < 0) scale = -scale;
      break;
    }
  }
  for (auto& x : d) x *= scale;
  return d;
}

DSolution solve_d(const Coefficients<Rational>& k) {
  const Rref r = rref(condition_matrix(k));
  const std::size_t s = k.stages();
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < s; ++j) {
    if (std::find(r.pivots.begin(), r.pivots.end(), j) == r.pivots.end()) free.push_back(j);
  }
  if (free.empty()) {
    throw InconsistentError("the order-4 conditions on d admit only d = 0");
  }
  Vector<Rational> d(s, Rational(0));
  const std::size_t f = free.front();
  d[f] = 1;
  for (std::size_t row = 0; row < r.pivots.size(); ++row) d[r.pivots[row]] = -r.m[row][f];
  return {normalize_d(std::move(d)), free.size() > 1};
}

DSolutionFloat solve_d(const Coefficients<double>& k) {
  const Matrix<double> rows = condition_matrix(k);
  const std::size_t s = k.stages();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(std::max(rows.size(), s)),
                    static_cast<Eigen::Index>(s));
  m.setZero();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * sv(0);
  int nullity = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= tol) ++nullity;
  }
  if (nullity == 0) throw InconsistentError("the order-4 conditions on d admit only d = 0");
  const Eigen::VectorXd v = svd.matrixV().col(static_cast<Eigen::Index>(s) - 1);
  Vector<double> d(v.data(), v.data() + v.size());
  double big = 0;
  for (double x : d) big = std::max(big, std::abs(x));
  double scale = 1 / big;
  for (double x : d) {
    if (std::abs(x) > 1e-14 * big) {
      if (x < 0) scale = -scale;
      break;
    }
  }
  for (auto& x : d) x *= scale;
  return {d, nullity > 1};
}

ButcherPair construct_general(const GeneralParams& params, const std::string& name,
                              const std::string& family) {
  Coefficients<Rational> k = back_substitute(extended_nodes(params));
  k.d = solve_d(k).d;
  return ButcherPair(std::move(k), name, family, "general six-parameter construction");
}

Rational c4_six_stage(const Rational& c2, const Rational& c3, const Rational& cp3) {
  const Rational t = c3 * (c3 - c2);
  const Rational den = pw(2 * cp3 * (1 - 2 * c2) - t, 2) + 4 * cp3 * cp3 * c2 * c2;
  require(den, "(2c'3(1 - 2c2) - c3(c3 - c2))^2 + 4c'3^2 c2^2");
  return cp3 * c2 * (2 * cp3 - t) / den;
}

Rational family_cp3(FamilyType type, const Rational& c2, const Rational& c3) {
  if (type == FamilyType::A) return c3 * c3 / 2;
  const Rational e2 = require(3 - 12 * c2 + 10 * c2 * c2, "3 - 12c2 + 10c2^2");
  return 3 * (c3 - c2) * (c2 + c3 - 4 * c2 * c3) / (2 * e2);
}

namespace {

template <class T>
std::array<T, 3> type_c_coefficients(const T& c2, const T& c3, const T& c5, const T& c6) {
  auto z = [&](double a0, double a1, double a2) {
    return T(a0) - T(a1) * (c5 + c6) + T(a2) * c5 * c6;
  };
  const T e2 = T(3) - T(12) * c2 + T(10) * c2 * c2;
  const T a2 = (T(2) + T(10) * c2 * c3) * z(12, 15, 20) - T(15) * c2 * z(3, 4, 6) -
               T(2) * c3 * z(33, 40, 50);
  const T a1 = (T(12) + T(50) * c2 * c2) * (z(12, 15, 20) - c3 * z(33, 40, 50)) -
               T(3) * c2 * z(207, 260, 350) + T(2) * c2 * c3 * z(852, 1035, 1300);
  const T a0 = T(3) * z(12, 15, 20) - T(3) * (c2 + c3) * z(33, 40, 50) +
               T(2) * c2 * c3 * z(138, 165, 200);
  // Quadratic in u = c'3 / (c3 (c3 - c2)).
  return {a0, -a1, a2 * T(2) * e2};
}

}  // namespace

std::vector<Root> type_c_roots(const Rational& c2, const Rational& c3, const Rational& c5,
                               const Rational& c6) {
  const auto [a0, a1, a2] = type_c_coefficients<Rational>(c2, c3, c5, c6);
  const Rational w = c3 * (c3 - c2);
  if (a2 == 0) {
    if (a1 == 0) {
      if (a0 == 0) throw DegenerateError("type C quadratic coefficients");
      return {};
    }
    const Rational r = -w * a0 / a1;
    return {Root{to_double(r), r}};
  }
  const Rational disc = a1 * a1 - 4 * a2 * a0;
  if (disc < 0) return {};
  std::vector<Root> out;
  if (const auto sq = exact_sqrt(disc)) {
    for (int sign : {1, -1}) {
      const Rational r = w * (-a1 + sign * *sq) / (2 * a2);
      out.push_back({to_double(r), r});
    }
    return out;
  }
  const Rational sq = sqrt_approx(disc, 256);
  for (int sign : {1, -1}) {
    out.push_back({to_double(w * (-a1 + sign * sq) / (2 * a2)), std::nullopt});
  }
  return out;
}

std::vector<double> type_c_roots(double c2, double c3, double c5, double c6) {
  const auto [a0, a1, a2] = type_c_coefficients<double>(c2, c3, c5, c6);
  const double w = c3 * (c3 - c2);
  if (a2 == 0) {
    if (a1 == 0) return {};
    return {-w * a0 / a1};
  }
  const double disc = a1 * a1 - 4 * a2 * a0;
  if (disc < 0) return {};
  const double sq = std::sqrt(disc);
  // Cancellation-free pair of roots, "+" branch first.
  const double qv = -0.5 * (a1 + (a1 >= 0 ? sq : -sq));
  double plus, minus;
  if (a1 >= 0) {
    minus = qv / a2;
    plus = qv != 0 ? a0 / qv : 0.0;
  } else {
    plus = qv / a2;
    minus = qv != 0 ? a0 / qv : 0.0;
  }
  return {w * plus, w * minus};
}

namespace {

// Nodes assembled from closed-form c', c'', c''' and b6 c'''6, b6 a65 c'''5.
ExtendedNodes closed_nodes(Vector<Rational> c, Vector<Rational> cp, Vector<Rational> cpp,
                           const Rational& cppp5, const Rational& cppp6,
                           const Rational& b6_cppp6, const Rational& b6_a65_cppp5) {
  require(cppp5, "c'''5");
  require(cppp6, "c'''6");
  const Rational b6 = require(b6_cppp6 / cppp6, "b6");
  const Rational b5 = (Rational(1, 120) - b6_cppp6) / cppp5;
  const Rational a65 = require(b6_a65_cppp5 / (b6 * cppp5), "a65");
  return ExtendedNodes{std::move(c), std::move(cp), std::move(cpp), cppp5, cppp6, a65, b5, b6};
}

ButcherPair finish(Coefficients<Rational> k, const std::string& family, const std::string& src) {
  k.d = solve_d(k).d;
  return ButcherPair(std::move(k), "", family, src);
}

ButcherPair closed_form_a(const FamilyA& f) {
  const Rational &c2 = f.c2, &c3 = f.c3, &c5 = f.c5, &c6 = f.c6;
  require(c2, "c2");
  const Rational w = require(1 - 4 * c3 + 5 * c3 * c3, "1 - 4c3 + 5c3^2");
  const Rational e = require(3 - 12 * c3 + 10 * c3 * c3, "3 - 12c3 + 10c3^2");
  const Rational c4 = c3 / (2 * w);
  const Vector<Rational> c = {0, c2, c3, c4, c5, c6, 1};
  Vector<Rational> cp(7, Rational(0)), cpp(7, Rational(0));
  for (int m = 2; m <= 5; ++m) cp[m] = c[m] * c[m] / 2;
  cp[6] = Rational(1, 2);
  for (int m = 3; m <= 5; ++m) {
    cpp[m] = c[m] * (c[m] - c3) * (c3 + c[m] - 4 * c3 * c[m]) / (2 * e);
  }
  cpp[6] = Rational(1, 6);
  const Rational cppp5 = c3 * c5 * (c5 - c3) * (c5 - c4) / (4 * e);
  const Rational g = 8 * c3 - 15 * c3 * c3 - 4 * c5 * w + 2 * c6 * (2 - 13 * c3 + 20 * c3 * c3);
  const Rational f5 = require(8 - 15 * c3 - 10 * c5 + 20 * c3 * c5, "8 - 15c3 - 10c5 + 20c3c5");
  const Rational cppp6 = g * c6 * (c6 - c3) * (c6 - c4) / (4 * e * f5);
  const Rational k6 = c4 * (2 - 5 * c3) / 240;
  const Rational b6cppp6 = g / (480 * require(c6 - c5, "c6 - c5") * w);
  return finish(back_substitute(closed_nodes(c, cp, cpp, cppp5, cppp6, b6cppp6, k6)), "A",
                "type A closed forms");
}

ButcherPair closed_form_b(const FamilyB& f) {
  const Rational &c2 = f.c2, &c3 = f.c3, &c5 = f.c5, &c6 = f.c6;
  require(c2, "c2");
  const Rational e2 = require(3 - 12 * c2 + 10 * c2 * c2, "3 - 12c2 + 10c2^2");
  const Rational e3 = require(3 - 12 * c3 + 10 * c3 * c3, "3 - 12c3 + 10c3^2");
  const Rational s = c2 + c3 - 4 * c2 * c3;
  const Rational g = require(e2 * e3 + 15 * s * s, "g");
  const Rational c4 = 3 * (3 - 10 * c2 * c3) * s / (2 * g);
  const Vector<Rational> c = {0, c2, c3, c4, c5, c6, 1};
  Vector<Rational> cp(7, Rational(0)), cpp(7, Rational(0));
  for (int m = 2; m <= 5; ++m) {
    cp[m] = 3 * (c[m] - c2) * (c2 + c[m] - 4 * c2 * c[m]) / (2 * e2);
  }
  cp[6] = Rational(1, 2);
  for (int m = 3; m <= 5; ++m) {
    const Rational h = 3 * c2 + 3 * c3 + 3 * c[m] - 12 * c2 * c3 - 12 * c2 * c[m] -
                       12 * c3 * c[m] + 38 * c2 * c3 * c[m];
    cpp[m] = (c[m] - c2) * (c[m] - c3) * h / (2 * e2 * e3);
  }
  cpp[6] = Rational(1, 6);
  const Rational cppp5 = 3 * (c5 - c2) * (c5 - c3) * (c5 - c4) * s / (4 * e2 * e3);
  const Rational t = 24 - 45 * c2 - 45 * c3 + 100 * c2 * c3;
  const Rational p = require(t - 10 * (3 - 6 * c2 - 6 * c3 + 14 * c2 * c3) * c5, "p");
  const Rational q = 3 * s * t - (4 * e2 * e3 + 60 * s * s) * c5 +
                     (4 * e2 * e3 - 30 * s * (3 - 8 * c2 - 8 * c3 + 22 * c2 * c3)) * c6;
  const Rational cppp6 = (c6 - c2) * (c6 - c3) * (c6 - c4) * q / (4 * e2 * e3 * p);
  const Rational k6 = s * (6 - 15 * c2 - 15 * c3 + 40 * c2 * c3) / (160 * g);
  const Rational b6cppp6 = q / (480 * require(c6 - c5, "c6 - c5") * g);
  return finish(back_substitute(closed_nodes(c, cp, cpp, cppp5, cppp6, b6cppp6, k6)), "B",
                "type B closed forms");
}

// Intermediates shared by both c3 = 0 and c3 = c2 closed forms.
struct PrimeCommon {
  Rational p, q, cppp5, cppp6, k6, b6cppp6;
};

PrimeCommon prime_common(const Rational& c2, const Rational& c4, const Rational& c5) {
  PrimeCommon o;
  o.p = require(3 - 5 * c2 - 5 * c4 + 10 * c2 * c4, "p");
  o.q = require(12 - 15 * c2 - 15 * c4 - 15 * c5 + 20 * c2 * c4 + 20 * c2 * c5 + 20 * c4 * c5 -
                    30 * c2 * c4 * c5,
                "q");
  o.cppp5 = c4 * c5 * (c5 - c2) * (c5 - c4) * (2 - 5 * c2) / (4 * o.p);
  o.cppp6 = (1 - c2) * (1 - c4) * (2 - 2 * c4 - 2 * c5 + 5 * c2 * c4) / (4 * o.q);
  o.k6 = c4 * (2 - 5 * c2) / 240;
  o.b6cppp6 =
      (2 - 2 * c4 - 2 * c5 + 5 * c2 * c4) / (240 * require(1 - c5, "1 - c5"));
  return o;
}

// d2..d4 and d1 from d5, d6, d7.
Vector<Rational> complete_d(const Coefficients<Rational>& k, const Rational& d5,
                            const Rational& d6, const Rational& d7) {
  const auto& a = k.a;
  const Vector<Rational> cp = {0,
                               0,
                               a[2][0] * k.c[0] + a[2][1] * k.c[1],
                               a[3][1] * k.c[1] + a[3][2] * k.c[2],
                               a[4][1] * k.c[1] + a[4][2] * k.c[2] + a[4][3] * k.c[3],
                               a[5][1] * k.c[1] + a[5][2] * k.c[2] + a[5][3] * k.c[3] +
                                   a[5][4] * k.c[4],
                               Rational(1, 2)};
  Vector<Rational> cpp(7, Rational(0));
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < i; ++j) cpp[i] += a[i][j] * cp[j];
  }
  Vector<Rational> d(7, Rational(0));
  d[4] = d5;
  d[5] = d6;
  d[6] = d7;
  d[3] = (-d5 * cpp[4] - d6 * cpp[5] - d7 / 6) / require(cpp[3], "c''4");
  d[2] = (-d[3] * cp[3] - d5 * cp[4] - d6 * cp[5] - d7 / 2) / require(cp[2], "c'3");
  d[1] = (-d[2] * k.c[2] - d[3] * k.c[3] - d5 * k.c[4] - d6 * k.c[5] - d7) /
         require(k.c[1], "c2");
  d[0] = -(d[1] + d[2] + d[3] + d5 + d6 + d7);
  return normalize_d(std::move(d));
}

const int kAlpha[3][4][2] = {{{144, 180}, {180, 228}, {72, 93}, {9, 12}},
                             {{360, 940}, {512, 940}, {222, 366}, {30, 48}},
                             {{200, 1100}, {340, 960}, {162, 360}, {24, 48}}};

ButcherPair closed_form_c(const FamilyBPrimeC3Zero& f) {
  const Rational &c2 = f.c2, &c4 = f.c4, &c5 = f.c5;
  require(c2, "c2");
  Rational sum = 0;
  for (int l = 0; l <= 3; ++l) {
    for (int m = 0; m <= 1; ++m) {
      for (int n = 0; n <= 2; ++n) {
        const Rational term = kAlpha[n][l][m] * pw(5 * c2, l) * pw(c4, m) * pw(c5, n);
        sum += ((l + m + n) % 2 == 0) ? term : Rational(-term);
      }
    }
  }
  const Rational g = 5 * (c2 * c2 + 4 * c4 * c4) * c5 * (3 - 5 * c5) - c2 * c4 * sum;
  const PrimeCommon o = prime_common(c2, c4, c5);
  const Rational w = require(6 - 15 * c2 - 10 * c5 + 30 * c2 * c5, "6 - 15c2 - 10c5 + 30c2c5");
  const Vector<Rational> c = {0, c2, 0, c4, c5, 1, 1};
  Vector<Rational> cp(7, Rational(0)), cpp(7, Rational(0));
  cp[2] = 3 * g / (2 * w * o.p * o.q);
  cp[3] = 3 * c4 * (c4 - c2) / 2;
  cp[4] = 3 * (c5 - c2) * (c5 + c4 * (2 - 5 * c2 - 5 * c5 + 10 * c2 * c5)) / (2 * o.p);
  cp[5] = 3 * (1 - c2) * (4 - 7 * c4 - 5 * c5 + 5 * c2 * c4 + 10 * (1 - c2) * c4 * c5) /
          (2 * o.q);
  cp[6] = Rational(1, 2);
  for (int m = 3; m <= 5; ++m) cpp[m] = cp[m] * c[m] / 3;
  cpp[6] = Rational(1, 6);
  Coefficients<Rational> k =
      back_substitute(closed_nodes(c, cp, cpp, o.cppp5, o.cppp6, o.b6cppp6, o.k6));
  const Rational d5 =
      o.p * (c2 * c4 + (c2 - 2 * c4) * (3 - 5 * c5) + 15 * c2 * (1 - c2) * c4 * (1 - 2 * c5));
  const Rational d6 = o.q * c5 * (c5 - c2) * (c5 - c4) *
                      (4 * c4 - 2 * c2 - 14 * c2 * c4 + 15 * c2 * c2 * c4) /
                      ((1 - c2) * require(1 - c4, "1 - c4"));
  const Rational d7 = 15 * c5 * (c5 - c2) * (c5 - c4) * (1 - c5) *
                      (c2 - 2 * c4 + 8 * c2 * c4 - 10 * c2 * c2 * c4);
  k.d = complete_d(k, d5, d6, d7);
  return ButcherPair(std::move(k), "", "B-prime", "type B' closed forms, c3 = 0");
}

Rational default_cp3_c3c2(const Rational& c2) { return 4 * c2 / 5; }

ButcherPair closed_form_d(const FamilyBPrimeC3C2& f) {
  const Rational &c2 = f.c2, &c5 = f.c5;
  require(c2, "c2");
  const Rational c4 = (3 - 5 * c5) / (5 * require(1 - 2 * c5, "1 - 2c5"));
  const PrimeCommon o = prime_common(c2, c4, c5);
  const Vector<Rational> c = {0, c2, c2, c4, c5, 1, 1};
  Vector<Rational> cp(7, Rational(0)), cpp(7, Rational(0));
  cp[2] = f.cp3 ? *f.cp3 : default_cp3_c3c2(c2);
  for (int m = 3; m <= 5; ++m) cp[m] = c[m] * c[m] / 2;
  cp[6] = Rational(1, 2);
  cpp[3] = c4 * c4 * (c4 - c2) / 2;
  cpp[4] = c5 * (c5 - c2) * (c5 + c4 * (2 - 5 * c2 - 5 * c5 + 10 * c2 * c5)) / (2 * o.p);
  cpp[5] = (1 - c2) * (4 - 7 * c4 - 5 * c5 + 5 * c2 * c4 + 10 * (1 - c2) * c4 * c5) / (2 * o.q);
  cpp[6] = Rational(1, 6);
  const Rational r = require(3 - 10 * c5 + 10 * c5 * c5, "3 - 10c5 + 10c5^2");
  const Rational s = 3 - 12 * c5 + 10 * c5 * c5;
  const Rational b5 = 1 / (12 * require(c5, "c5") * require(1 - c5, "1 - c5") * r);
  const Rational b6 = -s / (12 * (1 - c5) * require(5 * c5 - 2, "5c5 - 2"));
  require(b6, "b6");
  require(o.cppp5, "c'''5");
  const Rational a65 = require(o.k6 / (b6 * o.cppp5), "a65");
  Coefficients<Rational> k = back_substitute(ExtendedNodes{c, cp, cpp, o.cppp5, o.cppp6, a65, b5, b6});
  const Rational d5 = -(1 - c2) * (5 * c5 - 3) * (6 - 15 * c2 - 10 * c5 + 30 * c2 * c5) /
                      (3 * c5 * r);
  const Rational d6 = (12 - 52 * c2 + 45 * c2 * c2 - 5 * c5 * (4 - 18 * c2 + 15 * c2 * c2)) * s /
                      (3 * (5 * c5 - 2));
  const Rational d7 = (1 - c5) * (6 - 29 * c2 + 30 * c2 * c2 - 10 * c5 * (1 - 5 * c2 + 5 * c2 * c2));
  k.d = complete_d(k, d5, d6, d7);
  return ButcherPair(std::move(k), "", "B-prime", "type B' closed forms, c3 = c2");
}

GeneralParams with_unknown(const FamilyBPrimeGeneral& f, const Rational& x) {
  GeneralParams p{f.c2, f.c3, f.c4, f.c5, 1, f.cp3};
  switch (f.unknown) {
    case Unknown::c2: p.c2 = x; break;
    case Unknown::c3: p.c3 = x; break;
    case Unknown::c4: p.c4 = x; break;
    case Unknown::c5: p.c5 = x; break;
    case Unknown::cp3: p.cp3 = x; break;
  }
  return p;
}

Rational quantize(const Rational& x, unsigned bits) {
  const Integer scaled = numerator(x) * (Integer(1) << bits) / denominator(x);
  return Rational(scaled, Integer(1) << bits);
}

std::string describe(const Rational& x) {
  const std::string exact = format_rational(x);
  if (exact.size() <= 24) return exact;
  std::ostringstream out;
  out.precision(17);
  out << to_double(x);
  return out.str();
}

}  // namespace

BPrimeSolution solve_bprime(const FamilyBPrimeGeneral& f) {
  constexpr unsigned kBits = 110;
  auto evaluate = [&](const Rational& x, Coefficients<Rational>* out) {
    Coefficients<Rational> k = back_substitute(extended_nodes(with_unknown(f, x)));
    Vector<Rational> cp(7, Rational(0));
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < i; ++j) cp[i] += k.a[i][j] * k.c[j];
    }
    Rational r = -Rational(1, 20);
    for (std::size_t i = 0; i < 7; ++i) r += k.b[i] * cp[i] * cp[i];
    if (out) *out = std::move(k);
    return r;
  };
  Rational lo = std::min(f.lo, f.hi);
  Rational hi = std::max(f.lo, f.hi);
  if (lo == hi) throw RangeError("empty root-finding bracket");
  Rational flo = evaluate(lo, nullptr);
  Rational fhi = evaluate(hi, nullptr);
  BPrimeSolution sol;
  auto done = [&](const Rational& x) {
    sol.root = x;
    sol.root_value = to_double(x);
    sol.residual = to_double(evaluate(x, &sol.tableau));
    sol.tableau.d = solve_d(sol.tableau).d;
    return sol;
  };
  if (flo == 0) return done(lo);
  if (fhi == 0) return done(hi);
  if ((flo < 0) == (fhi < 0)) {
    throw NoSolutionError("b.(c'*c') - 1/20 has no sign change on [" + describe(lo) + ", " +
                          describe(hi) + "]");
  }
  // Illinois variant of regula falsi on dyadic iterates; bisection when the
  // secant point leaves the bracket or hits a degenerate parameter.
  int side = 0;
  const Rational eps = Rational(1, Integer(1) << (kBits - 8));
  for (sol.iterations = 0; sol.iterations < 400; ++sol.iterations) {
    if (hi - lo <= eps) break;
    Rational x = quantize(hi - fhi * (hi - lo) / (fhi - flo), kBits);
    if (x <= lo || x >= hi) x = quantize((lo + hi) / 2, kBits);
    if (x <= lo || x >= hi) break;
    Rational fx;
    try {
      fx = evaluate(x, nullptr);
    } catch (const DegenerateError&) {
      x = quantize((lo + hi) / 2 + (hi - lo) / 7, kBits);
      fx = evaluate(x, nullptr);
    }
    if (fx == 0) return done(x);
    if ((fx < 0) == (flo < 0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi /= 2;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo /= 2;
      side = 1;
    }
  }
  const Rational a = evaluate(lo, nullptr);
  const Rational b = evaluate(hi, nullptr);
  return done(abs(a) <= abs(b) ? lo : hi);
}

ButcherPair construct_family_general(const FamilySpec& spec) {
  return std::visit(
      [](const auto& f) -> ButcherPair {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, FamilyA> || std::is_same_v<F, FamilyB>) {
          const FamilyType t = std::is_same_v<F, FamilyA> ? FamilyType::A : FamilyType::B;
          const Rational cp3 = family_cp3(t, f.c2, f.c3);
          require(cp3, "c'3");
          const Rational c4 = c4_six_stage(f.c2, f.c3, cp3);
          return construct_general({f.c2, f.c3, c4, f.c5, f.c6, cp3}, "",
                                   t == FamilyType::A ? "A" : "B");
        } else if constexpr (std::is_same_v<F, FamilyC>) {
          const auto roots = type_c_roots(f.c2, f.c3, f.c5, f.c6);
          if (roots.empty()) throw NoSolutionError("type C quadratic has no real root");
          const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(f.branch),
                                                      roots.size() - 1);
          if (roots[i].exact) {
            const Rational c4 = c4_six_stage(f.c2, f.c3, *roots[i].exact);
            return construct_general({f.c2, f.c3, c4, f.c5, f.c6, *roots[i].exact}, "", "C");
          }
          // Irrational root: exact construction at a 200-bit approximation, then rounded.
          const auto [a0, a1, a2] = type_c_coefficients<Rational>(f.c2, f.c3, f.c5, f.c6);
          const Rational sq = sqrt_approx(a1 * a1 - 4 * a2 * a0, 200);
          const Rational cp3 =
              f.c3 * (f.c3 - f.c2) * (-a1 + (i == 0 ? sq : Rational(-sq))) / (2 * a2);
          const Rational c4 = c4_six_stage(f.c2, f.c3, cp3);
          const ButcherPair exact =
              construct_general({f.c2, f.c3, c4, f.c5, f.c6, cp3}, "", "C");
          return ButcherPair(exact.float_coefficients(), "", "C",
                             "type C, irrational c'3 = " + describe(cp3));
        } else if constexpr (std::is_same_v<F, FamilyAPrime>) {
          return construct_general({f.c2, f.c3, f.c4, f.c5, 1, f.c3 * f.c3 / 2}, "", "A-prime");
        } else if constexpr (std::is_same_v<F, FamilyBPrimeC3Zero>) {
          return construct_general({f.c2, 0, f.c4, f.c5, 1, closed_form_c(f).exact_coefficients().a[2][1] * f.c2},
                                   "", "B-prime");
        } else if constexpr (std::is_same_v<F, FamilyBPrimeC3C2>) {
          const Rational c4 = (3 - 5 * f.c5) / (5 * require(1 - 2 * f.c5, "1 - 2c5"));
          return construct_general(
              {f.c2, f.c2, c4, f.c5, 1, f.cp3 ? *f.cp3 : default_cp3_c3c2(f.c2)}, "", "B-prime");
        } else {
          const BPrimeSolution s = solve_bprime(f);
          return ButcherPair(s.tableau.template convert<double>(), "", "B-prime",
                             "type B' with solved parameter = " + describe(s.root));
        }
      },
      spec);
}

ButcherPair construct_family(const FamilySpec& spec) {
  if (const auto* a = std::get_if<FamilyA>(&spec)) return closed_form_a(*a);
  if (const auto* b = std::get_if<FamilyB>(&spec)) return closed_form_b(*b);
  if (const auto* c = std::get_if<FamilyBPrimeC3Zero>(&spec)) return closed_form_c(*c);
  if (const auto* d = std::get_if<FamilyBPrimeC3C2>(&spec)) return closed_form_d(*d);
  return construct_family_general(spec);
}

MDiagnostics m_diagnostics(const GeneralParams& params) {
  const ExtendedNodes n = extended_nodes(params);
  const AuxQuantities x = aux_quantities(n.c, n.cp, n.cpp);
  MDiagnostics out;
  Matrix<Rational> big;
  big.push_back({n.b6, Rational(1, 120)});
  for (Kind k : kKinds) {
    big.push_back({x.l(5, k) + 5 * n.cppp5 * x.u(4, k), n.cppp6 * x.l(5, k) - n.cppp5 * x.l(6, k)});
  }
  const auto r1 = first_row(x, n.cpp[3]);
  big.push_back({r1[0], -n.a65 * x.l(5, Kind::c2)});
  big.push_back({r1[1], -n.a65 * x.l(5, Kind::c3)});
  big.push_back({r1[2], -n.a65 * x.l(5, Kind::cp_c)});
  big.push_back({r1[3], -n.a65 * n.cppp5 * x.g(4, Kind::c2)});
  out.rank_12x2 = rank(big);

  const ConstructionMatrix cm = construction_matrix(n);
  Matrix<Rational> mm, top;
  for (std::size_t i = 0; i < 5; ++i) {
    mm.emplace_back(cm.m[i].begin(), cm.m[i].end());
    if (i < 4) top.emplace_back(cm.m[i].begin(), cm.m[i].end());
  }
  out.rank_m = rank(mm);
  out.rank_m_without_row5 = rank(top);
  out.rows_1_3_proportional = rank({mm[0], mm[2]}) <= 1;
  const auto& t = cm.reduced;
  out.rank_invariant = t[4][0] * t[1][3] - t[1][0] * t[4][3];
  out.expected_invariant = params.cp3 * params.cp3 * params.c2;
  const Rational& c2 = params.c2;
  const Rational& c3 = params.c3;
  const Rational& cp3 = params.cp3;
  int qi = 0;
  for (int row : {0, 2, 3}) out.q[qi++] = cp3 * c2 * t[row][2] - c3 * t[row][3];
  out.six_stage_condition = out.rank_m_without_row5 == 1;
  return out;
}

}  // namespace rkpair
