#include "rwavg/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace rwavg {

std::string to_string(Arithmetic a) { return a == Arithmetic::Exact ? "exact" : "float"; }

Arithmetic parse_arithmetic(const std::string& s) {
  if (s == "exact" || s == "exact-rational") return Arithmetic::Exact;
  if (s == "float") return Arithmetic::Float;
  throw SeriesError("unknown arithmetic mode '" + s + "' (expected exact or float)");
}

double ReturnSeries::f_sum() const { return f_sum(horizon); }

double ReturnSeries::f_sum(long upto) const {
  CompensatedSum s;
  for (long n = 1; n <= std::min(upto, horizon); ++n) s.add(f[n]);
  return s.value();
}

namespace {

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Rational& x) { return x.is_zero(); }

template <class T>
T frac(long num, long den) {
  if constexpr (std::is_same_v<T, double>) {
    return static_cast<double>(num) / static_cast<double>(den);
  } else {
    return Rational(num, den);
  }
}

// Finite Markov chain on integer states sorted by distance from the origin.
template <class T>
struct StateChain {
  std::vector<long> dist;
  std::vector<std::size_t> row_start{0};
  std::vector<std::uint32_t> col;
  std::vector<T> prob;
  std::size_t origin = 0;

  void add(std::uint32_t j, T p) {
    col.push_back(j);
    prob.push_back(std::move(p));
  }
  void end_row() { row_start.push_back(col.size()); }
  std::size_t size() const { return dist.size(); }
};

// Forward DP of the free walk (p) and the walk killed at its first return (f).
template <class T>
void run_chain(const StateChain<T>& c, long N, std::vector<T>& p, std::vector<T>& f) {
  const std::size_t n = c.size();
  const long maxd = c.dist.empty() ? 0 : c.dist.back();
  std::vector<std::size_t> prefix(maxd + 2, 0);  // prefix[r] = #states with dist <= r
  for (long r = 0, i = 0; r <= maxd; ++r) {
    while (static_cast<std::size_t>(i) < n && c.dist[i] <= r) ++i;
    prefix[r] = static_cast<std::size_t>(i);
  }
  auto upto = [&](long r) -> std::size_t {
    if (r < 0) return 0;
    return prefix[std::min(r, maxd)];
  };
  std::vector<T> cur(n), nxt(n), tab(n), ntab(n);
  cur[c.origin] = T(1);
  tab[c.origin] = T(1);
  p.assign(N + 1, T(0));
  f.assign(N + 1, T(0));
  p[0] = T(1);
  for (long t = 0; t < N; ++t) {
    const std::size_t src_end = upto(std::min(t, N - t));
    const std::size_t tgt_end = upto(N - t - 1);
    for (std::size_t j = 0; j < tgt_end; ++j) {
      nxt[j] = T(0);
      ntab[j] = T(0);
    }
    for (std::size_t i = 0; i < src_end; ++i) {
      const T& m = cur[i];
      const T& q = tab[i];
      const bool zm = is_zero(m), zq = is_zero(q);
      if (zm && zq) continue;
      for (std::size_t e = c.row_start[i]; e < c.row_start[i + 1]; ++e) {
        const std::uint32_t j = c.col[e];
        if (j >= tgt_end) continue;
        if (!zm) nxt[j] += m * c.prob[e];
        if (!zq) ntab[j] += q * c.prob[e];
      }
    }
    p[t + 1] = tgt_end > c.origin ? nxt[c.origin] : T(0);
    if (tgt_end > c.origin) {
      f[t + 1] = ntab[c.origin];
      ntab[c.origin] = T(0);
    }
    std::swap(cur, nxt);
    std::swap(tab, ntab);
  }
}

template <class T>
StateChain<T> chain_from_ball(const WalkKernel& k, const VertexId& x, long R, std::size_t cap) {
  if (const double lb = k.graph().ball_size_lower_bound(x, R); lb > static_cast<double>(cap)) {
    throw SeriesError("memory guard exceeded: B(" + to_string(x) + ", " + std::to_string(R) + ") has at least " +
                      std::to_string(static_cast<long long>(lb)) +
                      " vertices; lower N or use a family with a symmetry-reduced path");
  }
  Ball b;
  try {
    b = ball(k.graph(), x, R, cap);
  } catch (const GraphError& e) {
    throw SeriesError(std::string("memory guard exceeded: ") + e.what() +
                      "; lower N or use a family with a symmetry-reduced path");
  }
  const auto ix = b.index();
  StateChain<T> c;
  c.dist.reserve(b.size());
  for (auto& m : b.members) c.dist.push_back(m.distance);
  c.origin = 0;
  for (auto& m : b.members) {
    for (auto& [y, pr] : k.template row_as<T>(m.id)) {
      auto it = ix.find(y);
      if (it == ix.end()) continue;
      c.add(static_cast<std::uint32_t>(it->second), pr);
    }
    c.end_row();
  }
  return c;
}

// Distance-from-origin chain for trees that are spherically symmetric about the origin.
template <class T>
StateChain<T> distance_chain(const std::vector<std::int64_t>& deg, long R) {
  StateChain<T> c;
  for (long d = 0; d <= R; ++d) {
    c.dist.push_back(d);
    if (d == 0) {
      if (R >= 1) c.add(1, T(1));
    } else {
      const long dg = static_cast<long>(deg[d]);
      c.add(static_cast<std::uint32_t>(d - 1), frac<T>(1, dg));
      if (d < R && dg > 1) c.add(static_cast<std::uint32_t>(d + 1), frac<T>(dg - 1, dg));
    }
    c.end_row();
  }
  return c;
}

// Radial tree, origin v at level L != 0. State (b, e): the walker hangs e levels below
// the ancestor of v at level b, off the root-v path (e = 0 means on the path).
template <class T>
StateChain<T> radial_pair_chain(const RadialTree& g, std::int64_t L, long R) {
  const std::int64_t bmin = std::max<std::int64_t>(0, L - R);
  const std::int64_t nb = L - bmin + 1;
  std::vector<std::int64_t> offset(nb + 1, 0);
  for (std::int64_t b = bmin; b <= L; ++b) offset[b - bmin + 1] = offset[b - bmin] + (R - (L - b)) + 1;
  const std::int64_t total = offset[nb];
  struct St {
    long d;
    std::int64_t b, e;
  };
  std::vector<St> st;
  st.reserve(total);
  for (std::int64_t b = bmin; b <= L; ++b)
    for (std::int64_t e = 0; e <= R - (L - b); ++e) st.push_back({static_cast<long>((L - b) + e), b, e});
  std::stable_sort(st.begin(), st.end(), [](const St& a, const St& b) { return a.d < b.d; });
  std::vector<std::uint32_t> idx(total);
  for (std::size_t i = 0; i < st.size(); ++i) idx[offset[st[i].b - bmin] + st[i].e] = static_cast<std::uint32_t>(i);
  auto id = [&](std::int64_t b, std::int64_t e) -> std::int64_t {
    if (b < bmin || b > L || e < 0 || e > R - (L - b)) return -1;
    return idx[offset[b - bmin] + e];
  };
  StateChain<T> c;
  c.dist.reserve(st.size());
  for (auto& s : st) c.dist.push_back(s.d);
  c.origin = static_cast<std::size_t>(id(L, 0));
  auto push = [&](std::int64_t j, long num, long den) {
    if (j >= 0 && num > 0) c.add(static_cast<std::uint32_t>(j), frac<T>(num, den));
  };
  for (auto& s : st) {
    const std::int64_t lev = s.b + s.e;
    const long ch = static_cast<long>(g.children(lev));
    const long dg = static_cast<long>(g.level_degree(lev));
    if (s.e > 0) {
      push(id(s.b, s.e - 1), 1, dg);
      push(id(s.b, s.e + 1), ch, dg);
    } else {
      if (s.b > 0) push(id(s.b - 1, 0), 1, dg);
      if (s.b < L) {
        push(id(s.b + 1, 0), 1, dg);
        push(id(s.b, 1), ch - 1, dg);
      } else {
        push(id(s.b, 1), ch, dg);
      }
    }
    c.end_row();
  }
  return c;
}

template <class T>
std::vector<T> renewal_f(const std::vector<T>& p) {
  const long N = static_cast<long>(p.size()) - 1;
  std::vector<T> f(N + 1, T(0));
  for (long n = 1; n <= N; ++n) {
    if constexpr (std::is_same_v<T, double>) {
      CompensatedSum s;
      s.add(p[n]);
      for (long k = 1; k < n; ++k)
        if (f[k] != 0.0 && p[n - k] != 0.0) s.add(-f[k] * p[n - k]);
      double v = s.value();
      if (v < -1e-12) throw SeriesError("renewal produced a negative first-return coefficient at n=" + std::to_string(n));
      f[n] = std::max(v, 0.0);
    } else {
      T v = p[n];
      for (long k = 1; k < n; ++k)
        if (!f[k].is_zero() && !p[n - k].is_zero()) v -= f[k] * p[n - k];
      if (v < 0) throw SeriesError("renewal produced a negative first-return coefficient at n=" + std::to_string(n));
      f[n] = v;
    }
  }
  return f;
}

template <class T>
std::vector<T> hair_p(long c, long N, const std::vector<T>& q) {
  const long R = N / 2;
  const long ylo = c - R, ny = 2 * R + 1, W = N + 2;
  std::vector<T> cur(static_cast<std::size_t>(ny * W)), nxt(static_cast<std::size_t>(ny * W));
  auto at = [&](std::vector<T>& g, long y, long h) -> T& { return g[static_cast<std::size_t>((y - ylo) * W + h)]; };
  at(cur, c, 0) = T(1);
  std::vector<T> p(N + 1, T(0));
  p[0] = T(1);
  const T half = frac<T>(1, 2), sixth = frac<T>(1, 6), twothirds = frac<T>(2, 3);
  for (long t = 0; t < N; ++t) {
    const long src = std::min(t, N - t), rem = N - t - 1;
    const long hmax = t;  // h <= t at time t
    for (long y = c - std::min(rem, R); y <= c + std::min(rem, R); ++y) {
      T* row = &at(nxt, y, 0);
      for (long h = 0; h <= hmax + 1; ++h) row[h] = T(0);
    }
    for (long y = c - src; y <= c + src; ++y) {
      if (y < ylo || y >= ylo + ny) continue;
      const T* s = &at(cur, y, 0);
      const bool up = y > 0;
      const T& w = up ? half : sixth;
      // Live states: h <= t - |y-c| and h of the parity of t - (y-c).
      const long dy = std::abs(y - c), h1 = t - dy;
      if (h1 < 0) continue;
      const long h0 = h1 % 2;
      for (long y2 : {y - 1, y + 1}) {
        if (std::abs(y2 - c) > rem) continue;
        T* d = &at(nxt, y2, 0);
        for (long h = h0; h <= h1; h += 2) {
          if constexpr (std::is_same_v<T, double>) {
            d[h] += s[h] * w;
          } else if (!is_zero(s[h])) {
            d[h] += s[h] * w;
          }
        }
      }
      if (!up && rem >= dy) {
        T* d = &at(nxt, y, 0);
        for (long h = h0; h <= h1; h += 2) {
          if constexpr (std::is_same_v<T, double>) {
            d[h + 1] += s[h] * twothirds;
          } else if (!is_zero(s[h])) {
            d[h + 1] += s[h] * twothirds;
          }
        }
      }
    }
    if (rem >= 0) {
      const T* row = &at(nxt, c, 0);
      T acc(0);
      if constexpr (std::is_same_v<T, double>) {
        CompensatedSum s;
        for (long h = 0; h <= hmax + 1; h += 2) s.add(row[h] * q[h]);
        acc = s.value();
      } else {
        for (long h = 0; h <= hmax + 1; h += 2)
          if (!is_zero(row[h])) acc += row[h] * q[h];
      }
      p[t + 1] = acc;
    }
    std::swap(cur, nxt);
  }
  return p;
}

template <class T>
void fill(ReturnSeries& s, std::vector<T> p, std::vector<T> f) {
  if constexpr (std::is_same_v<T, double>) {
    s.p = std::move(p);
    s.f = std::move(f);
  } else {
    s.p.resize(p.size());
    s.f.resize(f.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      s.p[i] = to_double(p[i]);
      s.f[i] = to_double(f[i]);
    }
    s.p_exact = std::move(p);
    s.f_exact = std::move(f);
  }
}

template <class T>
ReturnSeries compute(const WalkKernel& k, const VertexId& x, long N, const SeriesOptions& opts) {
  ReturnSeries s;
  s.vertex = x;
  s.horizon = N;
  s.mode = std::is_same_v<T, double> ? Arithmetic::Float : Arithmetic::Exact;
  const long R = N / 2;
  const LazyGraph& g = k.graph();
  if (opts.fast_paths && k.simple()) {
    if (auto* zd = dynamic_cast<const ZdGraph*>(&g)) {
      std::vector<T> p;
      if constexpr (std::is_same_v<T, double>) {
        p = zd_return_p(zd->dim(), N);
      } else {
        p = zd_return_p_exact(zd->dim(), N);
      }
      auto f = renewal_f(p);
      s.method = "zd_closed_form";
      s.f_method = "renewal";
      fill<T>(s, std::move(p), std::move(f));
      return s;
    }
    if (g.family() == "hair") {
      if constexpr (std::is_same_v<T, double>) {
        // Heights are reused across averages; horizontal translations are automorphisms.
        static std::mutex mu;
        static std::map<std::pair<long, long>, std::pair<std::vector<double>, std::vector<double>>> cache;
        std::unique_lock<std::mutex> lock(mu);
        auto it = cache.find({x[2], N});
        if (it == cache.end()) {
          lock.unlock();
          auto p = hair_p<double>(x[2], N, zd_return_p(2, N + 1));
          auto f = renewal_f(p);
          lock.lock();
          it = cache.emplace(std::make_pair(static_cast<long>(x[2]), N), std::make_pair(std::move(p), std::move(f))).first;
        }
        s.method = "hair_height_dp";
        s.f_method = "renewal";
        s.p = it->second.first;
        s.f = it->second.second;
        return s;
      }
      std::vector<T> q;
      if constexpr (std::is_same_v<T, double>) {
        q = zd_return_p(2, N + 1);
      } else {
        q = zd_return_p_exact(2, N + 1);
      }
      auto p = hair_p<T>(x[2], N, q);
      auto f = renewal_f(p);
      s.method = "hair_height_dp";
      s.f_method = "renewal";
      fill<T>(s, std::move(p), std::move(f));
      return s;
    }
    if (auto* rt = dynamic_cast<const RadialTree*>(&g)) {
      auto deg = rt->radial_degrees_about(x, R + 1);
      StateChain<T> c;
      if (!deg.empty()) {
        c = distance_chain<T>(deg, R);
        s.method = "radial_distance_chain";
      } else {
        if (static_cast<std::size_t>(R) * static_cast<std::size_t>(R) / 2 > opts.max_states)
          throw SeriesError("memory guard exceeded: radial pair chain too large; lower N");
        c = radial_pair_chain<T>(*rt, x[0], R);
        s.method = "radial_pair_chain";
      }
      std::vector<T> p, f;
      run_chain(c, N, p, f);
      s.f_method = "taboo_dp";
      fill<T>(s, std::move(p), std::move(f));
      return s;
    }
  }
  auto c = chain_from_ball<T>(k, x, R, opts.max_states);
  std::vector<T> p, f;
  run_chain(c, N, p, f);
  s.method = "ball_dp";
  s.f_method = "taboo_dp";
  fill<T>(s, std::move(p), std::move(f));
  return s;
}

}  // namespace

ReturnSeries return_series(const WalkKernel& k, const VertexId& x, long N, Arithmetic mode,
                           const SeriesOptions& opts) {
  if (N < 1) throw SeriesError("return_series: N must be >= 1");
  k.graph().require_valid(x);
  if (mode == Arithmetic::Exact) {
    if (N > opts.exact_cap)
      throw SeriesError("exact mode is capped at N=" + std::to_string(opts.exact_cap) + "; use float mode");
    if (!k.has_exact_rows()) throw SeriesError("kernel has irrational entries; exact mode unavailable");
    return compute<Rational>(k, x, N, opts);
  }
  return compute<double>(k, x, N, opts);
}

std::vector<double> first_return_from_p(const std::vector<double>& p) { return renewal_f(p); }
std::vector<Rational> first_return_from_p(const std::vector<Rational>& p) { return renewal_f(p); }

RenewalCheck renewal_check(const ReturnSeries& s, double tol) {
  RenewalCheck out;
  const long N = s.horizon;
  if (!s.p_exact.empty()) {
    out.exact = true;
    for (long n = 1; n <= N; ++n) {
      Rational acc = 0;
      for (long k = 1; k <= n; ++k) acc += s.f_exact[k] * s.p_exact[n - k];
      if (acc != s.p_exact[n]) {
        const double r = std::fabs(to_double(Rational(acc - s.p_exact[n])));
        out.ok = false;
        if (r >= out.max_residual) {
          out.max_residual = r;
          out.worst_n = n;
        }
      }
    }
    return out;
  }
  for (long n = 1; n <= N; ++n) {
    CompensatedSum acc;
    for (long k = 1; k <= n; ++k) acc.add(s.f[k] * s.p[n - k]);
    const double r = std::fabs(acc.value() - s.p[n]);
    if (r > out.max_residual) {
      out.max_residual = r;
      out.worst_n = n;
    }
  }
  out.ok = out.max_residual <= tol;
  return out;
}

std::vector<double> zd_return_p(int d, long N) {
  if (d < 1) throw SeriesError("zd_return_p: d must be >= 1");
  std::vector<double> p1(N + 1, 0.0);
  p1[0] = 1.0;
  for (long n = 2; n <= N; n += 2) p1[n] = p1[n - 2] * static_cast<double>(n - 1) / static_cast<double>(n);
  std::vector<double> lg(N + 1);
  for (long i = 0; i <= N; ++i) lg[i] = std::lgamma(static_cast<double>(i) + 1.0);
  std::vector<double> prev = p1;
  for (int dd = 2; dd <= d; ++dd) {
    const double la = std::log(1.0 / dd), lb = std::log1p(-1.0 / dd);
    std::vector<double> cur(N + 1, 0.0);
    for (long n = 0; n <= N; n += 2) {
      CompensatedSum s;
      for (long j = 0; j <= n; j += 2) {
        const double w = std::exp(lg[n] - lg[j] - lg[n - j] + j * la + (n - j) * lb);
        s.add(w * p1[j] * prev[n - j]);
      }
      cur[n] = s.value();
    }
    prev.swap(cur);
  }
  return prev;
}

std::vector<Rational> zd_return_p_exact(int d, long N) {
  if (d < 1) throw SeriesError("zd_return_p_exact: d must be >= 1");
  std::vector<Rational> p1(N + 1, Rational(0));
  p1[0] = 1;
  for (long n = 2; n <= N; n += 2) p1[n] = p1[n - 2] * Rational(n - 1, n);
  std::vector<Rational> prev = p1;
  for (int dd = 2; dd <= d; ++dd) {
    std::vector<Rational> cur(N + 1, Rational(0));
    for (long n = 0; n <= N; n += 2) {
      BigInt binom = 1;  // C(n, j)
      BigInt dn = 1;
      for (long i = 0; i < n; ++i) dn *= dd;
      Rational acc = 0;
      for (long j = 0; j <= n; ++j) {
        if (j % 2 == 0) {
          BigInt w = binom;
          for (long i = 0; i < n - j; ++i) w *= (dd - 1);
          acc += Rational(w, dn) * p1[j] * prev[n - j];
        }
        binom = binom * (n - j) / (j + 1);
      }
      cur[n] = acc;
    }
    prev.swap(cur);
  }
  return prev;
}

std::vector<double> reference_f(const std::string& lattice, long N) {
  static std::mutex mu;
  static std::map<std::string, std::vector<double>> cache;
  int d = 0;
  if (lattice == "Z") d = 1;
  else if (lattice == "Z2") d = 2;
  else if (lattice == "Z3") d = 3;
  else throw SeriesError("unknown reference lattice '" + lattice + "'");
  std::lock_guard<std::mutex> lock(mu);
  auto& v = cache[lattice];
  if (static_cast<long>(v.size()) < N + 1) v = renewal_f(zd_return_p(d, N));
  return std::vector<double>(v.begin(), v.begin() + N + 1);
}

ReturnSeries hair_series(long height, long N, Arithmetic mode) {
  static const HairGraph g;
  auto k = std::make_shared<SimpleKernel>(std::shared_ptr<const LazyGraph>(&g, [](const LazyGraph*) {}));
  return return_series(*k, VertexId{0, 0, height}, N, mode);
}

}  // namespace rwavg
