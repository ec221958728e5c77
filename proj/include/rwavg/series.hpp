#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwavg/kernel.hpp"

namespace rwavg {

struct SeriesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Arithmetic { Exact, Float };

std::string to_string(Arithmetic a);
Arithmetic parse_arithmetic(const std::string& s);

struct SeriesOptions {
  long exact_cap = 64;                  // largest horizon accepted in exact mode
  std::size_t max_states = 6'000'000;   // memory guard on the truncation ball
  bool fast_paths = true;               // closed forms and symmetry-reduced chains
};

// p^(0..N)(x,x) and f^(1..N)(x,x); f[0] = 0 by convention.
struct ReturnSeries {
  VertexId vertex;
  long horizon = 0;
  Arithmetic mode = Arithmetic::Float;
  std::string method;     // how p was computed
  std::string f_method;   // "taboo_dp" (independent of p) or "renewal"
  std::vector<double> p, f;
  std::vector<Rational> p_exact, f_exact;  // exact mode only

  double f_sum() const;
  double f_sum(long upto) const;
};

ReturnSeries return_series(const WalkKernel& k, const VertexId& x, long N, Arithmetic mode,
                           const SeriesOptions& opts = {});

// f from p by the renewal recursion f^(n) = p^(n) - sum_{k<n} f^(k) p^(n-k).
std::vector<double> first_return_from_p(const std::vector<double>& p);
std::vector<Rational> first_return_from_p(const std::vector<Rational>& p);

struct RenewalCheck {
  bool ok = true;
  bool exact = false;
  double max_residual = 0.0;
  long worst_n = 0;
};
// Verifies p^(n) = sum_{k=1..n} f^(k) p^(n-k) for 1 <= n <= N.
RenewalCheck renewal_check(const ReturnSeries& s, double tol = 1e-9);

// Closed-form return probabilities of the simple random walk on Z^d.
std::vector<double> zd_return_p(int d, long N);
std::vector<Rational> zd_return_p_exact(int d, long N);

// First-return coefficients f[0..N] of a reference lattice ("Z", "Z2", "Z3"), float, cached.
std::vector<double> reference_f(const std::string& lattice, long N);

// Per-height series on the hair graph (horizontal translations are automorphisms).
ReturnSeries hair_series(long height, long N, Arithmetic mode);

}  // namespace rwavg
