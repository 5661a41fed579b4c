#include "jirp/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace jirp::kernels {

bool parallel_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

bool go_parallel(Exec exec, std::size_t n) {
  if (!parallel_enabled()) return false;
  if (exec == Exec::Serial) return false;
  if (exec == Exec::Parallel) return true;
  return n >= kParallelGrain;
}

}  // namespace

double bayes_posterior(double prior, double o_used, double eps) {
  if (prior == 0.0 || prior == 1.0) return prior;
  const double num = prior * o_used;
  const double den = num + (1.0 - prior) * (1.0 - o_used);
  const double post = num / den;
  return std::clamp(post, eps, 1.0 - eps);
}

void bayes_posterior_batch_serial(const double* prior, const double* o_used,
                                  const std::uint8_t* mask, double* out,
                                  std::size_t n, double eps) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = mask[i] ? bayes_posterior(prior[i], o_used[i], eps) : prior[i];
  }
}

void bayes_posterior_batch_parallel(const double* prior, const double* o_used,
                                    const std::uint8_t* mask, double* out,
                                    std::size_t n, double eps) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    out[i] = mask[i] ? bayes_posterior(prior[i], o_used[i], eps) : prior[i];
  }
}

void bayes_posterior_batch(const double* prior, const double* o_used,
                           const std::uint8_t* mask, double* out,
                           std::size_t n, Exec exec, double eps) {
  if (go_parallel(exec, n)) {
    bayes_posterior_batch_parallel(prior, o_used, mask, out, n, eps);
  } else {
    bayes_posterior_batch_serial(prior, o_used, mask, out, n, eps);
  }
}

namespace {

// q log(q/m) + (1-q) log((1-q)/(1-m)) with 0 log 0 := 0.
double bernoulli_kl(double q, double m) {
  double kl = 0.0;
  if (q > 0.0) kl += q * std::log(q / m);
  if (q < 1.0) kl += (1.0 - q) * std::log((1.0 - q) / (1.0 - m));
  return kl;
}

}  // namespace

double bernoulli_jsd(double a, double b) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double term = 0.5 * bernoulli_kl(a, m) + 0.5 * bernoulli_kl(b, m);
  // Guard against rounding pushing a near-zero divergence negative.
  return std::max(term, 0.0);
}

void jsd_terms_serial(const double* a, const double* b, double* terms,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) terms[i] = bernoulli_jsd(a[i], b[i]);
}

void jsd_terms_parallel(const double* a, const double* b, double* terms,
                        std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    terms[i] = bernoulli_jsd(a[i], b[i]);
  }
}

void jsd_terms(const double* a, const double* b, double* terms, std::size_t n,
               Exec exec) {
  if (go_parallel(exec, n)) {
    jsd_terms_parallel(a, b, terms, n);
  } else {
    jsd_terms_serial(a, b, terms, n);
  }
}

namespace {

inline double backup_state(const SweepTable& t, const double* v_in, int x) {
  double best = 0.0;
  bool any = false;
  for (int a = 0; a < t.num_actions; ++a) {
    const int row = x * t.num_actions + a;
    double q = 0.0;
    for (int e = t.offsets[row]; e < t.offsets[row + 1]; ++e) {
      q += t.prob[e] * (t.reward[e] + t.discount * v_in[t.next[e]]);
    }
    if (!any || q > best) {
      best = q;
      any = true;
    }
  }
  return any ? best : 0.0;
}

}  // namespace

void value_sweep_serial(const SweepTable& t, const double* v_in,
                        double* v_out) {
  for (int x = 0; x < t.num_states; ++x) v_out[x] = backup_state(t, v_in, x);
}

void value_sweep_parallel(const SweepTable& t, const double* v_in,
                          double* v_out) {
#pragma omp parallel for schedule(static)
  for (int x = 0; x < t.num_states; ++x) v_out[x] = backup_state(t, v_in, x);
}

void value_sweep(const SweepTable& t, const double* v_in, double* v_out,
                 Exec exec) {
  if (go_parallel(exec, static_cast<std::size_t>(t.num_states))) {
    value_sweep_parallel(t, v_in, v_out);
  } else {
    value_sweep_serial(t, v_in, v_out);
  }
}

}  // namespace jirp::kernels
