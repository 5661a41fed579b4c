#pragma once

#include <cstddef>
#include <cstdint>

namespace jirp::kernels {

/// Execution mode for the data-parallel kernels. Serial variants are the
/// reference implementations; parallel variants are OpenMP loops that write
/// each element independently, so both produce bitwise-identical results.
enum class Exec { Serial, Parallel, Auto };

/// Below this element count Auto stays serial; thread fan-out costs more
/// than the loop at desk scale.
inline constexpr std::size_t kParallelGrain = 4096;

bool parallel_enabled();
int max_threads();

/// Posterior of a Bernoulli belief given one observation, with the
/// probability already selected for the observed outcome:
///   post = prior * o / (prior * o + (1 - prior) * (1 - o)).
/// Priors of exactly 0 or 1 are absorbing; all other posteriors are clamped
/// to [eps, 1 - eps].
double bayes_posterior(double prior, double o_used, double eps = 1e-9);

/// Elementwise bayes_posterior over entries with mask[i] != 0; unmasked
/// entries are left unchanged.
void bayes_posterior_batch_serial(const double* prior, const double* o_used,
                                  const std::uint8_t* mask, double* out,
                                  std::size_t n, double eps = 1e-9);
void bayes_posterior_batch_parallel(const double* prior, const double* o_used,
                                    const std::uint8_t* mask, double* out,
                                    std::size_t n, double eps = 1e-9);
void bayes_posterior_batch(const double* prior, const double* o_used,
                           const std::uint8_t* mask, double* out,
                           std::size_t n, Exec exec, double eps = 1e-9);

/// Jensen-Shannon divergence of the Bernoulli pair (a, b) with natural log
/// and the 0 log 0 := 0 convention. Never negative.
double bernoulli_jsd(double a, double b);

/// terms[i] = bernoulli_jsd(a[i], b[i]). The caller sums the terms
/// sequentially so the total does not depend on the thread count.
void jsd_terms_serial(const double* a, const double* b, double* terms,
                      std::size_t n);
void jsd_terms_parallel(const double* a, const double* b, double* terms,
                        std::size_t n);
void jsd_terms(const double* a, const double* b, double* terms, std::size_t n,
               Exec exec);

/// One Jacobi sweep of value iteration over a flattened transition table:
/// v_out[x] = max_a sum_entries prob * (reward + discount * v_in[next]).
/// Rows with no actions keep value 0.
struct SweepTable {
  int num_states = 0;
  int num_actions = 0;
  const int* offsets = nullptr;      // size num_states * num_actions + 1
  const int* next = nullptr;         // entry successor state
  const double* prob = nullptr;      // entry probability
  const double* reward = nullptr;    // entry reward
  double discount = 0.0;
};

void value_sweep_serial(const SweepTable& t, const double* v_in, double* v_out);
void value_sweep_parallel(const SweepTable& t, const double* v_in,
                          double* v_out);
void value_sweep(const SweepTable& t, const double* v_in, double* v_out,
                 Exec exec);

}  // namespace jirp::kernels
