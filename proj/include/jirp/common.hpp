#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace jirp {

/// A set of atomic propositions, encoded as a bitmask over the owning
/// component's proposition order. Supports up to 32 propositions.
using Label = std::uint32_t;

inline constexpr int kMaxPropositions = 32;

/// Thrown when a document (layout, machine, config) cannot be parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when parsed or constructed data violates an invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown on out-of-domain queries (unknown state, action, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an exhaustive oracle refuses an intractably large input.
class TractabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an external backend (solver process) fails; distinct from
/// a normal UNSAT verdict.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All randomness flows through explicitly seeded generators so that runs
/// are reproducible and independent runs can execute concurrently.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1). Hand-rolled so the draw sequence does not
/// depend on the standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
inline int uniform_int(Rng& rng, int n) {
  return static_cast<int>((static_cast<unsigned __int128>(rng()) *
                           static_cast<unsigned __int128>(n)) >> 64);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Shortest round-trip decimal form; used for deterministic CSV output.
std::string format_double(double v);

/// Translates proposition names to a bitmask relative to `propositions`.
Label label_from_names(const std::vector<std::string>& names,
                       const std::vector<std::string>& propositions);

/// Inverse of label_from_names.
std::vector<std::string> label_to_names(
    Label label, const std::vector<std::string>& propositions);

}  // namespace jirp
