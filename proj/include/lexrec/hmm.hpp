#pragma once

// Discrete-observation HMM with a non-emitting entry state and an absorbing
// non-emitting exit state.
//
// States are numbered 0..N-1: state 0 is the entry state, state N-1 the exit
// state, states 1..N-2 emit symbols 0..K-1. There are no transitions into the
// entry state and none out of the exit state, so the transition table is
// (N-1)x(N-1) (sources 0..N-2, destinations 1..N-1) and the observation table
// is (N-2)xK.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lexrec {

using Symbol = std::uint32_t;
using ObservationSequence = std::vector<Symbol>;

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// -log(p) with -log(0) mapped to +inf.
double cost_of(double probability) noexcept;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class Hmm {
 public:
  /// Zero-initialised model; throws kParameter unless num_states >= 3 and
  /// alphabet_size >= 1.
  Hmm(std::size_t num_states, std::size_t alphabet_size);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t alphabet_size() const noexcept { return alphabet_size_; }
  static constexpr std::size_t entry() noexcept { return 0; }
  std::size_t exit() const noexcept { return num_states_ - 1; }
  bool is_emitting(std::size_t state) const noexcept {
    return state >= 1 && state + 1 < num_states_;
  }

  /// a(from, to); from in [0, N-2], to in [1, N-1].
  double trans(std::size_t from, std::size_t to) const;
  void set_trans(std::size_t from, std::size_t to, double p);
  /// Row of a(from, .) indexed by to - 1.
  std::span<const double> trans_row(std::size_t from) const;
  std::span<double> trans_row(std::size_t from);

  /// b(state, symbol); state must be emitting.
  double obs(std::size_t state, Symbol symbol) const;
  void set_obs(std::size_t state, Symbol symbol, double p);
  std::span<const double> obs_row(std::size_t state) const;
  std::span<double> obs_row(std::size_t state);

  /// Throws kParameter if a probability lies outside [0,1] or a row does not
  /// sum to one within `tolerance`. Rows of states that are unreachable from
  /// the entry state are checked too.
  void validate(double tolerance = 1e-9) const;

  /// Throws kInput unless the sequence is non-empty and within the alphabet.
  void check_sequence(std::span<const Symbol> obs) const;

  bool operator==(const Hmm&) const = default;

 private:
  std::size_t num_states_;
  std::size_t alphabet_size_;
  Matrix trans_;
  Matrix obs_;
};

/// Forward/backward trellis with per-time scaling.
///
/// alpha_hat(t, i) = alpha_t(i) / (c_1 ... c_t) and
/// beta_hat(t, i) = beta_t(i) / (c_{t+1} ... c_{T+1}), where c_{T+1} is the
/// exit-transition normaliser. The product of all scale factors is P(O|M), and
/// alpha_hat(t,i) * beta_hat(t,i) is the posterior of being in i at time t.
/// When P(O|M) = 0 there are no scale factors and beta_hat is unscaled.
struct Trellis {
  Matrix alpha_hat;                 // (T+1) x N
  Matrix beta_hat;                  // (T+1) x N; empty until backward ran
  std::vector<double> scale;        // scale[t] = c_t for t in 1..T+1; scale[0] = 1
  double log_probability = -kInfiniteCost;
  /// Product of the scale factors. Underflows to 0 for long sequences; use
  /// log_probability there.
  double probability = 0.0;

  std::size_t length() const noexcept { return scale.empty() ? 0 : scale.size() - 2; }
  bool possible() const noexcept { return log_probability > -kInfiniteCost; }
  /// Unscaled alpha_t(i) and beta_t(i); only meaningful for short sequences.
  double alpha(std::size_t t, std::size_t i) const;
  double beta(std::size_t t, std::size_t i) const;
};

Trellis forward(const Hmm& hmm, std::span<const Symbol> obs);
/// Runs forward, then fills beta_hat.
Trellis backward(const Hmm& hmm, std::span<const Symbol> obs);

struct ViterbiResult {
  double probability = 0.0;
  /// Emitting states q*_1..q*_T; empty when no alignment exists.
  std::vector<std::size_t> path;
};

struct ViterbiCostResult {
  double cost = kInfiniteCost;
  std::vector<std::size_t> path;
};

/// Ties between predecessors resolve to the lowest state index.
ViterbiResult viterbi(const Hmm& hmm, std::span<const Symbol> obs);
ViterbiCostResult viterbi_cost(const Hmm& hmm, std::span<const Symbol> obs);

struct TrainingOptions {
  std::size_t max_iters = 100;
  /// Stop once the log-likelihood gain of an iteration drops below this.
  double conv_eps = 1e-6;
};

struct TrainingResult {
  Hmm model;
  /// Corpus log-likelihood of every evaluated model; front() is the initial
  /// model, back() the returned one.
  std::vector<double> log_likelihood;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t skipped_sequences = 0;
};

TrainingResult baum_welch(const Hmm& hmm, std::span<const Symbol> obs,
                          const TrainingOptions& options = {});

/// Pools expected counts over the corpus before normalising. Sequences that
/// are impossible under the initial model are skipped and counted.
TrainingResult baum_welch_multi(const Hmm& hmm,
                                std::span<const ObservationSequence> corpus,
                                const TrainingOptions& options = {});

/// Additive smoothing of a probability row. Eligible entries below `eps`
/// (in particular the zero entries) are raised to `eps`; the remaining mass is
/// scaled down proportionally. Ineligible zero entries stay exactly zero. An
/// empty `eligible` mask means every entry is eligible. Throws kParameter when
/// eps is not positive or too large to leave a valid distribution.
std::vector<double> smooth_additive(std::span<const double> row, double eps,
                                    const std::vector<bool>& eligible = {});

// Text serialisation: "LEXREC-HMM 1" header, N, K, symbol table, then
// row-major tables written with 17 significant digits.
struct HmmFile {
  Hmm hmm;
  std::vector<std::string> symbols;
};

void write_hmm(std::ostream& out, const Hmm& hmm, std::span<const std::string> symbols);
HmmFile read_hmm(std::istream& in);

/// Escapes backslash, space, tab and newline so that a symbol is one
/// whitespace-free token.
std::string escape_symbol(std::string_view symbol);
std::string unescape_symbol(std::string_view token);

}  // namespace lexrec
