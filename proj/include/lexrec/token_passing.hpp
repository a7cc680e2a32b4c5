#pragma once

// Token Passing machinery: cost-carrying tokens, Word Link Records, the
// per-character step over one HMM network, decision recording and beam
// pruning.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexrec/hmm.hpp"

namespace lexrec {

using WlrId = std::uint32_t;
inline constexpr WlrId kRootWlr = 0;

struct Token {
  double cost = kInfiniteCost;
  WlrId path = kRootWlr;
  /// LD state that hypothesised the word the token is travelling through.
  std::uint32_t origin = 0;

  static Token start() { return Token{0.0, kRootWlr, 0}; }
  bool is_null() const noexcept { return cost == kInfiniteCost; }
};

/// Orders by cost, then origin, then path id.
bool token_less(const Token& a, const Token& b) noexcept;

struct WordLinkRecord {
  double cost = 0.0;
  WlrId predecessor = kRootWlr;
  std::size_t time = 0;
  std::string model_id;
  /// LD state in which the record was created.
  std::uint32_t context = 0;
};

/// Append-only store of Word Link Records. Record 0 is the root ("*").
class WlrArena {
 public:
  WlrArena();

  WlrId add(double cost, WlrId predecessor, std::size_t time, std::string model_id,
            std::uint32_t context);
  const WordLinkRecord& at(WlrId id) const;
  std::size_t size() const noexcept { return records_.size(); }

  /// Records from the first word to `head`, root excluded. Throws kInternal if
  /// the predecessor chain is broken.
  std::vector<WlrId> chain(WlrId head) const;

 private:
  std::vector<WordLinkRecord> records_;
};

/// -log view of an Hmm: finite-cost predecessor arcs per state.
class CostModel {
 public:
  struct Arc {
    std::uint32_t from;
    double cost;
  };

  explicit CostModel(const Hmm& hmm);
  /// Arbitrary cost network: `preds[j]` are the arcs into state j (state 0 is
  /// the entry, the last state the exit) and `obs_cost` is row-major over the
  /// emitting states 1..N-2.
  CostModel(std::size_t alphabet_size, std::vector<std::vector<Arc>> preds,
            std::vector<double> obs_cost);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t alphabet_size() const noexcept { return alphabet_size_; }
  std::span<const Arc> predecessors(std::size_t state) const { return preds_[state]; }
  double obs_cost(std::size_t state, Symbol symbol) const {
    return obs_cost_[(state - 1) * alphabet_size_ + symbol];
  }

 private:
  std::size_t num_states_;
  std::size_t alphabet_size_;
  std::vector<std::vector<Arc>> preds_;  // indexed by destination, exit included
  std::vector<double> obs_cost_;
};

/// Keeps at most `capacity` tokens out of `candidates`. Tokens sharing origin
/// and path collapse to the cheapest. With capacity > 1 the cheapest token of
/// every distinct origin is kept before any second token of the same origin,
/// so a capacity of at least the number of origins never loses the best path
/// through a state.
void select_tokens(std::vector<Token>& candidates, std::size_t capacity);

/// One HMM network holding up to `capacity` tokens per state.
class TokenNetwork {
 public:
  TokenNetwork(std::shared_ptr<const CostModel> costs, std::string model_id,
               std::size_t capacity = 1);

  const std::string& model_id() const noexcept { return model_id_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t num_states() const noexcept { return slots_.size(); }
  bool active() const noexcept { return active_; }

  /// Places a token in the entry state and activates the network. The entry
  /// state is cut back to `capacity` tokens when the next step starts.
  void enter(const Token& token);
  /// Consumes one input symbol: propagates every token along the arcs, keeps
  /// the best per state, then hypothesises the exit transition.
  void step(Symbol symbol);
  /// Drops every token and marks the network inactive.
  void deactivate();

  std::span<const Token> tokens(std::size_t state) const { return slots_[state]; }
  std::span<const Token> exit_tokens() const { return slots_.back(); }
  /// Cheapest token in any state, +inf when empty.
  double best_cost() const noexcept;

 private:
  std::shared_ptr<const CostModel> costs_;
  std::string model_id_;
  std::size_t capacity_;
  bool active_ = false;
  std::vector<std::vector<Token>> slots_;
  std::vector<std::vector<Token>> scratch_;
};

/// Deactivates every active network whose best token exceeds
/// global_best + beam. Returns the indices deactivated. Throws kParameter for
/// a negative beam.
std::vector<std::size_t> beam_prune(std::span<TokenNetwork> networks, double global_best,
                                    double beam);

struct PendingToken {
  Token token;
  /// Index into the model id table of the network the token exited.
  std::uint32_t model = 0;
};

/// Creates one WLR per token held in an LD state, then points the token at
/// it. `ld_states[i]` are the tokens of LD state i.
void record_decisions(WlrArena& arena, std::span<std::vector<PendingToken>> ld_states,
                      std::size_t time, std::span<const std::string> model_ids);

/// Weighted Levenshtein distance from `reference` to `observed` computed by
/// token passing over a chain network of character states and insert states.
/// `substitution`, `insertion` (extra observed character) and `deletion`
/// (missing reference character) are the weights. Throws kParameter for an
/// empty reference or negative weights.
double wld_distance(std::string_view reference, std::string_view observed, double substitution,
                    double insertion, double deletion);

}  // namespace lexrec
