#include "lexrec/token_passing.hpp"

#include <algorithm>

#include "lexrec/error.hpp"

namespace lexrec {

bool token_less(const Token& a, const Token& b) noexcept {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.origin != b.origin) return a.origin < b.origin;
  return a.path < b.path;
}

// ---------------------------------------------------------------------------
// WlrArena

WlrArena::WlrArena() { records_.push_back(WordLinkRecord{0.0, kRootWlr, 0, "*", 0}); }

WlrId WlrArena::add(double cost, WlrId predecessor, std::size_t time, std::string model_id,
                    std::uint32_t context) {
  if (predecessor >= records_.size()) {
    fail(ErrorKind::kInternal, "WLR predecessor does not exist");
  }
  records_.push_back(WordLinkRecord{cost, predecessor, time, std::move(model_id), context});
  return static_cast<WlrId>(records_.size() - 1);
}

const WordLinkRecord& WlrArena::at(WlrId id) const {
  if (id >= records_.size()) fail(ErrorKind::kInternal, "dangling WLR reference");
  return records_[id];
}

std::vector<WlrId> WlrArena::chain(WlrId head) const {
  std::vector<WlrId> out;
  WlrId cur = head;
  while (cur != kRootWlr) {
    const WordLinkRecord& rec = at(cur);
    // Predecessors are always created earlier, so ids strictly decrease.
    if (rec.predecessor >= cur || out.size() > records_.size()) {
      fail(ErrorKind::kInternal, "broken WLR chain");
    }
    out.push_back(cur);
    cur = rec.predecessor;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// CostModel

CostModel::CostModel(const Hmm& hmm)
    : num_states_(hmm.num_states()),
      alphabet_size_(hmm.alphabet_size()),
      preds_(hmm.num_states()),
      obs_cost_((hmm.num_states() - 2) * hmm.alphabet_size()) {
  for (std::size_t j = 1; j < num_states_; ++j) {
    for (std::size_t i = 0; i + 1 < num_states_; ++i) {
      const double c = cost_of(hmm.trans(i, j));
      if (c != kInfiniteCost) preds_[j].push_back(Arc{static_cast<std::uint32_t>(i), c});
    }
  }
  for (std::size_t j = 1; j + 1 < num_states_; ++j) {
    for (Symbol k = 0; k < alphabet_size_; ++k) {
      obs_cost_[(j - 1) * alphabet_size_ + k] = cost_of(hmm.obs(j, k));
    }
  }
}

CostModel::CostModel(std::size_t alphabet_size, std::vector<std::vector<Arc>> preds,
                     std::vector<double> obs_cost)
    : num_states_(preds.size()),
      alphabet_size_(alphabet_size),
      preds_(std::move(preds)),
      obs_cost_(std::move(obs_cost)) {
  if (num_states_ < 3 || obs_cost_.size() != (num_states_ - 2) * alphabet_size_) {
    fail(ErrorKind::kParameter, "malformed cost network");
  }
}

// ---------------------------------------------------------------------------
// Token selection and networks

void select_tokens(std::vector<Token>& candidates, std::size_t capacity) {
  std::erase_if(candidates, [](const Token& t) { return t.is_null(); });
  if (candidates.empty()) return;
  if (capacity <= 1) {
    auto best = std::min_element(candidates.begin(), candidates.end(), token_less);
    const Token keep = *best;
    candidates.assign(1, keep);
    return;
  }
  std::stable_sort(candidates.begin(), candidates.end(), token_less);
  // Same origin and path: identical futures and histories, keep the cheapest.
  std::vector<Token> unique;
  unique.reserve(candidates.size());
  for (const Token& t : candidates) {
    const bool seen = std::any_of(unique.begin(), unique.end(), [&](const Token& u) {
      return u.origin == t.origin && u.path == t.path;
    });
    if (!seen) unique.push_back(t);
  }
  if (unique.size() <= capacity) {
    candidates = std::move(unique);
    return;
  }
  std::vector<Token> kept;
  std::vector<Token> rest;
  for (const Token& t : unique) {
    const bool leader = std::none_of(kept.begin(), kept.end(),
                                     [&](const Token& k) { return k.origin == t.origin; });
    (leader ? kept : rest).push_back(t);
  }
  if (kept.size() > capacity) kept.resize(capacity);
  for (const Token& t : rest) {
    if (kept.size() >= capacity) break;
    kept.push_back(t);
  }
  std::stable_sort(kept.begin(), kept.end(), token_less);
  candidates = std::move(kept);
}

TokenNetwork::TokenNetwork(std::shared_ptr<const CostModel> costs, std::string model_id,
                           std::size_t capacity)
    : costs_(std::move(costs)), model_id_(std::move(model_id)), capacity_(capacity) {
  if (!costs_) fail(ErrorKind::kParameter, "token network needs a cost model");
  if (capacity_ < 1) fail(ErrorKind::kParameter, "token capacity must be at least 1");
  slots_.resize(costs_->num_states());
  scratch_.resize(costs_->num_states());
}

void TokenNetwork::enter(const Token& token) {
  if (token.is_null()) return;
  slots_.front().push_back(token);
  active_ = true;
}

void TokenNetwork::step(Symbol symbol) {
  if (!active_) return;
  const std::size_t n = slots_.size();
  if (symbol >= costs_->alphabet_size()) fail(ErrorKind::kInput, "symbol outside alphabet");
  select_tokens(slots_.front(), capacity_);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    auto& cand = scratch_[j];
    cand.clear();
    const double local = costs_->obs_cost(j, symbol);
    if (local == kInfiniteCost) continue;
    for (const CostModel::Arc& arc : costs_->predecessors(j)) {
      for (const Token& tok : slots_[arc.from]) {
        cand.push_back(Token{tok.cost + arc.cost + local, tok.path, tok.origin});
      }
    }
    select_tokens(cand, capacity_);
  }
  // Discard the original tokens; the new ones become current.
  for (std::size_t j = 0; j + 1 < n; ++j) {
    slots_[j].swap(scratch_[j]);
    scratch_[j].clear();
  }
  auto& exit_slot = slots_[n - 1];
  exit_slot.clear();
  for (const CostModel::Arc& arc : costs_->predecessors(n - 1)) {
    for (const Token& tok : slots_[arc.from]) {
      exit_slot.push_back(Token{tok.cost + arc.cost, tok.path, tok.origin});
    }
  }
  select_tokens(exit_slot, capacity_);
}

void TokenNetwork::deactivate() {
  for (auto& slot : slots_) slot.clear();
  active_ = false;
}

double TokenNetwork::best_cost() const noexcept {
  double best = kInfiniteCost;
  for (const auto& slot : slots_) {
    for (const Token& t : slot) best = std::min(best, t.cost);
  }
  return best;
}

std::vector<std::size_t> beam_prune(std::span<TokenNetwork> networks, double global_best,
                                    double beam) {
  if (!(beam >= 0.0)) fail(ErrorKind::kParameter, "beam width must be non-negative");
  std::vector<std::size_t> pruned;
  const double threshold = global_best + beam;
  for (std::size_t m = 0; m < networks.size(); ++m) {
    if (!networks[m].active()) continue;
    if (networks[m].best_cost() > threshold) {
      networks[m].deactivate();
      pruned.push_back(m);
    }
  }
  return pruned;
}

void record_decisions(WlrArena& arena, std::span<std::vector<PendingToken>> ld_states,
                      std::size_t time, std::span<const std::string> model_ids) {
  for (std::size_t i = 0; i < ld_states.size(); ++i) {
    for (PendingToken& pending : ld_states[i]) {
      if (pending.token.is_null()) continue;
      if (pending.model >= model_ids.size()) fail(ErrorKind::kInternal, "unknown model index");
      pending.token.path = arena.add(pending.token.cost, pending.token.path, time,
                                     model_ids[pending.model], static_cast<std::uint32_t>(i));
    }
  }
}

// ---------------------------------------------------------------------------
// Weighted Levenshtein distance

double wld_distance(std::string_view reference, std::string_view observed, double substitution,
                    double insertion, double deletion) {
  if (reference.empty()) fail(ErrorKind::kParameter, "reference word must not be empty");
  if (!(substitution >= 0.0 && insertion >= 0.0 && deletion >= 0.0)) {
    fail(ErrorKind::kParameter, "edit weights must be non-negative");
  }
  const std::size_t n = reference.size();
  if (observed.empty()) return static_cast<double>(n) * deletion;

  // States: 0 entry, 1..n character states, n+1..2n+1 insert states I_0..I_n
  // (I_p sits after reference position p), 2n+2 exit. Position of the entry is
  // 0, of character state j is j, of I_p is p.
  const std::size_t num_states = 2 * n + 3;
  const std::size_t exit = num_states - 1;
  const auto char_state = [](std::size_t j) { return j; };
  const auto insert_state = [n](std::size_t p) { return n + 1 + p; };
  constexpr std::size_t kAlphabet = 256;

  std::vector<std::vector<CostModel::Arc>> preds(num_states);
  const auto connect_from = [&](std::size_t from, std::size_t pos) {
    const auto f = static_cast<std::uint32_t>(from);
    // Into a character state b > pos, deleting reference chars pos+1..b-1.
    for (std::size_t b = pos + 1; b <= n; ++b) {
      preds[char_state(b)].push_back({f, static_cast<double>(b - pos - 1) * deletion});
    }
    // Into an insert state p >= pos, deleting pos+1..p, then inserting.
    for (std::size_t p = pos; p <= n; ++p) {
      preds[insert_state(p)].push_back({f, static_cast<double>(p - pos) * deletion + insertion});
    }
    preds[exit].push_back({f, static_cast<double>(n - pos) * deletion});
  };
  connect_from(0, 0);
  for (std::size_t j = 1; j <= n; ++j) connect_from(char_state(j), j);
  for (std::size_t p = 0; p <= n; ++p) connect_from(insert_state(p), p);
  // Arcs from the entry straight to the exit would accept the empty string.
  std::erase_if(preds[exit], [](const CostModel::Arc& a) { return a.from == 0; });

  std::vector<double> local((num_states - 2) * kAlphabet, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t c = 0; c < kAlphabet; ++c) {
      const bool match = static_cast<unsigned char>(reference[j - 1]) == c;
      local[(char_state(j) - 1) * kAlphabet + c] = match ? 0.0 : substitution;
    }
  }

  auto costs = std::make_shared<const CostModel>(kAlphabet, std::move(preds), std::move(local));
  TokenNetwork net(costs, std::string(reference));
  net.enter(Token::start());
  for (char c : observed) net.step(static_cast<unsigned char>(c));
  const auto exit_tokens = net.exit_tokens();
  return exit_tokens.empty() ? kInfiniteCost : exit_tokens.front().cost;
}

}  // namespace lexrec
