#include "lexrec/recognizer.hpp"

#include <algorithm>
#include <numeric>

#include "lexrec/error.hpp"

namespace lexrec {

struct Recognizer::Compiled {
  struct Entry {
    std::uint32_t context;
    double cost;  // -log P(word | context)
  };

  std::shared_ptr<const Lexicon> lexicon;
  std::shared_ptr<const LdModel> ld;
  RecognizerConfig config;
  std::vector<std::string> model_ids;
  /// Position of each model in model-id order, for tie-breaking.
  std::vector<std::size_t> rank;
  std::size_t contexts = 0;
  std::vector<double> entry_cost;       // [to]
  std::vector<double> transition_cost;  // [from * C + to]
  std::vector<double> exit_cost;        // [from]
  std::vector<std::vector<Entry>> entries;  // per model
};

namespace {

std::shared_ptr<const Recognizer::Compiled> compile(std::shared_ptr<const Lexicon> lexicon,
                                                    std::shared_ptr<const LdModel> ld,
                                                    const RecognizerConfig& config) {
  if (!lexicon || !ld) fail(ErrorKind::kParameter, "recognizer needs a lexicon and a language model");
  if (config.n_best < 1) fail(ErrorKind::kParameter, "n_best must be at least 1");
  if (!(config.beam_width >= 0.0)) fail(ErrorKind::kParameter, "beam width must be non-negative");
  if (lexicon->size() == 0) fail(ErrorKind::kInput, "empty lexicon");

  auto c = std::make_shared<Recognizer::Compiled>();
  c->lexicon = std::move(lexicon);
  c->ld = std::move(ld);
  c->config = config;
  const std::size_t m = c->lexicon->size();
  const std::size_t k = c->ld->num_contexts();
  c->contexts = k;
  for (std::size_t i = 0; i < m; ++i) c->model_ids.push_back(c->lexicon->model(i).model_id());
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return c->model_ids[a] < c->model_ids[b]; });
  c->rank.resize(m);
  for (std::size_t r = 0; r < m; ++r) c->rank[order[r]] = r;

  c->entry_cost.resize(k);
  c->transition_cost.resize(k * k);
  c->exit_cost.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    c->entry_cost[j] = c->ld->entry_cost(j);
    c->exit_cost[j] = c->ld->exit_cost(j);
    for (std::size_t i = 0; i < k; ++i) c->transition_cost[i * k + j] = c->ld->transition_cost(i, j);
  }
  c->entries.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::string& word = c->lexicon->model(i).word();
    const auto id = c->ld->word_id(word);
    if (!id) fail(ErrorKind::kInput, "lexicon word '" + word + "' is not in the language model vocabulary");
    for (std::size_t j = 0; j < k; ++j) {
      const double oc = c->ld->observation_cost(j, *id);
      if (oc != kInfiniteCost) c->entries[i].push_back({static_cast<std::uint32_t>(j), oc});
    }
  }
  return c;
}

}  // namespace

Recognizer::Recognizer(std::shared_ptr<const Lexicon> lexicon, std::shared_ptr<const LdModel> ld,
                       RecognizerConfig config)
    : compiled_(compile(std::move(lexicon), std::move(ld), config)) {}

const Lexicon& Recognizer::lexicon() const noexcept { return *compiled_->lexicon; }
const LdModel& Recognizer::ld() const noexcept { return *compiled_->ld; }
const RecognizerConfig& Recognizer::config() const noexcept { return compiled_->config; }

Session Recognizer::start() const { return Session(compiled_); }

RecognitionResult Recognizer::recognize(std::string_view input) const {
  if (input.empty()) fail(ErrorKind::kInput, "empty input");
  Session session = start();
  session.feed(input);
  return session.finalize();
}

std::string format_hypothesis(const Hypothesis& h, const LdModel& ld, bool with_tags) {
  std::string out;
  for (std::size_t i = 0; i < h.words.size(); ++i) {
    if (i) out += ' ';
    out += h.words[i];
    if (with_tags) {
      out += '/';
      out += ld.context_names().at(h.contexts.at(i));
    }
  }
  return out;
}

Hypothesis backtrack(const WlrArena& arena, WlrId head, double cost) {
  Hypothesis h;
  h.cost = cost;
  for (WlrId id : arena.chain(head)) {
    const WordLinkRecord& rec = arena.at(id);
    h.model_ids.push_back(rec.model_id);
    h.words.emplace_back(strip_leading_space(rec.model_id));
    h.boundaries.push_back(rec.time);
    h.contexts.push_back(rec.context);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(std::shared_ptr<const Recognizer::Compiled> compiled)
    : compiled_(std::move(compiled)) {
  const auto& c = *compiled_;
  networks_.reserve(c.model_ids.size());
  for (std::size_t m = 0; m < c.model_ids.size(); ++m) {
    networks_.emplace_back(c.lexicon->model(m).costs(), c.model_ids[m], c.config.n_best);
  }
  was_deactivated_.assign(networks_.size(), false);
  ld_tokens_.resize(c.contexts + 1);
  ld_tokens_[0].push_back(Token::start());
}

const LdModel& Session::ld() const noexcept { return *compiled_->ld; }

std::size_t Session::active_models() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(networks_.begin(), networks_.end(), [](const TokenNetwork& n) { return n.active(); }));
}

void Session::hypothesise_words() {
  const auto& c = *compiled_;
  for (std::size_t s = 0; s < ld_tokens_.size(); ++s) {
    for (const Token& tau : ld_tokens_[s]) {
      for (std::size_t m = 0; m < networks_.size(); ++m) {
        for (const auto& e : c.entries[m]) {
          const double lm = s == 0 ? c.entry_cost[e.context]
                                   : c.transition_cost[(s - 1) * c.contexts + e.context];
          const double cost = tau.cost + lm + e.cost;
          if (cost == kInfiniteCost) continue;
          if (!networks_[m].active() && was_deactivated_[m]) {
            ++stats_.reactivations;
            was_deactivated_[m] = false;
          }
          networks_[m].enter(Token{cost, tau.path, e.context});
        }
      }
    }
  }
}

void Session::feed(std::string_view text) {
  for (char ch : text) feed(ch);
}

void Session::feed(char ch) {
  if (finished_) fail(ErrorKind::kInput, "session already finished");
  const auto& c = *compiled_;
  const Symbol symbol = c.lexicon->alphabet().encode(std::string_view(&ch, 1)).front();
  ++time_;

  hypothesise_words();
  for (auto& slot : ld_tokens_) slot.clear();

  const double threshold = previous_best_ + c.config.beam_width;
  double best = kInfiniteCost;
  for (std::size_t m = 0; m < networks_.size(); ++m) {
    TokenNetwork& net = networks_[m];
    if (!net.active()) continue;
    const double own = net.best_cost();
    if (own == kInfiniteCost) {
      net.deactivate();  // nothing left to carry
      continue;
    }
    if (own > threshold) {
      net.deactivate();
      was_deactivated_[m] = true;
      ++stats_.deactivations;
      continue;
    }
    net.step(symbol);
    best = std::min(best, net.best_cost());
  }
  previous_best_ = best;

  // Exit tokens go back to the context that proposed their word.
  std::vector<std::vector<PendingToken>> pending(c.contexts);
  for (std::size_t m = 0; m < networks_.size(); ++m) {
    if (!networks_[m].active()) continue;
    for (const Token& e : networks_[m].exit_tokens()) {
      pending[e.origin].push_back(PendingToken{e, static_cast<std::uint32_t>(m)});
    }
  }
  for (auto& list : pending) {
    std::sort(list.begin(), list.end(), [&](const PendingToken& a, const PendingToken& b) {
      if (a.token.cost != b.token.cost) return a.token.cost < b.token.cost;
      if (a.model != b.model) return c.rank[a.model] < c.rank[b.model];
      return a.token.path < b.token.path;
    });
    if (list.size() > c.config.n_best) list.resize(c.config.n_best);
  }
  record_decisions(arena_, pending, time_, c.model_ids);

  exit_tokens_.clear();
  for (std::size_t j = 0; j < c.contexts; ++j) {
    for (const PendingToken& p : pending[j]) {
      ld_tokens_[j + 1].push_back(Token{p.token.cost, p.token.path, static_cast<std::uint32_t>(j)});
      const double cost = p.token.cost + c.exit_cost[j];
      if (cost != kInfiniteCost) exit_tokens_.push_back(Token{cost, p.token.path, 0});
    }
  }
  std::sort(exit_tokens_.begin(), exit_tokens_.end(), token_less);
}

std::vector<Hypothesis> Session::backtrack_alternatives() const {
  std::vector<Hypothesis> out;
  for (const Token& tok : exit_tokens_) {
    Hypothesis h = backtrack(arena_, tok.path, tok.cost);
    const bool seen = std::any_of(out.begin(), out.end(),
                                  [&](const Hypothesis& o) { return o.words == h.words; });
    if (seen) continue;
    out.push_back(std::move(h));
    if (out.size() == compiled_->config.n_best) break;
  }
  return out;
}

RecognitionResult Session::finalize() {
  if (finished_) fail(ErrorKind::kInput, "session already finished");
  if (time_ == 0) fail(ErrorKind::kInput, "empty input");
  finished_ = true;
  if (exit_tokens_.empty()) fail(ErrorKind::kNoHypothesis, "no complete reading of the input");
  RecognitionResult result;
  result.alternatives = backtrack_alternatives();
  result.stats = stats_;
  result.stats.word_link_records = arena_.size() - 1;
  return result;
}

}  // namespace lexrec
