#include "ksr/aho_corasick.hpp"

#include <stdexcept>

namespace ksr {

AhoCorasick::AhoCorasick(std::vector<std::string> patterns) : patterns_(std::move(patterns)) {
  if (patterns_.empty()) throw std::invalid_argument("aho-corasick: empty pattern set");
  for (std::size_t p = 0; p < patterns_.size(); ++p) {
    if (patterns_[p].empty()) {
      throw std::invalid_argument("aho-corasick: pattern " + std::to_string(p) + " is empty");
    }
  }

  // Alphabet compression: class 0 is every byte absent from the patterns.
  for (const auto& pattern : patterns_) {
    for (unsigned char c : pattern) {
      if (byte_class_[c] == 0) byte_class_[c] = static_cast<std::uint8_t>(classes_++);
    }
  }
  const std::size_t alpha = classes_;

  // Trie.
  goto_.assign(alpha, npos);
  depth_.push_back(0);
  std::vector<std::vector<PatternId>> own(1);
  for (std::size_t p = 0; p < patterns_.size(); ++p) {
    StateId s = root();
    for (unsigned char c : patterns_[p]) {
      const auto cls = byte_class_[c];
      if (goto_[s * alpha + cls] == npos) {
        const auto fresh = static_cast<StateId>(depth_.size());
        goto_[s * alpha + cls] = fresh;
        goto_.resize(goto_.size() + alpha, npos);
        depth_.push_back(depth_[s] + 1);
        own.emplace_back();
      }
      s = goto_[s * alpha + cls];
    }
    own[s].push_back(static_cast<PatternId>(p));
  }

  // Failure links and the total transition table, breadth first.
  const std::size_t n = depth_.size();
  fail_.assign(n, root());
  delta_.assign(n * alpha, root());
  std::vector<StateId> order;
  order.reserve(n);
  for (std::size_t cls = 0; cls < alpha; ++cls) {
    const StateId child = goto_[cls];
    if (child != npos) {
      delta_[cls] = child;
      fail_[child] = root();
      order.push_back(child);
    }
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    const StateId s = order[head];
    for (std::size_t cls = 0; cls < alpha; ++cls) {
      const StateId child = goto_[s * alpha + cls];
      if (child != npos) {
        fail_[child] = delta_[fail_[s] * alpha + cls];
        delta_[s * alpha + cls] = child;
        order.push_back(child);
      } else {
        delta_[s * alpha + cls] = delta_[fail_[s] * alpha + cls];
      }
    }
  }

  // Output sets: own patterns plus the closure through the failure chain.
  // BFS order guarantees fail_[s] is complete before s.
  std::vector<std::vector<PatternId>> out(n);
  out[root()] = own[root()];
  for (StateId s : order) {
    out[s] = own[s];
    const auto& inherited = out[fail_[s]];
    out[s].insert(out[s].end(), inherited.begin(), inherited.end());
  }
  terminal_offsets_.push_back(0);
  output_offsets_.push_back(0);
  for (std::size_t s = 0; s < n; ++s) {
    terminal_.insert(terminal_.end(), own[s].begin(), own[s].end());
    terminal_offsets_.push_back(static_cast<std::uint32_t>(terminal_.size()));
    outputs_.insert(outputs_.end(), out[s].begin(), out[s].end());
    output_offsets_.push_back(static_cast<std::uint32_t>(outputs_.size()));
  }
}

std::span<const PatternId> AhoCorasick::terminal(StateId state) const {
  const auto b = terminal_offsets_.at(state);
  return {terminal_.data() + b, terminal_offsets_[state + 1] - b};
}

std::span<const PatternId> AhoCorasick::outputs(StateId state) const {
  const auto b = output_offsets_.at(state);
  return {outputs_.data() + b, output_offsets_[state + 1] - b};
}

StateId AhoCorasick::find_state(std::string_view text) const {
  StateId s = root();
  for (unsigned char c : text) {
    const auto cls = byte_class_[c];
    if (cls == 0) return npos;
    s = goto_[s * classes_ + cls];
    if (s == npos) return npos;
  }
  return s;
}

std::vector<AhoCorasick::Match> AhoCorasick::find_all(std::string_view text) const {
  std::vector<Match> matches;
  StateId s = root();
  for (std::size_t i = 0; i < text.size(); ++i) {
    s = next(s, static_cast<unsigned char>(text[i]));
    for (PatternId p : outputs(s)) matches.push_back({i + 1, p});
  }
  return matches;
}

std::vector<std::uint32_t> AhoCorasick::count_tokens(std::span<const std::string> tokens) const {
  std::vector<std::uint32_t> counts(patterns_.size(), 0);
  add_token_counts(tokens, counts);
  return counts;
}

void AhoCorasick::add_token_counts(std::span<const std::string> tokens,
                                   std::span<std::uint32_t> counts) const {
  for (const auto& token : tokens) {
    StateId s = root();
    for (unsigned char c : token) s = next(s, c);
    // The state is the longest pattern-prefix suffix of the token, so a whole
    // token match is exactly depth == token length.
    if (depth_[s] == token.size()) {
      for (PatternId p : terminal(s)) ++counts[p];
    }
  }
}

}  // namespace ksr
