#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ksr {

using PatternId = std::uint32_t;
using StateId = std::uint32_t;

/// Byte-level Aho-Corasick automaton.
///
/// States are numbered in trie insertion order (root is 0), so identical
/// pattern lists always give identical automata. The transition table is
/// total: missing goto edges are resolved through failure links at build time.
/// Bytes that occur in no pattern share one alphabet class and always lead
/// back to the root.
class AhoCorasick {
 public:
  struct Match {
    std::size_t end;  // one past the last matched byte
    PatternId pattern;
  };

  /// Throws std::invalid_argument for an empty pattern list or an empty
  /// pattern (message names the pattern id).
  explicit AhoCorasick(std::vector<std::string> patterns);

  std::size_t state_count() const { return depth_.size(); }
  std::size_t pattern_count() const { return patterns_.size(); }
  const std::vector<std::string>& patterns() const { return patterns_; }

  static constexpr StateId root() { return 0; }
  StateId next(StateId state, unsigned char byte) const {
    return delta_[state * classes_ + byte_class_[byte]];
  }
  StateId failure(StateId state) const { return fail_[state]; }
  std::uint32_t depth(StateId state) const { return depth_[state]; }

  /// Patterns whose last byte is reached exactly at `state`.
  std::span<const PatternId> terminal(StateId state) const;
  /// Every pattern that is a suffix of the string spelled by `state`.
  std::span<const PatternId> outputs(StateId state) const;

  /// Runs `text` from the root; follows only trie edges. Returns the state
  /// spelled by `text` or nullopt-like npos if it is not a trie path.
  static constexpr StateId npos = UINT32_MAX;
  StateId find_state(std::string_view text) const;

  /// All (possibly overlapping) raw substring occurrences, in text order.
  std::vector<Match> find_all(std::string_view text) const;

  /// Whole-token occurrence counts: counts[p] is the number of tokens equal to
  /// pattern p. The automaton restarts at the root on every token boundary,
  /// which is the same as scanning the tokens joined by an unmatchable
  /// separator.
  std::vector<std::uint32_t> count_tokens(std::span<const std::string> tokens) const;
  void add_token_counts(std::span<const std::string> tokens, std::span<std::uint32_t> counts) const;

 private:
  std::vector<std::string> patterns_;
  std::uint8_t byte_class_[256] = {};
  std::size_t classes_ = 1;
  std::vector<StateId> delta_;
  std::vector<StateId> goto_;  // trie edges only, npos when absent
  std::vector<StateId> fail_;
  std::vector<std::uint32_t> depth_;
  std::vector<std::uint32_t> terminal_offsets_;
  std::vector<PatternId> terminal_;
  std::vector<std::uint32_t> output_offsets_;
  std::vector<PatternId> outputs_;
};

}  // namespace ksr
