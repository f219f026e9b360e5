#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace chartdate {

/// Generalized suffix automaton over a collection of token-id sequences.
/// Every distinct substring of every sequence corresponds to exactly one
/// state, reachable from the root by reading the substring. Immutable once
/// built.
class SuffixAutomaton {
 public:
  using Token = std::uint32_t;
  using State = std::uint32_t;

  static constexpr State kRoot = 0;

  static SuffixAutomaton build(std::span<const std::vector<Token>> sequences);

  std::size_t state_count() const { return length_.size(); }
  std::optional<State> next(State s, Token t) const;
  /// Length of the longest substring in state s.
  std::uint32_t length(State s) const { return length_[s]; }
  /// Suffix link; the root links to itself.
  State link(State s) const { return link_[s]; }

  /// Sequences containing the substrings of state s, ascending, distinct.
  std::vector<std::uint32_t> sequences(State s) const;
  /// Number of (prefix end, sequence) points in the subtree of s: an
  /// upper bound on the work done by sequences(s).
  std::size_t occurrence_points(State s) const;

 private:
  std::vector<std::uint32_t> length_;
  std::vector<State> link_;
  // Transitions in compressed rows, sorted by token within a row.
  std::vector<std::uint32_t> edge_begin_;
  std::vector<std::pair<Token, State>> edges_;
  // Link-tree Euler intervals [tin, tout) and prefix end points sorted by
  // the tin of the state where the prefix ends.
  std::vector<std::uint32_t> tin_;
  std::vector<std::uint32_t> tout_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> points_;  // (tin, sequence)
};

}  // namespace chartdate
