#include "chartdate/suffix_automaton.hpp"

#include <algorithm>

namespace chartdate {

namespace {

constexpr std::uint32_t kNoLink = 0xffffffffu;

struct Builder {
  std::vector<std::uint32_t> length{0};
  std::vector<std::uint32_t> link{kNoLink};
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> next{{}};

  std::uint32_t* find(std::uint32_t s, std::uint32_t t) {
    auto& row = next[s];
    auto it = std::lower_bound(row.begin(), row.end(), t,
                               [](const auto& e, std::uint32_t key) { return e.first < key; });
    return it != row.end() && it->first == t ? &it->second : nullptr;
  }

  void set(std::uint32_t s, std::uint32_t t, std::uint32_t target) {
    auto& row = next[s];
    auto it = std::lower_bound(row.begin(), row.end(), t,
                               [](const auto& e, std::uint32_t key) { return e.first < key; });
    if (it != row.end() && it->first == t)
      it->second = target;
    else
      row.insert(it, {t, target});
  }

  std::uint32_t add(std::uint32_t len, std::uint32_t lnk) {
    length.push_back(len);
    link.push_back(lnk);
    next.emplace_back();
    return static_cast<std::uint32_t>(length.size() - 1);
  }

  std::uint32_t clone(std::uint32_t q, std::uint32_t len) {
    const std::uint32_t c = add(len, link[q]);
    next[c] = next[q];
    return c;
  }

  // Redirects transitions on t into q, walking suffix links from p, to c.
  void redirect(std::uint32_t p, std::uint32_t t, std::uint32_t q, std::uint32_t c) {
    while (p != kNoLink) {
      auto* e = find(p, t);
      if (!e || *e != q) break;
      *e = c;
      p = link[p];
    }
  }

  std::uint32_t extend(std::uint32_t last, std::uint32_t t) {
    if (auto* e = find(last, t)) {
      const std::uint32_t q = *e;
      if (length[q] == length[last] + 1) return q;
      const std::uint32_t c = clone(q, length[last] + 1);
      link[q] = c;
      redirect(last, t, q, c);
      return c;
    }
    const std::uint32_t cur = add(length[last] + 1, 0);
    std::uint32_t p = last;
    while (p != kNoLink && !find(p, t)) {
      set(p, t, cur);
      p = link[p];
    }
    if (p == kNoLink) return cur;
    const std::uint32_t q = *find(p, t);
    if (length[p] + 1 == length[q]) {
      link[cur] = q;
      return cur;
    }
    const std::uint32_t c = clone(q, length[p] + 1);
    link[q] = c;
    link[cur] = c;
    redirect(p, t, q, c);
    return cur;
  }
};

}  // namespace

SuffixAutomaton SuffixAutomaton::build(std::span<const std::vector<Token>> sequences) {
  Builder b;
  std::vector<std::pair<State, std::uint32_t>> ends;  // (state, sequence)
  for (std::uint32_t seq = 0; seq < sequences.size(); ++seq) {
    State last = kRoot;
    for (Token t : sequences[seq]) {
      last = b.extend(last, t);
      ends.emplace_back(last, seq);
    }
  }

  SuffixAutomaton sa;
  const auto n = b.length.size();
  sa.length_ = std::move(b.length);
  sa.link_ = std::move(b.link);
  sa.link_[kRoot] = kRoot;

  sa.edge_begin_.resize(n + 1, 0);
  for (std::size_t s = 0; s < n; ++s)
    sa.edge_begin_[s + 1] = sa.edge_begin_[s] + static_cast<std::uint32_t>(b.next[s].size());
  sa.edges_.reserve(sa.edge_begin_[n]);
  for (auto& row : b.next) {
    sa.edges_.insert(sa.edges_.end(), row.begin(), row.end());
    row = {};
  }

  // Euler tour of the suffix-link tree, iteratively.
  std::vector<std::uint32_t> child_begin(n + 1, 0);
  for (std::size_t s = 1; s < n; ++s) ++child_begin[sa.link_[s] + 1];
  for (std::size_t s = 0; s < n; ++s) child_begin[s + 1] += child_begin[s];
  std::vector<State> children(n > 0 ? n - 1 : 0);
  {
    std::vector<std::uint32_t> fill(child_begin.begin(), child_begin.end() - 1);
    for (std::size_t s = 1; s < n; ++s) children[fill[sa.link_[s]]++] = static_cast<State>(s);
  }
  sa.tin_.assign(n, 0);
  sa.tout_.assign(n, 0);
  std::uint32_t clock = 0;
  std::vector<std::pair<State, std::uint32_t>> stack{{kRoot, child_begin[kRoot]}};
  sa.tin_[kRoot] = clock++;
  while (!stack.empty()) {
    auto& [s, pos] = stack.back();
    if (pos < child_begin[s + 1]) {
      const State c = children[pos++];
      sa.tin_[c] = clock++;
      stack.emplace_back(c, child_begin[c]);
    } else {
      sa.tout_[s] = clock;
      stack.pop_back();
    }
  }

  sa.points_.reserve(ends.size());
  for (auto [state, seq] : ends) sa.points_.emplace_back(sa.tin_[state], seq);
  std::sort(sa.points_.begin(), sa.points_.end());
  return sa;
}

std::optional<SuffixAutomaton::State> SuffixAutomaton::next(State s, Token t) const {
  const auto first = edges_.begin() + edge_begin_[s];
  const auto last = edges_.begin() + edge_begin_[s + 1];
  auto it = std::lower_bound(first, last, t, [](const auto& e, Token key) { return e.first < key; });
  if (it == last || it->first != t) return std::nullopt;
  return it->second;
}

namespace {
using Point = std::pair<std::uint32_t, std::uint32_t>;
}

std::size_t SuffixAutomaton::occurrence_points(State s) const {
  auto lo = std::lower_bound(points_.begin(), points_.end(), Point{tin_[s], 0});
  auto hi = std::lower_bound(points_.begin(), points_.end(), Point{tout_[s], 0});
  return static_cast<std::size_t>(hi - lo);
}

std::vector<std::uint32_t> SuffixAutomaton::sequences(State s) const {
  auto lo = std::lower_bound(points_.begin(), points_.end(), Point{tin_[s], 0});
  auto hi = std::lower_bound(points_.begin(), points_.end(), Point{tout_[s], 0});
  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(hi - lo));
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace chartdate
