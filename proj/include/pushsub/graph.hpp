#ifndef PUSHSUB_GRAPH_HPP
#define PUSHSUB_GRAPH_HPP

/// \file graph.hpp
/// \brief Time-varying directed graphs with self-arcs, generators, and the
/// uniform strong connectivity window.
///
/// Arc convention: the pair (j, i) means information flows from j to i, i.e.
/// j is an in-neighbor of i. Vertices are 0-indexed here; the text format
/// written by write_graph_sequence() is 1-indexed.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pushsub {

using Arc = std::pair<std::size_t, std::size_t>;  // (from, to)

class Digraph {
 public:
  Digraph() = default;

  /// Graph on n vertices holding only the self-arcs.
  explicit Digraph(std::size_t n) : n_(n), adj_(n * n, 0) {
    if (n == 0) throw std::invalid_argument("Digraph: n must be >= 1");
    for (std::size_t i = 0; i < n; ++i) adj_[i * n + i] = 1;
  }

  Digraph(std::size_t n, const std::vector<Arc>& arcs) : Digraph(n) {
    for (const auto& [from, to] : arcs) add_arc(from, to);
  }

  std::size_t size() const { return n_; }

  void add_arc(std::size_t from, std::size_t to) {
    if (from >= n_ || to >= n_)
      throw std::out_of_range("Digraph: arc endpoint outside vertex set");
    adj_[from * n_ + to] = 1;
  }

  bool has_arc(std::size_t from, std::size_t to) const {
    return adj_[from * n_ + to] != 0;
  }

  /// Number of out-neighbors of j, itself included (|N_j^-|).
  std::size_t out_degree(std::size_t j) const {
    return static_cast<std::size_t>(
        std::count(adj_.begin() + j * n_, adj_.begin() + (j + 1) * n_, 1));
  }

  std::vector<std::size_t> in_neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n_; ++j)
      if (has_arc(j, i)) out.push_back(j);
    return out;
  }

  std::vector<std::size_t> out_neighbors(std::size_t j) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n_; ++i)
      if (has_arc(j, i)) out.push_back(i);
    return out;
  }

  /// All arcs in lexicographic (from, to) order, self-arcs included.
  std::vector<Arc> arcs() const {
    std::vector<Arc> out;
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t i = 0; i < n_; ++i)
        if (has_arc(j, i)) out.emplace_back(j, i);
    return out;
  }

  bool has_all_self_arcs() const {
    for (std::size_t i = 0; i < n_; ++i)
      if (!has_arc(i, i)) return false;
    return true;
  }

  friend bool operator==(const Digraph&, const Digraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adj_;  // row = from, column = to
};

enum class GeneratorKind { StaticCycle, RotatingArc, RandomWalkable };

inline std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::StaticCycle: return "static-cycle";
    case GeneratorKind::RotatingArc: return "rotating-arc";
    case GeneratorKind::RandomWalkable: return "random-walkable";
  }
  return "unknown";
}

inline GeneratorKind parse_generator_kind(const std::string& s) {
  if (s == "static-cycle") return GeneratorKind::StaticCycle;
  if (s == "rotating-arc") return GeneratorKind::RotatingArc;
  if (s == "random-walkable") return GeneratorKind::RandomWalkable;
  throw std::invalid_argument("unknown graph generator kind '" + s + "'");
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::StaticCycle;
  // random-walkable only
  std::size_t inject_period = 5;
  double arc_probability = 0.2;
};

struct GraphSequence {
  std::size_t n = 0;
  GeneratorSpec spec;
  std::uint64_t seed = 0;
  std::vector<Digraph> graphs;

  std::size_t horizon() const { return graphs.size(); }
  const Digraph& operator[](std::size_t t) const { return graphs.at(t); }
};

/// The directed ring 0 -> 1 -> ... -> n-1 -> 0 plus self-arcs.
inline Digraph cycle_graph(std::size_t n) {
  Digraph g(n);
  if (n > 1)
    for (std::size_t i = 0; i < n; ++i) g.add_arc(i, (i + 1) % n);
  return g;
}

/// Draws with the caller's engine; random-walkable consumes one uniform per
/// off-diagonal pair per step, in (from, to) order.
inline GraphSequence generate_sequence(const GeneratorSpec& spec, std::size_t n,
                                       std::size_t horizon,
                                       std::mt19937_64& rng) {
  if (n == 0) throw std::invalid_argument("generate_sequence: n must be >= 1");
  if (horizon == 0)
    throw std::invalid_argument("generate_sequence: horizon must be >= 1");
  GraphSequence seq;
  seq.n = n;
  seq.spec = spec;
  seq.graphs.reserve(horizon);
  switch (spec.kind) {
    case GeneratorKind::StaticCycle: {
      const Digraph ring = cycle_graph(n);
      seq.graphs.assign(horizon, ring);
      break;
    }
    case GeneratorKind::RotatingArc: {
      for (std::size_t t = 0; t < horizon; ++t) {
        Digraph g(n);
        g.add_arc(t % n, (t + 1) % n);
        seq.graphs.push_back(std::move(g));
      }
      break;
    }
    case GeneratorKind::RandomWalkable: {
      if (spec.inject_period == 0)
        throw std::invalid_argument("random-walkable: inject_period must be >= 1");
      if (!(spec.arc_probability >= 0.0 && spec.arc_probability <= 1.0))
        throw std::invalid_argument("random-walkable: arc_probability must lie in [0,1]");
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (std::size_t t = 0; t < horizon; ++t) {
        Digraph g(n);
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t i = 0; i < n; ++i)
            if (i != j && unif(rng) < spec.arc_probability) g.add_arc(j, i);
        if (t % spec.inject_period == 0 && n > 1)
          for (std::size_t i = 0; i < n; ++i) g.add_arc(i, (i + 1) % n);
        seq.graphs.push_back(std::move(g));
      }
      break;
    }
  }
  return seq;
}

inline GraphSequence generate_sequence(const GeneratorSpec& spec, std::size_t n,
                                       std::size_t horizon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GraphSequence seq = generate_sequence(spec, n, horizon, rng);
  seq.seed = seed;
  return seq;
}

inline Digraph union_graph(const std::vector<Digraph>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("union_graph: empty list");
  const std::size_t n = graphs.front().size();
  Digraph u(n);
  for (const auto& g : graphs) {
    if (g.size() != n)
      throw std::invalid_argument("union_graph: graphs have different vertex counts");
    for (const auto& [from, to] : g.arcs()) u.add_arc(from, to);
  }
  return u;
}

namespace detail {

inline std::size_t reach_count(const Digraph& g, bool reversed) {
  const std::size_t n = g.size();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t u = 0; u < n; ++u) {
      const bool arc = reversed ? g.has_arc(u, v) : g.has_arc(v, u);
      if (arc && !seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count;
}

}  // namespace detail

/// Forward and backward reachability from vertex 0.
inline bool is_strongly_connected(const Digraph& g) {
  if (g.size() == 0) return false;
  return detail::reach_count(g, false) == g.size() &&
         detail::reach_count(g, true) == g.size();
}

/// Smallest L such that every window [t, t+L) with t+L <= horizon has a
/// strongly connected union, or nullopt when no L <= horizon works.
///
/// This certifies only the materialized horizon. A sequence that passes here
/// may still fail uniform strong connectivity beyond the last graph.
inline std::optional<std::size_t> uniform_connectivity_window(
    const GraphSequence& seq) {
  const std::size_t h = seq.horizon();
  if (h == 0) return std::nullopt;
  constexpr std::size_t kNever = static_cast<std::size_t>(-1);
  // need[t]: shortest window starting at t whose union is strongly connected.
  // need[t] <= need[t+1] + 1, which bounds the search from below t+1.
  std::vector<std::size_t> need(h, kNever);
  for (std::size_t t = h; t-- > 0;) {
    const std::size_t cap =
        (t + 1 < h && need[t + 1] != kNever) ? need[t + 1] + 1 : h - t;
    Digraph acc(seq.n);
    for (std::size_t len = 1; len <= cap && t + len <= h; ++len) {
      for (const auto& [from, to] : seq.graphs[t + len - 1].arcs())
        acc.add_arc(from, to);
      if (is_strongly_connected(acc)) {
        need[t] = len;
        break;
      }
    }
  }
  for (std::size_t L = 1; L <= h; ++L) {
    bool ok = true;
    for (std::size_t t = 0; t + L <= h && ok; ++t) ok = need[t] <= L;
    if (ok) return L;
  }
  return std::nullopt;
}

/// Line format: "n horizon", then one line per step "t: j>i j>i ..." with
/// 1-indexed vertices and self-arcs omitted.
inline void write_graph_sequence(std::ostream& os, const GraphSequence& seq) {
  os << seq.n << ' ' << seq.horizon() << '\n';
  for (std::size_t t = 0; t < seq.horizon(); ++t) {
    os << t << ':';
    for (const auto& [from, to] : seq.graphs[t].arcs())
      if (from != to) os << ' ' << from + 1 << '>' << to + 1;
    os << '\n';
  }
}

inline GraphSequence read_graph_sequence(std::istream& is) {
  GraphSequence seq;
  std::size_t horizon = 0;
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("graph file: missing header");
  {
    std::istringstream hs(line);
    if (!(hs >> seq.n >> horizon) || seq.n == 0)
      throw std::runtime_error("graph file: header must be 'n horizon' with n >= 1");
  }
  seq.graphs.reserve(horizon);
  while (seq.graphs.size() < horizon && std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("graph file: step line without ':' -> " + line);
    const std::size_t t = std::stoul(line.substr(0, colon));
    if (t != seq.graphs.size())
      throw std::runtime_error("graph file: steps must be contiguous from 0");
    Digraph g(seq.n);
    std::istringstream ls(line.substr(colon + 1));
    std::string tok;
    while (ls >> tok) {
      const auto gt = tok.find('>');
      if (gt == std::string::npos)
        throw std::runtime_error("graph file: bad arc token '" + tok + "'");
      const std::size_t from = std::stoul(tok.substr(0, gt));
      const std::size_t to = std::stoul(tok.substr(gt + 1));
      if (from == 0 || to == 0 || from > seq.n || to > seq.n)
        throw std::runtime_error("graph file: vertex out of range in '" + tok + "'");
      g.add_arc(from - 1, to - 1);
    }
    seq.graphs.push_back(std::move(g));
  }
  if (seq.graphs.size() != horizon)
    throw std::runtime_error("graph file: fewer step lines than the declared horizon");
  return seq;
}

}  // namespace pushsub

#endif  // PUSHSUB_GRAPH_HPP
