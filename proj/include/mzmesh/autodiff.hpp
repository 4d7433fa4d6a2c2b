#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mzmesh::ad {

// Reverse-mode tape over scalar doubles. Every recorded node stores the local
// partial derivatives with respect to its (at most two) parents, so a single
// reverse sweep in creation order propagates adjoints from one scalar output
// back to all leaves.
class Tape {
 public:
  static constexpr std::uint32_t npos = 0xffffffffu;

  std::uint32_t leaf(double) {
    nodes_.push_back(Node{npos, npos, 0.0, 0.0});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  std::uint32_t unary(std::uint32_t parent, double partial) {
    nodes_.push_back(Node{parent, npos, partial, 0.0});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  std::uint32_t binary(std::uint32_t p0, std::uint32_t p1, double d0, double d1) {
    nodes_.push_back(Node{p0, p1, d0, d1});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  // Seeds d(output) = 1 and accumulates adjoints for every node.
  void backward(std::uint32_t output) {
    adjoints_.assign(nodes_.size(), 0.0);
    adjoints_[output] = 1.0;
    for (std::uint32_t i = output + 1; i-- > 0;) {
      const double a = adjoints_[i];
      if (a == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.p0 != npos) adjoints_[n.p0] += n.d0 * a;
      if (n.p1 != npos) adjoints_[n.p1] += n.d1 * a;
    }
  }

  double adjoint(std::uint32_t node) const { return adjoints_[node]; }
  std::size_t size() const { return nodes_.size(); }

  // Drops all nodes but keeps the allocated capacity for reuse.
  void clear() {
    nodes_.clear();
    adjoints_.clear();
  }

  void reserve(std::size_t n) { nodes_.reserve(n); }

 private:
  struct Node {
    std::uint32_t p0, p1;
    double d0, d1;
  };
  std::vector<Node> nodes_;
  std::vector<double> adjoints_;
};

// Tracked scalar. A Rev without a tape is a plain constant; operators fold
// constants so that no tape nodes are recorded for them.
struct Rev {
  double v = 0.0;
  std::uint32_t node = Tape::npos;
  Tape* tape = nullptr;

  Rev() = default;
  Rev(double c) : v(c) {}  // NOLINT: implicit constant lift is intended
  Rev(double value, std::uint32_t n, Tape* t) : v(value), node(n), tape(t) {}

  Rev& operator+=(const Rev& o);
  Rev& operator-=(const Rev& o);
  Rev& operator*=(const Rev& o);
};

inline Rev make_leaf(Tape& tape, double value) { return Rev{value, tape.leaf(value), &tape}; }

inline double value_of(double x) { return x; }
inline double value_of(const Rev& x) { return x.v; }

namespace detail {
inline Tape* tape_of(const Rev& a, const Rev& b) { return a.tape ? a.tape : b.tape; }
}  // namespace detail

inline Rev operator+(const Rev& a, const Rev& b) {
  Tape* t = detail::tape_of(a, b);
  const double v = a.v + b.v;
  if (!t) return Rev(v);
  if (a.tape && b.tape) return Rev{v, t->binary(a.node, b.node, 1.0, 1.0), t};
  if (a.tape) return Rev{v, t->unary(a.node, 1.0), t};
  return Rev{v, t->unary(b.node, 1.0), t};
}

inline Rev operator-(const Rev& a, const Rev& b) {
  Tape* t = detail::tape_of(a, b);
  const double v = a.v - b.v;
  if (!t) return Rev(v);
  if (a.tape && b.tape) return Rev{v, t->binary(a.node, b.node, 1.0, -1.0), t};
  if (a.tape) return Rev{v, t->unary(a.node, 1.0), t};
  return Rev{v, t->unary(b.node, -1.0), t};
}

inline Rev operator-(const Rev& a) {
  if (!a.tape) return Rev(-a.v);
  return Rev{-a.v, a.tape->unary(a.node, -1.0), a.tape};
}

inline Rev operator*(const Rev& a, const Rev& b) {
  Tape* t = detail::tape_of(a, b);
  const double v = a.v * b.v;
  if (!t) return Rev(v);
  if (a.tape && b.tape) return Rev{v, t->binary(a.node, b.node, b.v, a.v), t};
  if (a.tape) return Rev{v, t->unary(a.node, b.v), t};
  return Rev{v, t->unary(b.node, a.v), t};
}

inline Rev operator/(const Rev& a, const Rev& b) {
  Tape* t = detail::tape_of(a, b);
  const double v = a.v / b.v;
  if (!t) return Rev(v);
  const double inv = 1.0 / b.v;
  if (a.tape && b.tape) return Rev{v, t->binary(a.node, b.node, inv, -v * inv), t};
  if (a.tape) return Rev{v, t->unary(a.node, inv), t};
  return Rev{v, t->unary(b.node, -v * inv), t};
}

inline Rev& Rev::operator+=(const Rev& o) { return *this = *this + o; }
inline Rev& Rev::operator-=(const Rev& o) { return *this = *this - o; }
inline Rev& Rev::operator*=(const Rev& o) { return *this = *this * o; }

inline Rev sin(const Rev& a) {
  const double v = std::sin(a.v);
  if (!a.tape) return Rev(v);
  return Rev{v, a.tape->unary(a.node, std::cos(a.v)), a.tape};
}

inline Rev cos(const Rev& a) {
  const double v = std::cos(a.v);
  if (!a.tape) return Rev(v);
  return Rev{v, a.tape->unary(a.node, -std::sin(a.v)), a.tape};
}

inline Rev exp(const Rev& a) {
  const double v = std::exp(a.v);
  if (!a.tape) return Rev(v);
  return Rev{v, a.tape->unary(a.node, v), a.tape};
}

inline Rev sqrt(const Rev& a) {
  const double v = std::sqrt(a.v);
  if (!a.tape) return Rev(v);
  return Rev{v, a.tape->unary(a.node, 0.5 / v), a.tape};
}

inline Rev log(const Rev& a) {
  const double v = std::log(a.v);
  if (!a.tape) return Rev(v);
  return Rev{v, a.tape->unary(a.node, 1.0 / a.v), a.tape};
}

}  // namespace mzmesh::ad
