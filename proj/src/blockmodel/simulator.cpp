#include <algorithm>
#include <cmath>
#include <queue>

#include "heterotest/blockmodel.hpp"
#include "heterotest/util.hpp"

namespace heterotest::blockmodel {

namespace {

// Kahn's algorithm; ties between ready nodes go to the smallest id. A delay's
// output does not depend on its current input, so delay inputs are not
// ordering edges.
std::vector<int> schedule(const ClosedGraph& g) {
  const auto n = g.nodes.size();
  std::vector<int> pending(n, 0);
  std::vector<std::vector<int>> consumers(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = g.nodes[i];
    if (node.block && node.block->kind == BlockKind::delay) continue;
    for (int src : node.inputs) {
      consumers[static_cast<std::size_t>(src)].push_back(static_cast<int>(i));
      ++pending[i];
    }
  }
  auto later = [&](int a, int b) { return g.nodes[static_cast<std::size_t>(a)].id > g.nodes[static_cast<std::size_t>(b)].id; };
  std::priority_queue<int, std::vector<int>, decltype(later)> ready(later);
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(static_cast<int>(i));
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int cur = ready.top();
    ready.pop();
    order.push_back(cur);
    for (int c : consumers[static_cast<std::size_t>(cur)]) {
      if (--pending[static_cast<std::size_t>(c)] == 0) ready.push(c);
    }
  }
  if (order.size() != n) {
    // Leftover nodes include everything downstream of a cycle; peel off
    // those without a leftover consumer until only cycle members remain.
    std::vector<bool> left(n);
    for (std::size_t i = 0; i < n; ++i) left[i] = pending[i] > 0;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!left[i]) continue;
        bool feeds = std::any_of(consumers[i].begin(), consumers[i].end(),
                                 [&](int c) { return left[static_cast<std::size_t>(c)]; });
        if (!feeds) {
          left[i] = false;
          changed = true;
        }
      }
    }
    std::vector<std::string> stuck;
    for (std::size_t i = 0; i < n; ++i) {
      if (left[i]) stuck.push_back(g.nodes[i].id);
    }
    std::sort(stuck.begin(), stuck.end());
    std::string list;
    for (const auto& s : stuck) list += (list.empty() ? "" : ", ") + s;
    throw SimulationError("algebraic loop involving " + list);
  }
  return order;
}

}  // namespace

bool SimTrace::failed() const {
  return std::any_of(outcomes.begin(), outcomes.end(), [](const AssertionOutcome& o) { return !o.passed; });
}

SimTrace simulate(const ModelGraph& graph, std::string_view test, int steps, SimOptions options) {
  if (steps <= 0) throw SimulationError("step count must be positive");
  ClosedGraph g = close_graph(graph, test);
  if (options.minimize && is_time_invariant(graph, test)) steps = 1;
  const std::vector<int> order = schedule(g);

  const auto n = g.nodes.size();
  std::vector<double> value(n, 0.0);
  std::vector<double> state(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = g.nodes[i].block;
    if (b && b->kind == BlockKind::delay) state[i] = b->numbers.empty() ? 0.0 : b->numbers[0];
  }

  SimTrace trace;
  trace.steps = steps;
  for (const auto& node : g.nodes) {
    if (node.block && node.block->kind == BlockKind::sink) trace.sinks[node.id].reserve(static_cast<std::size_t>(steps));
  }

  for (int k = 0; k < steps; ++k) {
    for (int idx : order) {
      const auto i = static_cast<std::size_t>(idx);
      const auto& node = g.nodes[i];
      auto in = [&](std::size_t port) { return value[static_cast<std::size_t>(node.inputs[port])]; };
      if (!node.block) {
        value[i] = in(0);
        continue;
      }
      const Block& b = *node.block;
      const auto& p = b.numbers;
      double v = 0.0;
      switch (b.kind) {
        case BlockKind::constant: v = p[0]; break;
        case BlockKind::step: {
          double before = p.size() == 3 ? p[1] : 0.0;
          double after = p.size() == 3 ? p[2] : 1.0;
          v = static_cast<double>(k) < p[0] ? before : after;
          break;
        }
        case BlockKind::sequence: v = p[std::min(static_cast<std::size_t>(k), p.size() - 1)]; break;
        case BlockKind::clock: v = static_cast<double>(k) * (p.empty() ? 1.0 : p[0]); break;
        case BlockKind::gain: v = p[0] * in(0); break;
        case BlockKind::sum:
          for (std::size_t j = 0; j < b.signs.size(); ++j) v = b.signs[j] == '+' ? v + in(j) : v - in(j);
          break;
        case BlockKind::product:
          v = in(0);
          for (std::size_t j = 1; j < node.inputs.size(); ++j) v *= in(j);
          break;
        case BlockKind::delay: v = state[i]; break;
        case BlockKind::saturate: v = std::clamp(in(0), p[0], p[1]); break;
        case BlockKind::sink:
          v = in(0);
          trace.sinks[node.id].push_back(v);
          break;
        case BlockKind::assert_eq: {
          double actual = in(0);
          double expected = in(1);
          double tol = p.empty() ? 0.0 : p[0];
          trace.outcomes.push_back(AssertionOutcome{node.id, k, actual, expected, std::fabs(actual - expected) <= tol});
          v = actual;
          break;
        }
      }
      if (!std::isfinite(v)) {
        throw SimulationError("non-finite value produced by block '" + node.id + "' at step " + std::to_string(k));
      }
      value[i] = v;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& b = g.nodes[i].block;
      if (b && b->kind == BlockKind::delay) state[i] = value[static_cast<std::size_t>(g.nodes[i].inputs[0])];
    }
  }
  return trace;
}

}  // namespace heterotest::blockmodel
