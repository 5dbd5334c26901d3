#pragma once

// Downgrade-only cells over the immutability lattice and the worklist
// fixpoint that drives them, plus an exhaustive enumeration oracle for
// small graphs.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "immut/template_ir.hpp"
#include "immut/verdict.hpp"

namespace immut {

struct ParentCause {
  TypeRef parent;
  friend bool operator==(const ParentCause&, const ParentCause&) = default;
};

struct FieldCause {
  std::string field;
  TypeRef type;
  friend bool operator==(const FieldCause&, const FieldCause&) = default;
};

using Cause = std::variant<ParentCause, FieldCause>;

struct EvidenceRecord {
  AttributeKey attribute;
  Cause cause;
  friend bool operator==(const EvidenceRecord&, const EvidenceRecord&) = default;
};

struct Cell {
  std::string owner;
  Verdict value = Verdict::DeepImmutable;
  AttributeSet attributes;
  std::vector<EvidenceRecord> evidence;
};

/// Lowers `cell` to meet(cell.value, v) and adds `attrs` and any new
/// evidence. Returns true iff the value strictly decreased or the attribute
/// set grew.
inline bool downgrade_cell(Cell& cell, Verdict v, AttributeSet attrs,
                           std::span<const EvidenceRecord> evidence) {
  Verdict lowered = meet(cell.value, v);
  bool changed = lowered != cell.value;
  cell.value = lowered;
  changed |= cell.attributes.merge(attrs);
  for (const auto& e : evidence) {
    if (std::find(cell.evidence.begin(), cell.evidence.end(), e) == cell.evidence.end()) {
      cell.evidence.push_back(e);
    }
  }
  return changed;
}

/// What a transfer function reports for one template under an assignment.
struct TransferResult {
  Verdict verdict = Verdict::DeepImmutable;
  AttributeSet attributes;
  std::vector<EvidenceRecord> evidence;
};

/// A verdict per template, indexed like TemplateGraph::templates().
using Assignment = std::vector<Verdict>;

/// Transfer callables take (template, assignment) and return a
/// TransferResult; assumptions and graph are bound by the caller.
template <typename F>
concept TransferFunction = requires(F f, const TemplateDef& t, std::span<const Verdict> sigma) {
  { f(t, sigma) } -> std::convertible_to<TransferResult>;
};

/// For every template, the indices of graph templates named anywhere in its
/// parents or field types (including nested type arguments). Abstract heads
/// in scope are not dependencies.
inline std::vector<std::vector<std::size_t>> template_dependencies(const TemplateGraph& graph) {
  std::vector<std::vector<std::size_t>> deps(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto& t = graph.at(i);
    std::vector<bool> seen(graph.size(), false);
    auto visit = [&](const TypeRef& ref, auto& self) -> void {
      if (!(ref.is_simple_identifier() && t.is_abstract_in_scope(ref.head))) {
        if (auto idx = graph.index_of(ref.head); idx && !seen[*idx]) {
          seen[*idx] = true;
          deps[i].push_back(*idx);
        }
      }
      for (const auto& a : ref.args) self(a, self);
    };
    for (const auto& p : t.parents) visit(p, visit);
    for (const auto& f : t.fields) visit(f.declared_type, visit);
  }
  return deps;
}

struct FixpointOptions {
  /// When set, the initial worklist is shuffled and each step pops a
  /// uniformly random pending template. Unset means FIFO in name order.
  std::optional<std::uint64_t> shuffle_seed;
};

struct FixpointStats {
  std::size_t transfer_evaluations = 0;
  std::size_t strict_downgrades = 0;
  /// Audit counter; any nonzero value is an engine bug.
  std::size_t value_increases = 0;
};

struct FixpointOutcome {
  std::vector<Cell> cells;  // indexed like the graph
  FixpointStats stats;

  Assignment assignment() const {
    Assignment out;
    out.reserve(cells.size());
    for (const auto& c : cells) out.push_back(c.value);
    return out;
  }
};

/// Worklist iteration from the top element. Every template starts at
/// DeepImmutable; a template is recomputed, its cell lowered, and on change
/// every template depending on it is re-enqueued. With a monotone transfer
/// this reaches the greatest fixpoint; cycles without downgrade evidence stay
/// at their initial value.
template <TransferFunction Transfer>
FixpointOutcome run_fixpoint(const TemplateGraph& graph, Transfer&& transfer,
                             const FixpointOptions& options = {}) {
  const std::size_t n = graph.size();
  FixpointOutcome out;
  out.cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.cells[i].owner = graph.at(i).name;

  auto deps = template_dependencies(graph);
  std::vector<std::vector<std::size_t>> dependents(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto d : deps[i]) dependents[d].push_back(i);
  }

  Assignment sigma(n, Verdict::DeepImmutable);
  std::deque<std::size_t> worklist;
  std::vector<bool> queued(n, true);
  for (std::size_t i = 0; i < n; ++i) worklist.push_back(i);

  std::optional<std::mt19937_64> rng;
  if (options.shuffle_seed) {
    rng.emplace(*options.shuffle_seed);
    std::shuffle(worklist.begin(), worklist.end(), *rng);
  }

  while (!worklist.empty()) {
    if (rng && worklist.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, worklist.size() - 1);
      std::swap(worklist.front(), worklist[pick(*rng)]);
    }
    std::size_t i = worklist.front();
    worklist.pop_front();
    queued[i] = false;

    TransferResult r = transfer(graph.at(i), std::span<const Verdict>(sigma));
    ++out.stats.transfer_evaluations;

    Cell& cell = out.cells[i];
    Verdict before = cell.value;
    downgrade_cell(cell, r.verdict, r.attributes, r.evidence);
    if (before < cell.value) ++out.stats.value_increases;
    // Dependents read verdicts only, so attribute growth alone does not
    // re-enqueue them.
    if (cell.value == before) continue;
    ++out.stats.strict_downgrades;
    sigma[i] = cell.value;
    for (auto d : dependents[i]) {
      if (!queued[d]) {
        queued[d] = true;
        worklist.push_back(d);
      }
    }
  }
  return out;
}

class OracleLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kOracleMaxTemplates = 10;

/// Enumerates all 4^n assignments, keeps those equal to the transfer's
/// verdict pointwise, and returns the pointwise greatest one.
template <typename Transfer>
std::map<std::string, Verdict> exhaustive_fixpoint_oracle(const TemplateGraph& graph,
                                                          Transfer&& transfer) {
  const std::size_t n = graph.size();
  if (n > kOracleMaxTemplates) {
    throw OracleLimitError("graph has " + std::to_string(n) +
                           " templates; exhaustive enumeration supports at most " +
                           std::to_string(kOracleMaxTemplates));
  }
  Assignment sigma(n, Verdict::Mutable);
  std::optional<Assignment> greatest;
  for (;;) {
    bool fixed = true;
    for (std::size_t i = 0; i < n && fixed; ++i) {
      fixed = Verdict(transfer(graph.at(i), std::span<const Verdict>(sigma)).verdict) == sigma[i];
    }
    if (fixed) {
      if (!greatest) {
        greatest = sigma;
      } else {
        for (std::size_t i = 0; i < n; ++i) (*greatest)[i] = join((*greatest)[i], sigma[i]);
      }
    }
    // Odometer increment over {Mutable..Deep}^n.
    std::size_t pos = 0;
    while (pos < n && sigma[pos] == Verdict::DeepImmutable) {
      sigma[pos] = Verdict::Mutable;
      ++pos;
    }
    if (pos == n) break;
    sigma[pos] = static_cast<Verdict>(static_cast<std::uint8_t>(sigma[pos]) + 1);
  }
  if (!greatest) {
    throw std::logic_error("transfer has no fixpoint; it is not monotone");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (Verdict(transfer(graph.at(i), std::span<const Verdict>(*greatest)).verdict) == (*greatest)[i]) continue;
    throw std::logic_error("join of fixpoints is not a fixpoint; transfer is not monotone");
  }
  std::map<std::string, Verdict> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace(graph.at(i).name, (*greatest)[i]);
  return out;
}

}  // namespace immut
