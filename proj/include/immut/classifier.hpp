#pragma once

// The immutability transfer function. A template starts deeply immutable and
// is lowered by
//   - its own `var` fields (Mutable; C public, D private),
//   - its parents (Unknown -> Mutable/E, assumed Mutable -> A, Mutable -> B,
//     Shallow -> Shallow/F, conditionally deep -> per type argument),
//   - the types of its `val` fields (abstract -> ConditionallyDeep,
//     unknown -> G, mutable -> H or I, shallow -> J).
//
// A conditionally deep generic is instantiated by folding the outcomes of the
// type arguments at its *relevant* parameter positions: the parameters that
// reach one of its field types or parent type arguments. Relevance is a
// static least fixpoint over the graph, so the transfer stays monotone in the
// assignment.

#include <cstddef>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "immut/lattice.hpp"
#include "immut/template_ir.hpp"
#include "immut/verdict.hpp"

namespace immut {

/// Severity order, weakest first. Folding keeps the weakest outcome.
enum class FieldTypeKind { Mutable, Unknown, Shallow, Abstract, Deep };

struct FieldTypeVerdict {
  FieldTypeKind kind = FieldTypeKind::Deep;
  /// Only meaningful for Mutable: the verdict came from the assumption list.
  bool assumed = false;

  friend bool operator==(const FieldTypeVerdict&, const FieldTypeVerdict&) = default;
};

inline FieldTypeVerdict weakest(FieldTypeVerdict a, FieldTypeVerdict b) {
  if (a.kind == FieldTypeKind::Mutable && b.kind == FieldTypeKind::Mutable) {
    return {FieldTypeKind::Mutable, a.assumed && b.assumed};
  }
  return static_cast<int>(a.kind) <= static_cast<int>(b.kind) ? a : b;
}

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnalysisResult {
  std::map<std::string, Verdict> verdicts;
  std::map<std::string, AttributeSet> attributes;
  std::map<std::string, std::vector<EvidenceRecord>> evidence;

  friend bool operator==(const AnalysisResult&, const AnalysisResult&) = default;
};

/// Which abstract types of a generic template matter when it is
/// instantiated.
struct GenericRelevance {
  std::vector<bool> params;   // parallel to type_params
  std::vector<bool> members;  // parallel to abstract_type_members
  /// Instantiating it leaves something unsupplied (a relevant abstract type
  /// member, or a raw use of another generic inside it).
  bool opaque = false;

  friend bool operator==(const GenericRelevance&, const GenericRelevance&) = default;
};

/// Binds a graph and an assumption list; evaluates field types and the
/// transfer function against an assignment. Holds references, so the graph
/// and assumptions must outlive it.
class Classifier {
 public:
  Classifier(const TemplateGraph& graph, const Assumptions& assumptions)
      : graph_(graph), assumptions_(assumptions) {
    compute_relevance();
  }

  const TemplateGraph& graph() const noexcept { return graph_; }
  const Assumptions& assumptions() const noexcept { return assumptions_; }
  const GenericRelevance& relevance(std::size_t index) const { return relevance_.at(index); }

  Resolution resolve(const TemplateDef& scope, const TypeRef& ref) const {
    return resolve_type_ref(graph_, scope, ref, assumptions_);
  }

  FieldTypeVerdict evaluate_field_type(const TypeRef& ref, const TemplateDef& scope,
                                       std::span<const Verdict> sigma) const {
    auto res = resolve(scope, ref);
    if (std::holds_alternative<ResolvedAbstract>(res)) return {FieldTypeKind::Abstract};
    if (std::holds_alternative<ResolvedUnknown>(res)) return {FieldTypeKind::Unknown};
    Verdict base = std::holds_alternative<ResolvedAssumed>(res)
                       ? std::get<ResolvedAssumed>(res).verdict
                       : sigma[std::get<ResolvedInternal>(res).index];
    bool assumed = std::holds_alternative<ResolvedAssumed>(res);
    switch (base) {
      case Verdict::Mutable: return {FieldTypeKind::Mutable, assumed};
      case Verdict::ShallowImmutable: return {FieldTypeKind::Shallow};
      case Verdict::DeepImmutable: return {FieldTypeKind::Deep};
      case Verdict::ConditionallyDeep: break;
    }
    FieldTypeVerdict folded{FieldTypeKind::Deep};
    for_each_instantiation_outcome(res, ref, scope, sigma,
                                   [&](FieldTypeVerdict o) { folded = weakest(folded, o); });
    return folded;
  }

  TransferResult transfer(const TemplateDef& t, std::span<const Verdict> sigma) const {
    EvidenceSink sink;
    apply(t, sigma, sink);
    return std::move(sink.result);
  }

  /// Same computation as transfer() without building evidence.
  Verdict transfer_verdict(const TemplateDef& t, std::span<const Verdict> sigma) const {
    VerdictSink sink;
    apply(t, sigma, sink);
    return sink.verdict;
  }

 private:
  struct EvidenceSink {
    TransferResult result;
    void lower(Verdict v) { result.verdict = meet(result.verdict, v); }
    template <typename MakeCause>
    void note(Verdict v, AttributeKey k, MakeCause&& make_cause) {
      lower(v);
      result.attributes.insert(k);
      EvidenceRecord rec{k, make_cause()};
      if (std::find(result.evidence.begin(), result.evidence.end(), rec) ==
          result.evidence.end()) {
        result.evidence.push_back(std::move(rec));
      }
    }
  };

  struct VerdictSink {
    Verdict verdict = Verdict::DeepImmutable;
    void lower(Verdict v) { verdict = meet(verdict, v); }
    template <typename MakeCause>
    void note(Verdict v, AttributeKey, MakeCause&&) { lower(v); }
  };

  FieldTypeVerdict raw_outcome(const TemplateDef& scope) const {
    return {scope.has_abstract_types() ? FieldTypeKind::Abstract : FieldTypeKind::Unknown};
  }

  /// Outcomes that instantiating a conditionally deep `ref` depends on.
  template <typename Fn>
  void for_each_instantiation_outcome(const Resolution& res, const TypeRef& ref,
                                      const TemplateDef& scope, std::span<const Verdict> sigma,
                                      Fn&& fn) const {
    if (const auto* internal = std::get_if<ResolvedInternal>(&res)) {
      const auto& rel = relevance_[internal->index];
      for (std::size_t i = 0; i < rel.params.size(); ++i) {
        if (!rel.params[i]) continue;
        fn(i < ref.args.size() ? evaluate_field_type(ref.args[i], scope, sigma)
                               : raw_outcome(scope));
      }
      if (rel.opaque) fn(raw_outcome(scope));
      return;
    }
    // Assumed conditionally deep: no parameter list to consult.
    for (const auto& a : ref.args) fn(evaluate_field_type(a, scope, sigma));
    if (ref.args.empty()) fn(raw_outcome(scope));
  }

  template <typename Sink, typename MakeCause>
  void apply_outcome(FieldTypeVerdict o, bool collapse_abstract, Sink& sink,
                     MakeCause&& make_cause) const {
    auto kind = o.kind;
    if (collapse_abstract && kind == FieldTypeKind::Abstract) kind = FieldTypeKind::Unknown;
    switch (kind) {
      case FieldTypeKind::Abstract: sink.lower(Verdict::ConditionallyDeep); break;
      case FieldTypeKind::Mutable:
        sink.note(Verdict::ShallowImmutable, o.assumed ? AttributeKey::I : AttributeKey::H,
                  make_cause);
        break;
      case FieldTypeKind::Unknown:
        sink.note(Verdict::ShallowImmutable, AttributeKey::G, make_cause);
        break;
      case FieldTypeKind::Shallow:
        sink.note(Verdict::ShallowImmutable, AttributeKey::J, make_cause);
        break;
      case FieldTypeKind::Deep: break;
    }
  }

  template <typename Sink>
  void apply(const TemplateDef& t, std::span<const Verdict> sigma, Sink& sink) const {
    const bool collapse = is_singleton_like(t.kind);

    for (const auto& f : t.fields) {
      if (!f.reassignable) continue;
      sink.note(Verdict::Mutable,
                f.visibility == Visibility::Private ? AttributeKey::D : AttributeKey::C,
                [&] { return Cause{FieldCause{f.name, f.declared_type}}; });
    }

    for (const auto& p : t.parents) {
      auto cause = [&] { return Cause{ParentCause{p}}; };
      auto res = resolve(t, p);
      if (std::holds_alternative<ResolvedAbstract>(res)) {
        throw AnalysisError("template '" + t.name + "': parent '" + to_string(p) +
                            "' is an abstract type");
      }
      if (std::holds_alternative<ResolvedUnknown>(res)) {
        sink.note(Verdict::Mutable, AttributeKey::E, cause);
        continue;
      }
      const auto* assumed = std::get_if<ResolvedAssumed>(&res);
      Verdict base = assumed ? assumed->verdict : sigma[std::get<ResolvedInternal>(res).index];
      switch (base) {
        case Verdict::Mutable:
          sink.note(Verdict::Mutable, assumed ? AttributeKey::A : AttributeKey::B, cause);
          break;
        case Verdict::ShallowImmutable:
          sink.note(Verdict::ShallowImmutable, AttributeKey::F, cause);
          break;
        case Verdict::ConditionallyDeep:
          for_each_instantiation_outcome(res, p, t, sigma, [&](FieldTypeVerdict o) {
            apply_outcome(o, collapse, sink, cause);
          });
          break;
        case Verdict::DeepImmutable: break;
      }
    }

    for (const auto& f : t.fields) {
      if (f.reassignable) continue;
      apply_outcome(evaluate_field_type(f.declared_type, t, sigma), collapse, sink,
                    [&] { return Cause{FieldCause{f.name, f.declared_type}}; });
    }
  }

  // Least fixpoint: a parameter is relevant if it is a field type head, or
  // sits at a relevant position of another generic used in a field type or a
  // parent type argument.
  void compute_relevance() {
    relevance_.resize(graph_.size());
    for (std::size_t i = 0; i < graph_.size(); ++i) {
      const auto& t = graph_.at(i);
      relevance_[i].params.assign(t.type_params.size(), false);
      relevance_[i].members.assign(t.abstract_type_members.size(), false);
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < graph_.size(); ++i) {
        const auto& t = graph_.at(i);
        GenericRelevance next = relevance_[i];
        auto mark = [&](const TypeRef& ref, auto& self) -> void {
          auto res = resolve(t, ref);
          if (const auto* abs = std::get_if<ResolvedAbstract>(&res)) {
            for (std::size_t k = 0; k < t.type_params.size(); ++k) {
              if (t.type_params[k] == abs->identifier) next.params[k] = true;
            }
            for (std::size_t k = 0; k < t.abstract_type_members.size(); ++k) {
              if (t.abstract_type_members[k] == abs->identifier) next.members[k] = true;
            }
          } else if (const auto* in = std::get_if<ResolvedInternal>(&res)) {
            const auto& rel = relevance_[in->index];
            for (std::size_t k = 0; k < rel.params.size(); ++k) {
              if (!rel.params[k]) continue;
              if (k < ref.args.size()) {
                self(ref.args[k], self);
              } else {
                next.opaque = true;
              }
            }
            if (rel.opaque) next.opaque = true;
          } else if (const auto* as = std::get_if<ResolvedAssumed>(&res);
                     as && as->verdict == Verdict::ConditionallyDeep) {
            for (const auto& a : ref.args) self(a, self);
            if (ref.args.empty()) next.opaque = true;
          }
        };
        for (const auto& f : t.fields) {
          if (!f.reassignable) mark(f.declared_type, mark);
        }
        for (const auto& p : t.parents) {
          if (!(p.is_simple_identifier() && t.is_abstract_in_scope(p.head))) mark(p, mark);
        }
        for (bool m : next.members) next.opaque = next.opaque || m;
        if (!(next == relevance_[i])) {
          relevance_[i] = std::move(next);
          changed = true;
        }
      }
    }
  }

  const TemplateGraph& graph_;
  const Assumptions& assumptions_;
  std::vector<GenericRelevance> relevance_;
};

/// Free-standing form of Classifier::evaluate_field_type.
inline FieldTypeVerdict evaluate_field_type(const TypeRef& ref, const TemplateDef& scope,
                                            std::span<const Verdict> sigma,
                                            const TemplateGraph& graph,
                                            const Assumptions& assumptions) {
  return Classifier(graph, assumptions).evaluate_field_type(ref, scope, sigma);
}

/// Free-standing form of Classifier::transfer.
inline TransferResult transfer(const TemplateDef& t, std::span<const Verdict> sigma,
                               const TemplateGraph& graph, const Assumptions& assumptions) {
  return Classifier(graph, assumptions).transfer(t, sigma);
}

/// Throws AnalysisError naming the first template whose parent is one of its
/// own abstract types.
inline void check_parents_resolvable(const TemplateGraph& graph) {
  for (const auto& t : graph.templates()) {
    for (const auto& p : t.parents) {
      if (p.is_simple_identifier() && t.is_abstract_in_scope(p.head)) {
        throw AnalysisError("template '" + t.name + "': parent '" + to_string(p) +
                            "' is an abstract type");
      }
    }
  }
}

/// Runs the fixpoint and reports each template's verdict with the attributes
/// and evidence that explain it under the final assignment. Only keys of the
/// verdict's own class are kept: A..E for Mutable, F..J for Shallow.
inline AnalysisResult classify_corpus(const TemplateGraph& graph, const Assumptions& assumptions,
                                      const FixpointOptions& options = {},
                                      FixpointStats* stats = nullptr) {
  check_parents_resolvable(graph);
  Classifier clf(graph, assumptions);
  auto outcome = run_fixpoint(
      graph,
      [&](const TemplateDef& t, std::span<const Verdict> sigma) { return clf.transfer(t, sigma); },
      options);
  if (stats) *stats = outcome.stats;

  const Assignment sigma = outcome.assignment();
  AnalysisResult result;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto& t = graph.at(i);
    auto settled = clf.transfer(t, sigma);
    if (settled.verdict != sigma[i]) {
      throw std::logic_error("fixpoint did not settle for '" + t.name + "'");
    }
    AttributeSet keep;
    if (sigma[i] == Verdict::Mutable) keep = AttributeSet::mutable_keys();
    if (sigma[i] == Verdict::ShallowImmutable) keep = AttributeSet::shallow_keys();
    std::vector<EvidenceRecord> evidence;
    for (auto& e : settled.evidence) {
      if (keep.contains(e.attribute)) evidence.push_back(std::move(e));
    }
    result.verdicts.emplace(t.name, sigma[i]);
    result.attributes.emplace(t.name, settled.attributes.intersect(keep));
    result.evidence.emplace(t.name, std::move(evidence));
  }
  return result;
}

/// Checks the AnalysisResult invariants against the graph it came from.
/// Returns one message per violation.
inline std::vector<std::string> check_result_invariants(const AnalysisResult& result,
                                                        const TemplateGraph& graph) {
  std::vector<std::string> problems;
  for (const auto& t : graph.templates()) {
    auto v_it = result.verdicts.find(t.name);
    auto a_it = result.attributes.find(t.name);
    if (v_it == result.verdicts.end() || a_it == result.attributes.end()) {
      problems.push_back("'" + t.name + "' missing from result");
      continue;
    }
    Verdict v = v_it->second;
    AttributeSet attrs = a_it->second;
    switch (v) {
      case Verdict::Mutable:
        if (attrs.intersect(AttributeSet::mutable_keys()).empty() ||
            !AttributeSet::mutable_keys().includes(attrs)) {
          problems.push_back("'" + t.name + "' is mutable with attributes '" +
                             attrs.combo_key() + "'");
        }
        break;
      case Verdict::ShallowImmutable:
        if (attrs.intersect(AttributeSet::shallow_keys()).empty() ||
            !AttributeSet::shallow_keys().includes(attrs)) {
          problems.push_back("'" + t.name + "' is shallow with attributes '" +
                             attrs.combo_key() + "'");
        }
        break;
      case Verdict::ConditionallyDeep:
      case Verdict::DeepImmutable:
        if (!attrs.empty()) {
          problems.push_back("'" + t.name + "' is " + std::string(describe(v)) +
                             " but has attributes '" + attrs.combo_key() + "'");
        }
        break;
    }
    if (v == Verdict::ConditionallyDeep && is_singleton_like(t.kind)) {
      problems.push_back("'" + t.name + "' is a " + std::string(to_token(t.kind)) +
                         " but conditionally deep");
    }
    for (const auto& f : t.fields) {
      if (f.reassignable && v != Verdict::Mutable) {
        problems.push_back("'" + t.name + "' declares var '" + f.name + "' but is not mutable");
      }
    }
    if (auto e_it = result.evidence.find(t.name); e_it != result.evidence.end()) {
      for (auto k : attrs.keys()) {
        bool found = false;
        for (const auto& e : e_it->second) found = found || e.attribute == k;
        if (!found) {
          problems.push_back("'" + t.name + "' has attribute " + std::string(1, letter(k)) +
                             " without evidence");
        }
      }
    }
  }
  return problems;
}

/// Assumptions file: `qualified-name verdict` per line, `#` starts a comment.
class AssumptionsError : public std::runtime_error {
 public:
  AssumptionsError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline Assumptions parse_assumptions(std::string_view text) {
  Assumptions out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string name, verdict, extra;
    if (!(words >> name)) continue;
    if (!(words >> verdict)) throw AssumptionsError(lineno, "missing verdict for '" + name + "'");
    if (words >> extra) throw AssumptionsError(lineno, "unexpected '" + extra + "'");
    auto v = verdict_from_token(verdict);
    if (!v) throw AssumptionsError(lineno, "unknown verdict '" + verdict + "'");
    if (!out.emplace(name, *v).second) {
      throw AssumptionsError(lineno, "duplicate assumption for '" + name + "'");
    }
  }
  return out;
}

}  // namespace immut
