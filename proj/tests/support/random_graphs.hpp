#pragma once

// Random TemplateGraph generators for the property and acceptance suites.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "immut/template_ir.hpp"

namespace immut::test {

struct RandomCase {
  TemplateGraph graph;
  Assumptions assumptions;
};

namespace random_detail {

inline const std::vector<std::string>& param_pool() {
  static const std::vector<std::string> pool = {"A", "B", "C"};
  return pool;
}

inline const std::vector<std::string>& external_pool() {
  static const std::vector<std::string> pool = {"lib.X0", "lib.X1", "lib.X2", "ext.Y0", "ext.Y1"};
  return pool;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::mt19937_64 rng_;
};

inline TemplateKind random_kind(Gen& g) { return kAllKinds[g.below(kAllKinds.size())]; }

}  // namespace random_detail

/// Arbitrary graphs, cycles allowed: random kinds, parents, fields, vars,
/// type parameters, abstract type members, type arguments and assumptions.
inline RandomCase random_graph(std::uint64_t seed, std::size_t max_templates) {
  using namespace random_detail;
  Gen g(seed);
  std::size_t n = 1 + g.below(max_templates);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("T" + std::to_string(i));

  std::vector<TemplateDef> defs(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& t = defs[i];
    t.name = names[i];
    t.kind = random_kind(g);
    if (!is_singleton_like(t.kind)) {
      std::size_t params = g.chance(0.5) ? 1 + g.below(2) : 0;
      for (std::size_t p = 0; p < params; ++p) t.type_params.push_back(param_pool()[p]);
      if (g.chance(0.15)) t.abstract_type_members.push_back("E");
    }
  }

  auto random_ref = [&](const TemplateDef& scope, int depth, bool allow_abstract,
                        auto& self) -> TypeRef {
    std::size_t roll = g.below(10);
    if (allow_abstract && scope.has_abstract_types() && roll < 3) {
      std::vector<std::string> abstracts = scope.type_params;
      abstracts.insert(abstracts.end(), scope.abstract_type_members.begin(),
                       scope.abstract_type_members.end());
      return type_ref(g.pick(abstracts));
    }
    if (roll < 7) {
      const auto& target = defs[g.below(n)];
      TypeRef ref = type_ref(target.name);
      // Usually full arity, sometimes raw or partial.
      std::size_t arity = target.type_params.size();
      if (arity && g.chance(0.15)) arity = g.below(arity);
      for (std::size_t a = 0; a < arity && depth < 2; ++a) {
        ref.args.push_back(self(scope, depth + 1, true, self));
      }
      return ref;
    }
    TypeRef ref = type_ref(g.pick(external_pool()));
    if (depth < 2 && g.chance(0.2)) ref.args.push_back(self(scope, depth + 1, true, self));
    return ref;
  };

  for (auto& t : defs) {
    std::size_t parents = t.kind == TemplateKind::AnonClass ? 1 : g.below(3);
    for (std::size_t p = 0; p < parents; ++p) t.parents.push_back(random_ref(t, 0, false, random_ref));
    std::size_t fields = g.below(4);
    for (std::size_t f = 0; f < fields; ++f) {
      FieldDecl fd;
      fd.name = "f" + std::to_string(f);
      fd.reassignable = g.chance(0.15);
      fd.visibility = g.chance(0.3) ? Visibility::Private : Visibility::Public;
      fd.declared_type = random_ref(t, 0, true, random_ref);
      t.fields.push_back(std::move(fd));
    }
  }

  Assumptions assumptions;
  for (const auto& ext : external_pool()) {
    if (g.chance(0.6)) assumptions.emplace(ext, kAllVerdicts[g.below(4)]);
  }
  return {TemplateGraph::build(std::move(defs)), std::move(assumptions)};
}

/// Generic graphs without recursion: template Ti only mentions Tj for j < i,
/// every use of a generic supplies all its type arguments, no abstract type
/// members, and assumptions are never conditionally deep.
inline RandomCase random_generic_dag(std::uint64_t seed, std::size_t max_templates) {
  using namespace random_detail;
  Gen g(seed);
  std::size_t n = 1 + g.below(max_templates);
  std::vector<TemplateDef> defs;
  // Half of external uses name a type that is always deep, so generic
  // templates often survive as conditionally deep.
  auto external = [&]() -> std::string {
    return g.chance(0.5) ? "Int" : g.pick(external_pool());
  };

  auto random_ref = [&](const TemplateDef& scope, std::size_t upto, int depth,
                        bool allow_abstract, auto& self) -> TypeRef {
    std::size_t roll = g.below(10);
    if (allow_abstract && !scope.type_params.empty() && roll < 4) {
      return type_ref(g.pick(scope.type_params));
    }
    if (upto > 0 && roll < 8) {
      // Prefer generic targets so instantiations are common.
      std::vector<std::size_t> generic;
      for (std::size_t j = 0; j < upto; ++j) {
        if (!defs[j].type_params.empty()) generic.push_back(j);
      }
      const auto& target =
          defs[!generic.empty() && g.chance(0.7) ? g.pick(generic) : g.below(upto)];
      TypeRef ref = type_ref(target.name);
      for (std::size_t a = 0; a < target.type_params.size(); ++a) {
        ref.args.push_back(depth < 2 ? self(scope, upto, depth + 1, true, self)
                                     : type_ref(external()));
      }
      return ref;
    }
    return type_ref(external());
  };

  for (std::size_t i = 0; i < n; ++i) {
    TemplateDef t;
    t.name = "T" + std::to_string(i);
    static const std::vector<TemplateKind> generic_capable = {
        TemplateKind::Class, TemplateKind::CaseClass, TemplateKind::Trait};
    t.kind = g.chance(0.6) ? g.pick(generic_capable) : random_kind(g);
    if (!is_singleton_like(t.kind) && g.chance(0.75)) {
      std::size_t params = 1 + g.below(3);
      for (std::size_t p = 0; p < params; ++p) t.type_params.push_back(param_pool()[p]);
    }
    std::size_t parents = t.kind == TemplateKind::AnonClass ? 1 : g.below(3);
    for (std::size_t p = 0; p < parents; ++p) {
      t.parents.push_back(random_ref(t, i, 0, false, random_ref));
    }
    std::size_t fields = g.below(4);
    for (std::size_t f = 0; f < fields; ++f) {
      FieldDecl fd;
      fd.name = "f" + std::to_string(f);
      fd.reassignable = g.chance(0.05);
      fd.visibility = g.chance(0.3) ? Visibility::Private : Visibility::Public;
      fd.declared_type = random_ref(t, i, 0, true, random_ref);
      t.fields.push_back(std::move(fd));
    }
    defs.push_back(std::move(t));
  }

  Assumptions assumptions{{"Int", Verdict::DeepImmutable}};
  static const std::vector<Verdict> closed = {Verdict::Mutable, Verdict::ShallowImmutable,
                                              Verdict::DeepImmutable};
  for (const auto& ext : external_pool()) {
    if (g.chance(0.7)) assumptions.emplace(ext, g.pick(closed));
  }
  return {TemplateGraph::build(std::move(defs)), std::move(assumptions)};
}

}  // namespace immut::test
