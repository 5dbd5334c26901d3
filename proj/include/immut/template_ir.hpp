#pragma once

// Template-graph intermediate representation: the analyzed type definitions
// (classes, traits, objects), their validated container, the JSON document
// form, and scope-aware resolution of type references.

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "immut/verdict.hpp"

namespace immut {

enum class TemplateKind { Class, CaseClass, AnonClass, Trait, Object, CaseObject };

inline constexpr std::array<TemplateKind, 6> kAllKinds = {
    TemplateKind::Class, TemplateKind::CaseClass, TemplateKind::AnonClass,
    TemplateKind::Trait, TemplateKind::Object,    TemplateKind::CaseObject};

constexpr std::string_view to_token(TemplateKind k) noexcept {
  switch (k) {
    case TemplateKind::Class: return "class";
    case TemplateKind::CaseClass: return "case_class";
    case TemplateKind::AnonClass: return "anon_class";
    case TemplateKind::Trait: return "trait";
    case TemplateKind::Object: return "object";
    case TemplateKind::CaseObject: return "case_object";
  }
  return "?";
}

inline std::optional<TemplateKind> kind_from_token(std::string_view s) {
  for (auto k : kAllKinds) {
    if (to_token(k) == s) return k;
  }
  return std::nullopt;
}

/// Row label used by the summary tables.
constexpr std::string_view label(TemplateKind k) noexcept {
  switch (k) {
    case TemplateKind::Class: return "Class";
    case TemplateKind::CaseClass: return "Case class";
    case TemplateKind::AnonClass: return "Anon. class";
    case TemplateKind::Trait: return "Trait";
    case TemplateKind::Object: return "Object";
    case TemplateKind::CaseObject: return "Case object";
  }
  return "?";
}

/// Objects and anonymous classes cannot declare abstract types.
constexpr bool is_singleton_like(TemplateKind k) noexcept {
  return k == TemplateKind::Object || k == TemplateKind::CaseObject ||
         k == TemplateKind::AnonClass;
}

enum class Visibility { Public, Private };

/// Head given for fields whose type the frontend could not read off the
/// source. Never defined, so it always resolves Unknown.
inline constexpr std::string_view kInferredTypeHead = "$inferred";

struct TypeRef {
  std::string head;
  std::vector<TypeRef> args;

  bool is_simple_identifier() const noexcept {
    return head.find('.') == std::string::npos;
  }

  friend bool operator==(const TypeRef&, const TypeRef&) = default;
};

inline TypeRef type_ref(std::string head, std::vector<TypeRef> args = {}) {
  return TypeRef{std::move(head), std::move(args)};
}

/// `P[A, Q[B]]`
inline std::string to_string(const TypeRef& ref) {
  std::string out = ref.head;
  if (!ref.args.empty()) {
    out.push_back('[');
    for (std::size_t i = 0; i < ref.args.size(); ++i) {
      if (i) out += ", ";
      out += to_string(ref.args[i]);
    }
    out.push_back(']');
  }
  return out;
}

struct FieldDecl {
  std::string name;
  bool reassignable = false;
  Visibility visibility = Visibility::Public;
  TypeRef declared_type;

  friend bool operator==(const FieldDecl&, const FieldDecl&) = default;
};

struct TemplateDef {
  std::string name;
  TemplateKind kind = TemplateKind::Class;
  std::vector<std::string> type_params;
  std::vector<std::string> abstract_type_members;
  std::vector<TypeRef> parents;
  std::vector<FieldDecl> fields;

  bool has_abstract_types() const noexcept {
    return !type_params.empty() || !abstract_type_members.empty();
  }

  bool is_abstract_in_scope(std::string_view id) const {
    return std::find(type_params.begin(), type_params.end(), id) !=
               type_params.end() ||
           std::find(abstract_type_members.begin(),
                     abstract_type_members.end(),
                     id) != abstract_type_members.end();
  }

  friend bool operator==(const TemplateDef&, const TemplateDef&) = default;
};

/// Raised for malformed IR documents and invariant violations. `path`
/// points at the offending JSON node when there is one.
class IrError : public std::runtime_error {
 public:
  explicit IrError(const std::string& message, std::string path = {})
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Throws IrError when `t` breaks a TemplateDef invariant.
inline void validate_template(const TemplateDef& t) {
  auto fail = [&](const std::string& what) {
    throw IrError("template '" + t.name + "': " + what);
  };
  if (t.name.empty()) throw IrError("template with empty name");
  if (is_singleton_like(t.kind) && t.has_abstract_types()) {
    fail(std::string(to_token(t.kind)) +
         " cannot have type parameters or abstract type members");
  }
  for (const auto& p : t.type_params) {
    if (std::find(t.abstract_type_members.begin(),
                  t.abstract_type_members.end(),
                  p) != t.abstract_type_members.end()) {
      fail("'" + p + "' is both a type parameter and an abstract type member");
    }
  }
  if (t.kind == TemplateKind::AnonClass && t.parents.size() != 1) {
    fail("anonymous class must have exactly one parent");
  }
  std::set<std::string_view> seen;
  for (const auto& f : t.fields) {
    if (!seen.insert(f.name).second) fail("duplicate field '" + f.name + "'");
  }
}

/// The whole corpus. Immutable once built; templates are kept sorted by name
/// so iteration order is deterministic and each template has a stable index.
class TemplateGraph {
 public:
  TemplateGraph() = default;

  /// Validates every template and computes the external references.
  static TemplateGraph build(std::vector<TemplateDef> defs) {
    TemplateGraph g;
    std::sort(defs.begin(), defs.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < defs.size(); ++i) {
      validate_template(defs[i]);
      if (i > 0 && defs[i].name == defs[i - 1].name) {
        throw IrError("duplicate template name '" + defs[i].name + "'");
      }
      g.index_.emplace(defs[i].name, i);
    }
    g.templates_ = std::move(defs);
    for (const auto& t : g.templates_) {
      auto visit = [&](const TypeRef& ref, auto& self) -> void {
        bool abstract = ref.is_simple_identifier() && t.is_abstract_in_scope(ref.head);
        if (!abstract && !g.contains(ref.head) && ref.head != kInferredTypeHead) {
          g.externals_.insert(ref.head);
        }
        for (const auto& a : ref.args) self(a, self);
      };
      for (const auto& p : t.parents) visit(p, visit);
      for (const auto& f : t.fields) visit(f.declared_type, visit);
    }
    return g;
  }

  const std::vector<TemplateDef>& templates() const noexcept {
    return templates_;
  }
  const std::set<std::string>& externals() const noexcept { return externals_; }
  std::size_t size() const noexcept { return templates_.size(); }
  bool empty() const noexcept { return templates_.empty(); }

  bool contains(std::string_view name) const {
    return index_.find(name) != index_.end();
  }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const TemplateDef* find(std::string_view name) const {
    auto idx = index_of(name);
    return idx ? &templates_[*idx] : nullptr;
  }

  const TemplateDef& at(std::size_t index) const { return templates_.at(index); }

  friend bool operator==(const TemplateGraph& a, const TemplateGraph& b) {
    return a.templates_ == b.templates_ && a.externals_ == b.externals_;
  }

 private:
  std::vector<TemplateDef> templates_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::set<std::string> externals_;
};

/// Configured verdicts for external types the analyzer cannot see.
using Assumptions = std::map<std::string, Verdict, std::less<>>;

struct ResolvedInternal {
  std::size_t index;
  friend bool operator==(const ResolvedInternal&, const ResolvedInternal&) = default;
};
struct ResolvedAbstract {
  std::string identifier;
  friend bool operator==(const ResolvedAbstract&, const ResolvedAbstract&) = default;
};
struct ResolvedAssumed {
  Verdict verdict;
  friend bool operator==(const ResolvedAssumed&, const ResolvedAssumed&) = default;
};
struct ResolvedUnknown {
  friend bool operator==(const ResolvedUnknown&, const ResolvedUnknown&) = default;
};

using Resolution =
    std::variant<ResolvedInternal, ResolvedAbstract, ResolvedAssumed, ResolvedUnknown>;

/// Scope first (single identifiers only), then the graph, then the
/// assumptions; anything else is Unknown.
inline Resolution resolve_type_ref(const TemplateGraph& graph,
                                   const TemplateDef& scope, const TypeRef& ref,
                                   const Assumptions& assumptions) {
  if (ref.is_simple_identifier() && scope.is_abstract_in_scope(ref.head)) {
    return ResolvedAbstract{ref.head};
  }
  if (auto idx = graph.index_of(ref.head)) return ResolvedInternal{*idx};
  if (auto it = assumptions.find(ref.head); it != assumptions.end()) {
    return ResolvedAssumed{it->second};
  }
  return ResolvedUnknown{};
}

// ---------------------------------------------------------------------------
// JSON document form

namespace ir_detail {

using Json = nlohmann::ordered_json;

inline const Json& member(const Json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw IrError(std::string("missing member '") + key + "'", path);
  return *it;
}

inline std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw IrError("expected string", path);
  return j.get<std::string>();
}

inline bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw IrError("expected boolean", path);
  return j.get<bool>();
}

inline const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw IrError("expected array", path);
  return j;
}

inline const Json& as_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw IrError("expected object", path);
  return j;
}

inline std::vector<std::string> string_list(const Json& j, const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  for (const auto& e : as_array(j, path)) {
    out.push_back(as_string(e, path + "/" + std::to_string(i++)));
  }
  return out;
}

inline TypeRef read_type_ref(const Json& j, const std::string& path) {
  as_object(j, path);
  TypeRef ref;
  ref.head = as_string(member(j, "head", path), path + "/head");
  if (ref.head.empty()) throw IrError("empty type head", path + "/head");
  const auto& args = as_array(member(j, "args", path), path + "/args");
  for (std::size_t i = 0; i < args.size(); ++i) {
    ref.args.push_back(read_type_ref(args[i], path + "/args/" + std::to_string(i)));
  }
  return ref;
}

inline Json write_type_ref(const TypeRef& ref) {
  Json args = Json::array();
  for (const auto& a : ref.args) args.push_back(write_type_ref(a));
  Json out = Json::object();
  out["head"] = ref.head;
  out["args"] = std::move(args);
  return out;
}

inline TemplateDef read_template(const Json& j, const std::string& path) {
  as_object(j, path);
  TemplateDef t;
  t.name = as_string(member(j, "name", path), path + "/name");
  auto kind = as_string(member(j, "kind", path), path + "/kind");
  auto k = kind_from_token(kind);
  if (!k) throw IrError("unknown kind '" + kind + "'", path + "/kind");
  t.kind = *k;
  t.type_params = string_list(member(j, "type_params", path), path + "/type_params");
  t.abstract_type_members =
      string_list(member(j, "abstract_types", path), path + "/abstract_types");
  const auto& parents = as_array(member(j, "parents", path), path + "/parents");
  for (std::size_t i = 0; i < parents.size(); ++i) {
    t.parents.push_back(read_type_ref(parents[i], path + "/parents/" + std::to_string(i)));
  }
  const auto& fields = as_array(member(j, "fields", path), path + "/fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    auto fp = path + "/fields/" + std::to_string(i);
    const auto& f = as_object(fields[i], fp);
    FieldDecl decl;
    decl.name = as_string(member(f, "name", fp), fp + "/name");
    decl.reassignable = as_bool(member(f, "var", fp), fp + "/var");
    decl.visibility = as_bool(member(f, "private", fp), fp + "/private")
                          ? Visibility::Private
                          : Visibility::Public;
    decl.declared_type = read_type_ref(member(f, "type", fp), fp + "/type");
    t.fields.push_back(std::move(decl));
  }
  try {
    validate_template(t);
  } catch (const IrError& e) {
    throw IrError(e.what(), path);
  }
  return t;
}

}  // namespace ir_detail

/// Parses and validates an IR document. Errors carry a JSON-pointer style
/// path to the offending node.
inline TemplateGraph load_ir(std::string_view document) {
  using ir_detail::Json;
  Json root;
  try {
    root = Json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw IrError(std::string("malformed JSON: ") + e.what(), "/");
  }
  ir_detail::as_object(root, "/");
  const auto& list = ir_detail::as_array(ir_detail::member(root, "templates", "/"), "/templates");
  std::vector<TemplateDef> defs;
  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto path = "/templates/" + std::to_string(i);
    defs.push_back(ir_detail::read_template(list[i], path));
    auto [it, fresh] = first_seen.emplace(defs.back().name, i);
    if (!fresh) {
      throw IrError("duplicate template name '" + defs.back().name +
                        "' (first at /templates/" + std::to_string(it->second) + ")",
                    path + "/name");
    }
  }
  return TemplateGraph::build(std::move(defs));
}

/// Members in schema order, templates in name order, two-space indent,
/// trailing newline.
inline std::string serialize_ir(const TemplateGraph& graph) {
  using ir_detail::Json;
  Json templates = Json::array();
  for (const auto& t : graph.templates()) {
    Json jt = Json::object();
    jt["name"] = t.name;
    jt["kind"] = std::string(to_token(t.kind));
    jt["type_params"] = t.type_params;
    jt["abstract_types"] = t.abstract_type_members;
    Json parents = Json::array();
    for (const auto& p : t.parents) parents.push_back(ir_detail::write_type_ref(p));
    jt["parents"] = std::move(parents);
    Json fields = Json::array();
    for (const auto& f : t.fields) {
      Json jf = Json::object();
      jf["name"] = f.name;
      jf["var"] = f.reassignable;
      jf["private"] = f.visibility == Visibility::Private;
      jf["type"] = ir_detail::write_type_ref(f.declared_type);
      fields.push_back(std::move(jf));
    }
    jt["fields"] = std::move(fields);
    templates.push_back(std::move(jt));
  }
  Json root = Json::object();
  root["templates"] = std::move(templates);
  return root.dump(2) + "\n";
}

}  // namespace immut
