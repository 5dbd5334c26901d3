#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "immut/classifier.hpp"
#include "immut/parser.hpp"
#include "immut/template_ir.hpp"

namespace immut::test {

inline TypeRef ty(std::string head, std::vector<TypeRef> args = {}) {
  return type_ref(std::move(head), std::move(args));
}

inline FieldDecl val(std::string name, TypeRef type) {
  return {std::move(name), false, Visibility::Public, std::move(type)};
}

inline FieldDecl var(std::string name, TypeRef type, Visibility vis = Visibility::Public) {
  return {std::move(name), true, vis, std::move(type)};
}

inline TemplateDef tmpl(std::string name, TemplateKind kind, std::vector<TypeRef> parents = {},
                        std::vector<FieldDecl> fields = {},
                        std::vector<std::string> type_params = {},
                        std::vector<std::string> abstract_members = {}) {
  TemplateDef t;
  t.name = std::move(name);
  t.kind = kind;
  t.parents = std::move(parents);
  t.fields = std::move(fields);
  t.type_params = std::move(type_params);
  t.abstract_type_members = std::move(abstract_members);
  return t;
}

/// Parses a single in-memory source; throws with the diagnostics on failure.
inline TemplateGraph graph_of(const std::string& source) {
  auto r = parse_corpus({{"test.scala", source}});
  if (!r.ok()) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += to_string(d) + "\n";
    throw std::runtime_error(msg);
  }
  return std::move(*r.graph);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string data_path(const std::string& relative) {
  return std::string(IMMUT_TEST_DATA_DIR) + "/" + relative;
}

/// Binds a classifier as a transfer callable for the engine and the oracle.
struct BoundTransfer {
  const Classifier* clf;
  TransferResult operator()(const TemplateDef& t, std::span<const Verdict> sigma) const {
    return clf->transfer(t, sigma);
  }
};

struct VerdictOnlyTransfer {
  const Classifier* clf;
  struct Out {
    Verdict verdict;
  };
  Out operator()(const TemplateDef& t, std::span<const Verdict> sigma) const {
    return {clf->transfer_verdict(t, sigma)};
  }
};

inline std::map<std::string, Verdict> verdicts_by_name(const TemplateGraph& g,
                                                       const Assignment& sigma) {
  std::map<std::string, Verdict> out;
  for (std::size_t i = 0; i < g.size(); ++i) out.emplace(g.at(i).name, sigma[i]);
  return out;
}

}  // namespace immut::test
