#pragma once

// Corpus statistics: verdict counts per template kind, attribute-combination
// counts per verdict, their text/CSV/JSON renderings, and single-template
// explanations.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "immut/classifier.hpp"
#include "immut/template_ir.hpp"
#include "immut/verdict.hpp"

namespace immut {

struct KindRow {
  std::optional<TemplateKind> kind;  // nullopt is the Total row
  std::size_t occurrences = 0;
  std::size_t mutable_count = 0;
  std::size_t shallow = 0;
  std::size_t deep = 0;
  std::size_t cond_deep = 0;

  std::string_view label() const { return kind ? immut::label(*kind) : "Total"; }

  friend bool operator==(const KindRow&, const KindRow&) = default;
};

/// Six kind rows in fixed order followed by the Total row. A default
/// constructed table has no rows.
struct KindSummaryTable {
  std::vector<KindRow> rows;

  const KindRow* total() const {
    return rows.empty() || rows.back().kind ? nullptr : &rows.back();
  }

  friend bool operator==(const KindSummaryTable&, const KindSummaryTable&) = default;
};

struct ComboRow {
  std::string combo_key;
  std::size_t occurrences = 0;
  friend bool operator==(const ComboRow&, const ComboRow&) = default;
};

struct ComboTable {
  Verdict verdict = Verdict::Mutable;
  std::vector<ComboRow> rows;  // sorted by combo_key

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.occurrences;
    return n;
  }

  friend bool operator==(const ComboTable&, const ComboTable&) = default;
};

struct ReportTables {
  KindSummaryTable kinds;
  ComboTable mutable_combos{Verdict::Mutable, {}};
  ComboTable shallow_combos{Verdict::ShallowImmutable, {}};

  friend bool operator==(const ReportTables&, const ReportTables&) = default;
};

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline KindSummaryTable summarize_by_kind(const AnalysisResult& result,
                                          const TemplateGraph& graph) {
  KindSummaryTable table;
  for (auto k : kAllKinds) table.rows.push_back(KindRow{k});
  table.rows.push_back(KindRow{std::nullopt});
  for (const auto& t : graph.templates()) {
    auto it = result.verdicts.find(t.name);
    if (it == result.verdicts.end()) {
      throw ReportError("no verdict for template '" + t.name + "'");
    }
    auto row_index = static_cast<std::size_t>(
        std::find(kAllKinds.begin(), kAllKinds.end(), t.kind) - kAllKinds.begin());
    for (KindRow* row : {&table.rows[row_index], &table.rows.back()}) {
      ++row->occurrences;
      switch (it->second) {
        case Verdict::Mutable: ++row->mutable_count; break;
        case Verdict::ShallowImmutable: ++row->shallow; break;
        case Verdict::ConditionallyDeep: ++row->cond_deep; break;
        case Verdict::DeepImmutable: ++row->deep; break;
      }
    }
  }
  return table;
}

inline ComboTable attribute_combinations(const AnalysisResult& result, Verdict filter) {
  if (filter != Verdict::Mutable && filter != Verdict::ShallowImmutable) {
    throw ReportError("attribute combinations exist only for mutable and shallow verdicts, not " +
                      std::string(describe(filter)));
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& [name, verdict] : result.verdicts) {
    if (verdict != filter) continue;
    auto it = result.attributes.find(name);
    AttributeSet attrs = it == result.attributes.end() ? AttributeSet{} : it->second;
    ++counts[attrs.combo_key()];
  }
  ComboTable table{filter, {}};
  for (auto& [key, n] : counts) table.rows.push_back({key, n});
  return table;
}

inline ReportTables build_report(const AnalysisResult& result, const TemplateGraph& graph) {
  return {summarize_by_kind(result, graph), attribute_combinations(result, Verdict::Mutable),
          attribute_combinations(result, Verdict::ShallowImmutable)};
}

/// Percentage with one decimal, rounded half up: (124, 626) -> "19.8".
/// A zero denominator gives "0.0".
inline std::string format_percent(std::size_t count, std::size_t total) {
  if (total == 0) return "0.0";
  std::uint64_t tenths = (2000ull * count + total) / (2ull * total);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

/// "124 (19.8%)"
inline std::string format_count(std::size_t count, std::size_t total) {
  return std::to_string(count) + " (" + format_percent(count, total) + "%)";
}

enum class ReportFormat { Text, Csv, Json };

inline std::optional<ReportFormat> report_format_from_token(std::string_view s) {
  if (s == "text") return ReportFormat::Text;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  return std::nullopt;
}

namespace report_detail {

inline std::string kind_token(const KindRow& row) {
  return row.kind ? std::string(to_token(*row.kind)) : "total";
}

// Left-aligns the first column, right-aligns the rest, two spaces apart.
inline std::string render_grid(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      std::string pad(width[c] - row[c].size(), ' ');
      line += c == 0 ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

inline std::string combo_title(Verdict v) {
  return v == Verdict::Mutable ? "Attributes causing mutability"
                               : "Attributes causing shallow immutability";
}

inline std::string render_text(const ReportTables& t) {
  std::string out = "Immutability by template kind\n";
  std::vector<std::vector<std::string>> grid = {
      {"Template", "Occurrences", "Mutable", "Shallow", "Deep", "Cond. Deep"}};
  const KindRow* total = t.kinds.total();
  std::size_t all = total ? total->occurrences : 0;
  for (const auto& r : t.kinds.rows) {
    grid.push_back({std::string(r.label()), format_count(r.occurrences, all),
                    format_count(r.mutable_count, r.occurrences),
                    format_count(r.shallow, r.occurrences), format_count(r.deep, r.occurrences),
                    format_count(r.cond_deep, r.occurrences)});
  }
  out += render_grid(grid);
  for (const ComboTable* combos : {&t.mutable_combos, &t.shallow_combos}) {
    out += "\n" + combo_title(combos->verdict) + "\n";
    std::vector<std::vector<std::string>> cgrid = {{"Attribute(s)", "Occurrences"}};
    std::size_t n = combos->total();
    for (const auto& r : combos->rows) {
      cgrid.push_back({r.combo_key, format_count(r.occurrences, n)});
    }
    out += render_grid(cgrid);
  }
  return out;
}

inline std::string render_csv(const ReportTables& t) {
  std::string out =
      "kind,occurrences,occurrences_pct,mutable,mutable_pct,shallow,shallow_pct,deep,deep_pct,"
      "cond_deep,cond_deep_pct\n";
  const KindRow* total = t.kinds.total();
  std::size_t all = total ? total->occurrences : 0;
  for (const auto& r : t.kinds.rows) {
    out += kind_token(r) + "," + std::to_string(r.occurrences) + "," +
           format_percent(r.occurrences, all);
    for (std::size_t n : {r.mutable_count, r.shallow, r.deep, r.cond_deep}) {
      out += "," + std::to_string(n) + "," + format_percent(n, r.occurrences);
    }
    out += "\n";
  }
  for (const ComboTable* combos : {&t.mutable_combos, &t.shallow_combos}) {
    out += "\n" + std::string(combos->verdict == Verdict::Mutable ? "mutable" : "shallow") +
           "_attributes,occurrences,occurrences_pct\n";
    std::size_t n = combos->total();
    for (const auto& r : combos->rows) {
      out += r.combo_key + "," + std::to_string(r.occurrences) + "," +
             format_percent(r.occurrences, n) + "\n";
    }
  }
  return out;
}

using Json = nlohmann::ordered_json;

inline Json combo_json(const ComboTable& c) {
  Json rows = Json::array();
  for (const auto& r : c.rows) {
    Json jr = Json::object();
    jr["combo_key"] = r.combo_key;
    jr["occurrences"] = r.occurrences;
    rows.push_back(std::move(jr));
  }
  Json out = Json::object();
  out["verdict"] = std::string(to_token(c.verdict));
  out["rows"] = std::move(rows);
  return out;
}

inline std::string render_json(const ReportTables& t) {
  Json rows = Json::array();
  for (const auto& r : t.kinds.rows) {
    Json jr = Json::object();
    jr["kind"] = kind_token(r);
    jr["occurrences"] = r.occurrences;
    jr["mutable"] = r.mutable_count;
    jr["shallow"] = r.shallow;
    jr["deep"] = r.deep;
    jr["cond_deep"] = r.cond_deep;
    rows.push_back(std::move(jr));
  }
  Json root = Json::object();
  root["kind_summary"] = Json::object();
  root["kind_summary"]["rows"] = std::move(rows);
  root["mutable_combos"] = combo_json(t.mutable_combos);
  root["shallow_combos"] = combo_json(t.shallow_combos);
  return root.dump(2) + "\n";
}

}  // namespace report_detail

/// Deterministic, locale-independent bytes.
inline std::string render_report(const ReportTables& tables, ReportFormat format) {
  switch (format) {
    case ReportFormat::Text: return report_detail::render_text(tables);
    case ReportFormat::Csv: return report_detail::render_csv(tables);
    case ReportFormat::Json: return report_detail::render_json(tables);
  }
  return {};
}

/// Inverse of the JSON rendering.
inline ReportTables parse_report_json(std::string_view document) {
  using report_detail::Json;
  ReportTables t;
  try {
    auto root = Json::parse(document);
    for (const auto& jr : root.at("kind_summary").at("rows")) {
      KindRow r;
      auto kind = jr.at("kind").get<std::string>();
      if (kind != "total") {
        auto k = kind_from_token(kind);
        if (!k) throw ReportError("unknown kind '" + kind + "'");
        r.kind = *k;
      }
      r.occurrences = jr.at("occurrences").get<std::size_t>();
      r.mutable_count = jr.at("mutable").get<std::size_t>();
      r.shallow = jr.at("shallow").get<std::size_t>();
      r.deep = jr.at("deep").get<std::size_t>();
      r.cond_deep = jr.at("cond_deep").get<std::size_t>();
      t.kinds.rows.push_back(r);
    }
    for (auto [key, table] : {std::pair{"mutable_combos", &t.mutable_combos},
                              std::pair{"shallow_combos", &t.shallow_combos}}) {
      const auto& jc = root.at(key);
      auto v = verdict_from_token(jc.at("verdict").get<std::string>());
      if (!v) throw ReportError(std::string("bad verdict in ") + key);
      table->verdict = *v;
      for (const auto& jr : jc.at("rows")) {
        table->rows.push_back(
            {jr.at("combo_key").get<std::string>(), jr.at("occurrences").get<std::size_t>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ReportError(std::string("malformed report: ") + e.what());
  }
  return t;
}

struct Explanation {
  std::string name;
  Verdict verdict = Verdict::DeepImmutable;
  AttributeSet attributes;
  std::vector<EvidenceRecord> causes;  // ordered by attribute, then as found
};

inline Explanation explain(const AnalysisResult& result, std::string_view name) {
  auto it = result.verdicts.find(std::string(name));
  if (it == result.verdicts.end()) {
    throw ReportError("unknown template '" + std::string(name) + "'");
  }
  Explanation e{std::string(name), it->second, {}, {}};
  if (auto a = result.attributes.find(e.name); a != result.attributes.end()) e.attributes = a->second;
  if (auto ev = result.evidence.find(e.name); ev != result.evidence.end()) e.causes = ev->second;
  std::stable_sort(e.causes.begin(), e.causes.end(),
                   [](const auto& a, const auto& b) { return a.attribute < b.attribute; });
  return e;
}

/// One line per cause, e.g. "B: parent 'C' is mutable".
inline std::string describe_cause(const EvidenceRecord& e) {
  std::string out(1, letter(e.attribute));
  out += ": ";
  if (const auto* p = std::get_if<ParentCause>(&e.cause)) {
    std::string parent = "parent '" + to_string(p->parent) + "'";
    switch (e.attribute) {
      case AttributeKey::A: return out + parent + " is mutable (assumption)";
      case AttributeKey::B: return out + parent + " is mutable";
      case AttributeKey::E: return out + parent + " is unknown";
      case AttributeKey::F: return out + parent + " is shallow immutable";
      case AttributeKey::G: return out + parent + " has a type argument of unknown type";
      case AttributeKey::H: return out + parent + " has a type argument of mutable type";
      case AttributeKey::I:
        return out + parent + " has a type argument of mutable type (assumption)";
      case AttributeKey::J:
        return out + parent + " has a type argument of shallow immutable type";
      default: return out + parent;
    }
  }
  const auto& f = std::get<FieldCause>(e.cause);
  std::string field = "field '" + f.field + "'";
  std::string type = "'" + to_string(f.type) + "'";
  switch (e.attribute) {
    case AttributeKey::C: return out + field + " is reassignable (public)";
    case AttributeKey::D: return out + field + " is reassignable (private)";
    case AttributeKey::G: return out + "val " + field + " has unknown type " + type;
    case AttributeKey::H: return out + "val " + field + " has mutable type " + type;
    case AttributeKey::I:
      return out + "val " + field + " has mutable type " + type + " (assumption)";
    case AttributeKey::J: return out + "val " + field + " has shallow immutable type " + type;
    default: return out + field;
  }
}

inline std::string render_explanation(const Explanation& e) {
  std::string out = e.name + ": " + std::string(describe(e.verdict));
  if (e.causes.empty()) return out + "; no causes\n";
  out += "\n";
  for (const auto& c : e.causes) out += describe_cause(c) + "\n";
  return out;
}

}  // namespace immut
