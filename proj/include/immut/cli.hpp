#pragma once

// Command-line driver:
//   immut analyze <paths...> [--ir] [--assume FILE] [--format text|csv|json]
//                            [--explain NAME] [--out PATH]
//   immut emit-ir <paths...> [--out PATH]
// Exit codes: 0 success, 1 input diagnostics, 2 bad arguments.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "immut/classifier.hpp"
#include "immut/parser.hpp"
#include "immut/report.hpp"
#include "immut/template_ir.hpp"

namespace immut {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitUsage = 2;

namespace cli_detail {

struct InputError {
  std::vector<std::string> messages;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError{{p.generic_string() + ": cannot open file"}};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Files named directly are taken as-is; directories are searched
// recursively for `extension`, sorted by path.
inline std::vector<std::filesystem::path> collect(const std::vector<std::string>& paths,
                                                  const std::string& extension) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  for (const auto& raw : paths) {
    fs::path p(raw);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::recursive_directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == extension) {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        return a.generic_string() < b.generic_string();
      });
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p, ec)) {
      out.push_back(p);
    } else {
      throw InputError{{raw + ": no such file or directory"}};
    }
  }
  return out;
}

inline TemplateGraph load_graph(const std::vector<std::string>& paths, bool ir) {
  if (ir) {
    std::vector<TemplateDef> defs;
    for (const auto& p : collect(paths, ".json")) {
      try {
        auto g = load_ir(read_file(p));
        defs.insert(defs.end(), g.templates().begin(), g.templates().end());
      } catch (const IrError& e) {
        throw InputError{{p.generic_string() + ": " + e.what()}};
      }
    }
    try {
      return TemplateGraph::build(std::move(defs));
    } catch (const IrError& e) {
      throw InputError{{e.what()}};
    }
  }
  std::vector<SourceFile> files;
  for (const auto& p : collect(paths, ".scala")) {
    files.push_back({p.generic_string(), read_file(p)});
  }
  auto parsed = parse_corpus(files);
  if (!parsed.ok()) {
    InputError err;
    for (const auto& d : parsed.diagnostics) err.messages.push_back(to_string(d));
    throw err;
  }
  return std::move(*parsed.graph);
}

inline int emit(const std::string& text, const std::string& out_path, std::ostream& out,
                std::ostream& err) {
  if (out_path.empty()) {
    out << text;
    return kExitOk;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file || !(file << text)) {
    err << out_path << ": cannot write file\n";
    return kExitDiagnostics;
  }
  return kExitOk;
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Immutability analyzer for Scala-like templates", "immut"};
  app.require_subcommand(1);

  std::vector<std::string> paths;
  bool ir = false;
  std::string assume;
  std::string format = "text";
  std::string explain_name;
  std::string out_path;

  auto* analyze = app.add_subcommand("analyze", "Classify templates and print statistics");
  analyze->add_option("paths", paths, "Source files or directories")->required();
  analyze->add_flag("--ir", ir, "Inputs are IR documents instead of sources");
  analyze->add_option("--assume", assume, "Assumptions file (name verdict per line)");
  analyze->add_option("--format", format, "text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  analyze->add_option("--explain", explain_name, "Explain one template instead of tables");
  analyze->add_option("--out", out_path, "Write output to a file");

  std::vector<std::string> ir_paths;
  std::string ir_out;
  auto* emit_ir = app.add_subcommand("emit-ir", "Parse sources and print the IR document");
  emit_ir->add_option("paths", ir_paths, "Source files or directories")->required();
  emit_ir->add_option("--out", ir_out, "Write output to a file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "immut: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (emit_ir->parsed()) {
      auto graph = cli_detail::load_graph(ir_paths, false);
      return cli_detail::emit(serialize_ir(graph), ir_out, out, err);
    }

    auto graph = cli_detail::load_graph(paths, ir);
    Assumptions assumptions;
    if (!assume.empty()) {
      try {
        assumptions = parse_assumptions(cli_detail::read_file(assume));
      } catch (const AssumptionsError& e) {
        throw cli_detail::InputError{{assume + ": " + e.what()}};
      }
    }
    AnalysisResult result;
    try {
      result = classify_corpus(graph, assumptions);
    } catch (const AnalysisError& e) {
      throw cli_detail::InputError{{e.what()}};
    }

    if (!explain_name.empty()) {
      if (!result.verdicts.count(explain_name)) {
        err << "immut: unknown template '" << explain_name << "'\n";
        return kExitUsage;
      }
      return cli_detail::emit(render_explanation(explain(result, explain_name)), out_path, out,
                              err);
    }
    auto fmt = report_format_from_token(format).value_or(ReportFormat::Text);
    return cli_detail::emit(render_report(build_report(result, graph), fmt), out_path, out, err);
  } catch (const cli_detail::InputError& e) {
    for (const auto& m : e.messages) err << m << "\n";
    return kExitDiagnostics;
  }
}

}  // namespace immut
