#pragma once

// Recursive-descent frontend for a Scala-like subset:
//
//   template ::= ["case"] ("class"|"trait"|"object") Name [typeParams]
//                {ctorParams} ["extends" typeref {"with" typeref}] [body]
//   param    ::= {modifier} ["val"|"var"] Name ":" typeref ["=" expr]
//   member   ::= {modifier} ("val"|"var") Name [":" typeref] ["=" init]
//              | "type" Name [bounds]            (abstract type member)
//              | "def" ...                        (skipped)
//              | template
//
// Case-class constructor parameters become public `val` fields (or `var`
// when declared so). Initializers are skipped except for `new T {...}`, which
// synthesizes an anonymous class `<enclosing>$anon$<k>`.

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "immut/template_ir.hpp"

namespace immut {

struct SourcePosition {
  std::string file;
  std::size_t line = 1;
  std::size_t column = 1;
  friend bool operator==(const SourcePosition&, const SourcePosition&) = default;
};

struct ParseDiagnostic {
  SourcePosition position;
  std::string message;
  friend bool operator==(const ParseDiagnostic&, const ParseDiagnostic&) = default;
};

/// `file:line:col: message`
inline std::string to_string(const ParseDiagnostic& d) {
  return d.position.file + ":" + std::to_string(d.position.line) + ":" +
         std::to_string(d.position.column) + ": " + d.message;
}

struct ParseResult {
  std::vector<TemplateDef> templates;
  std::vector<SourcePosition> positions;  // parallel to templates
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const noexcept { return diagnostics.empty(); }
};

namespace parser_detail {

enum class Tok {
  Ident,
  Number,
  String,
  Char,
  Op,
  LParen,
  RParen,
  LBracket,
  RBracket,
  LBrace,
  RBrace,
  Comma,
  Semi,
  Dot,
  Eof,
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
  bool newline_before = false;
  bool backquoted = false;
};

inline bool is_keyword(std::string_view s) {
  static const std::set<std::string_view> kw = {
      "abstract", "case",     "catch",   "class",   "def",      "do",       "else",
      "extends",  "false",    "final",   "finally", "for",      "forSome",  "if",
      "implicit", "import",   "lazy",    "match",   "new",      "null",     "object",
      "override", "package",  "private", "protected", "return", "sealed",   "super",
      "this",     "throw",    "trait",   "try",     "true",     "type",     "val",
      "var",      "while",    "with",    "yield"};
  return kw.count(s) != 0;
}

inline bool is_op_char(char c) {
  return std::string_view("!#%&*+-/:<=>?@\\^|~").find(c) != std::string_view::npos;
}

inline bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

inline bool is_ident_part(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

class Lexer {
 public:
  Lexer(std::string file, std::string_view text) : file_(std::move(file)), text_(text) {}

  std::vector<Token> run(std::vector<ParseDiagnostic>& diags) {
    std::vector<Token> out;
    bool newline = false;
    while (true) {
      newline = skip_space_and_comments(diags) || newline;
      Token t;
      t.line = line_;
      t.column = col_;
      t.newline_before = newline;
      newline = false;
      if (pos_ >= text_.size()) {
        t.kind = Tok::Eof;
        out.push_back(std::move(t));
        return out;
      }
      char c = text_[pos_];
      auto single = [&](Tok k) {
        t.kind = k;
        t.text = std::string(1, c);
        advance();
      };
      if (is_ident_start(static_cast<unsigned char>(c))) {
        t.kind = Tok::Ident;
        while (pos_ < text_.size() && is_ident_part(static_cast<unsigned char>(text_[pos_]))) {
          t.text.push_back(text_[pos_]);
          advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Number;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                text_[pos_] == '_')) {
          if (text_[pos_] == '.' &&
              !(pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            break;
          }
          t.text.push_back(text_[pos_]);
          advance();
        }
      } else if (c == '"') {
        t.kind = Tok::String;
        if (!lex_string(t, diags)) continue;
      } else if (c == '\'') {
        // Char literal 'x' / '\n', otherwise a symbol literal 'name.
        if (pos_ + 2 < text_.size() && text_[pos_ + 1] != '\\' && text_[pos_ + 2] == '\'') {
          t.kind = Tok::Char;
          t.text = std::string(text_.substr(pos_, 3));
          advance(3);
        } else if (pos_ + 3 < text_.size() && text_[pos_ + 1] == '\\' && text_[pos_ + 3] == '\'') {
          t.kind = Tok::Char;
          t.text = std::string(text_.substr(pos_, 4));
          advance(4);
        } else if (pos_ + 1 < text_.size() &&
                   is_ident_start(static_cast<unsigned char>(text_[pos_ + 1]))) {
          t.kind = Tok::Ident;
          advance();
          while (pos_ < text_.size() && is_ident_part(static_cast<unsigned char>(text_[pos_]))) {
            t.text.push_back(text_[pos_]);
            advance();
          }
        } else {
          error(diags, t.line, t.column, "malformed character literal");
          advance();
          continue;
        }
      } else if (c == '`') {
        auto end = text_.find('`', pos_ + 1);
        auto eol = text_.find('\n', pos_ + 1);
        if (end == std::string_view::npos || (eol != std::string_view::npos && eol < end)) {
          error(diags, t.line, t.column, "unterminated backquoted identifier");
          advance();
          continue;
        }
        t.kind = Tok::Ident;
        t.backquoted = true;
        t.text = std::string(text_.substr(pos_ + 1, end - pos_ - 1));
        advance(end - pos_ + 1);
      } else if (c == '(') {
        single(Tok::LParen);
      } else if (c == ')') {
        single(Tok::RParen);
      } else if (c == '[') {
        single(Tok::LBracket);
      } else if (c == ']') {
        single(Tok::RBracket);
      } else if (c == '{') {
        single(Tok::LBrace);
      } else if (c == '}') {
        single(Tok::RBrace);
      } else if (c == ',') {
        single(Tok::Comma);
      } else if (c == ';') {
        single(Tok::Semi);
      } else if (c == '.') {
        single(Tok::Dot);
      } else if (is_op_char(c) && c != '\\') {
        t.kind = Tok::Op;
        while (pos_ < text_.size() && is_op_char(text_[pos_]) && text_[pos_] != '\\') {
          t.text.push_back(text_[pos_]);
          advance();
        }
      } else {
        std::string shown = std::isprint(static_cast<unsigned char>(c))
                                ? std::string(1, c)
                                : "\\x" + hex(static_cast<unsigned char>(c));
        error(diags, t.line, t.column, "unexpected character '" + shown + "'");
        advance();
        continue;
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static std::string hex(unsigned char c) {
    const char* digits = "0123456789abcdef";
    return {digits[c >> 4], digits[c & 15]};
  }

  void error(std::vector<ParseDiagnostic>& diags, std::size_t line, std::size_t col,
             std::string msg) {
    diags.push_back({{file_, line, col}, std::move(msg)});
  }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  // Returns true if a newline was crossed.
  bool skip_space_and_comments(std::vector<ParseDiagnostic>& diags) {
    bool newline = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        newline = true;
        advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        advance();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (text_.substr(pos_, 2) == "/*") {
        std::size_t line = line_, col = col_;
        advance(2);
        int depth = 1;
        while (pos_ < text_.size() && depth > 0) {
          if (text_.substr(pos_, 2) == "/*") {
            ++depth;
            advance(2);
          } else if (text_.substr(pos_, 2) == "*/") {
            --depth;
            advance(2);
          } else {
            if (text_[pos_] == '\n') newline = true;
            advance();
          }
        }
        if (depth > 0) error(diags, line, col, "unterminated comment");
      } else {
        break;
      }
    }
    return newline;
  }

  bool lex_string(Token& t, std::vector<ParseDiagnostic>& diags) {
    if (text_.substr(pos_, 3) == "\"\"\"") {
      auto end = text_.find("\"\"\"", pos_ + 3);
      if (end == std::string_view::npos) {
        error(diags, t.line, t.column, "unterminated string literal");
        advance(text_.size() - pos_);
        return false;
      }
      t.text = std::string(text_.substr(pos_ + 3, end - pos_ - 3));
      advance(end + 3 - pos_);
      return true;
    }
    advance();
    while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
        t.text.push_back(text_[pos_]);
        advance();
      }
      t.text.push_back(text_[pos_]);
      advance();
    }
    if (pos_ >= text_.size() || text_[pos_] != '"') {
      error(diags, t.line, t.column, "unterminated string literal");
      return false;
    }
    advance();
    return true;
  }

  std::string file_;
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

struct SyntaxError {
  SourcePosition position;
  std::string message;
};

class Parser {
 public:
  Parser(std::string file, std::vector<Token> tokens, ParseResult& out)
      : file_(std::move(file)), toks_(std::move(tokens)), out_(out) {}

  void parse_compilation_unit() {
    while (!at(Tok::Eof)) {
      if (at(Tok::Semi)) {
        ++i_;
        continue;
      }
      if (at_word("package") || at_word("import")) {
        skip_line();
        continue;
      }
      try {
        skip_modifiers();
        if (!at_template_start()) {
          fail("expected class, trait, or object");
        }
        parse_template();
      } catch (const SyntaxError& e) {
        out_.diagnostics.push_back({e.position, e.message});
        recover_to_template_start();
      }
    }
  }

 private:
  struct Modifiers {
    bool is_private = false;
  };

  // -- token helpers -------------------------------------------------------

  const Token& cur() const { return toks_[i_]; }
  const Token& peek(std::size_t k = 1) const {
    return toks_[std::min(i_ + k, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_word(std::string_view w) const {
    return cur().kind == Tok::Ident && !cur().backquoted && cur().text == w;
  }
  bool at_op(std::string_view op) const { return cur().kind == Tok::Op && cur().text == op; }
  static bool word(const Token& t, std::string_view w) {
    return t.kind == Tok::Ident && !t.backquoted && t.text == w;
  }

  SourcePosition pos_of(const Token& t) const { return {file_, t.line, t.column}; }

  [[noreturn]] void fail(std::string message) const {
    throw SyntaxError{pos_of(cur()), std::move(message)};
  }

  void expect(Tok k, std::string_view what) {
    if (!at(k)) fail("expected " + std::string(what));
    ++i_;
  }

  void expect_op(std::string_view op) {
    if (!at_op(op)) fail("expected '" + std::string(op) + "'");
    ++i_;
  }

  std::string expect_identifier() {
    if (!at(Tok::Ident) || (!cur().backquoted && is_keyword(cur().text))) {
      fail("expected identifier");
    }
    return toks_[i_++].text;
  }

  bool at_template_start() const {
    if (at_word("class") || at_word("trait") || at_word("object")) return true;
    return at_word("case") && (word(peek(), "class") || word(peek(), "object"));
  }

  bool at_modifier() const {
    static const std::set<std::string_view> mods = {"abstract", "final",    "sealed",
                                                    "private",  "protected", "override",
                                                    "implicit", "lazy"};
    return cur().kind == Tok::Ident && !cur().backquoted && mods.count(cur().text);
  }

  Modifiers skip_modifiers() {
    Modifiers m;
    while (at_modifier() || at_op("@")) {
      if (at_op("@")) {
        // Annotations without arguments, e.g. `@volatile`.
        ++i_;
        parse_type_ref();
        continue;
      }
      if (at_word("private")) m.is_private = true;
      bool qualifiable = at_word("private") || at_word("protected");
      ++i_;
      if (qualifiable && at(Tok::LBracket)) skip_balanced();
    }
    return m;
  }

  // Consumes a bracketed group starting at the current opening token.
  void skip_balanced() {
    int depth = 0;
    do {
      if (at(Tok::Eof)) fail("unexpected end of input");
      if (at(Tok::LParen) || at(Tok::LBracket) || at(Tok::LBrace)) ++depth;
      if (at(Tok::RParen) || at(Tok::RBracket) || at(Tok::RBrace)) --depth;
      ++i_;
    } while (depth > 0);
  }

  // Skips a package or import clause, including selector groups like
  // `import a.{B, C}`.
  void skip_line() {
    ++i_;
    while (!at(Tok::Eof) && !cur().newline_before && !at(Tok::Semi) && !at(Tok::RBrace)) {
      if (at(Tok::LBrace) || at(Tok::LParen) || at(Tok::LBracket)) {
        skip_balanced();
      } else {
        ++i_;
      }
    }
  }

  void recover_to_template_start() {
    if (!at(Tok::Eof)) ++i_;
    while (!at(Tok::Eof) && !(cur().newline_before && at_template_start())) ++i_;
  }

  // Skips to the end of the current member, stopping before a closing brace
  // of the enclosing body.
  void recover_to_member_end() {
    int depth = 0;
    bool first = true;
    while (!at(Tok::Eof)) {
      if (depth == 0 && !first && (cur().newline_before || at(Tok::Semi))) return;
      if (at(Tok::LParen) || at(Tok::LBracket) || at(Tok::LBrace)) ++depth;
      if (at(Tok::RParen) || at(Tok::RBracket) || at(Tok::RBrace)) {
        if (depth == 0) return;
        --depth;
      }
      ++i_;
      first = false;
    }
  }

  // -- types ---------------------------------------------------------------

  TypeRef parse_type_ref(bool arrow_may_follow = false) {
    if (at(Tok::LParen)) fail("tuple and function types are not supported");
    TypeRef ref;
    if (at_word("_")) {
      ref.head = "_";
      ++i_;
    } else {
      ref.head = expect_identifier();
      while (at(Tok::Dot)) {
        ++i_;
        if (at_word("type")) {
          ++i_;
          ref.head += ".type";
          break;
        }
        ref.head += "." + expect_identifier();
      }
    }
    if (at(Tok::LBracket)) {
      ++i_;
      ref.args.push_back(parse_type_ref());
      while (at(Tok::Comma)) {
        ++i_;
        ref.args.push_back(parse_type_ref());
      }
      expect(Tok::RBracket, "']'");
    }
    if (at_op("=>") && !arrow_may_follow) fail("tuple and function types are not supported");
    if (at_op("#")) fail("type projections are not supported");
    return ref;
  }

  void skip_bounds() {
    while (at_op("<:") || at_op(">:") || at_op("<%") || at_op(":")) {
      ++i_;
      parse_type_ref();
    }
  }

  std::vector<std::string> parse_type_params() {
    std::vector<std::string> names;
    expect(Tok::LBracket, "'['");
    do {
      if (at_op("+") || at_op("-")) ++i_;
      names.push_back(expect_identifier());
      if (at(Tok::LBracket)) fail("higher-kinded type parameters are not supported");
      skip_bounds();
    } while (at(Tok::Comma) && (++i_, true));
    expect(Tok::RBracket, "']'");
    return names;
  }

  // -- templates -----------------------------------------------------------

  std::size_t begin_template(TemplateDef def, const Token& at_tok) {
    out_.templates.push_back(std::move(def));
    out_.positions.push_back(pos_of(at_tok));
    return out_.templates.size() - 1;
  }

  TemplateDef& tmpl(std::size_t index) { return out_.templates[index]; }

  void add_field(std::size_t owner, FieldDecl f, const Token& at_tok) {
    for (const auto& existing : tmpl(owner).fields) {
      if (existing.name == f.name) {
        throw SyntaxError{pos_of(at_tok), "duplicate field '" + f.name + "'"};
      }
    }
    tmpl(owner).fields.push_back(std::move(f));
  }

  void parse_template() {
    bool is_case = false;
    if (at_word("case")) {
      is_case = true;
      ++i_;
    }
    std::string keyword = cur().text;
    ++i_;
    const Token& name_tok = cur();
    TemplateDef def;
    def.name = expect_identifier();
    if (keyword == "class") {
      def.kind = is_case ? TemplateKind::CaseClass : TemplateKind::Class;
    } else if (keyword == "trait") {
      def.kind = TemplateKind::Trait;
    } else {
      def.kind = is_case ? TemplateKind::CaseObject : TemplateKind::Object;
    }

    if (at(Tok::LBracket)) {
      if (def.kind == TemplateKind::Object || def.kind == TemplateKind::CaseObject) {
        fail("objects cannot have type parameters");
      }
      def.type_params = parse_type_params();
    }
    std::size_t self = begin_template(std::move(def), name_tok);

    if (!cur().newline_before) skip_modifiers();  // `class A private (x: Int)`
    while (at(Tok::LParen)) {
      if (tmpl(self).kind == TemplateKind::Object || tmpl(self).kind == TemplateKind::CaseObject) {
        fail("objects cannot have constructor parameters");
      }
      parse_ctor_params(self);
    }
    if (at_word("extends")) {
      ++i_;
      tmpl(self).parents.push_back(parse_parent());
      while (at_word("with")) {
        ++i_;
        tmpl(self).parents.push_back(parse_parent());
      }
    }
    if (at(Tok::LBrace)) parse_body(self);
    check_type_param_conflicts(self, name_tok);
  }

  void check_type_param_conflicts(std::size_t self, const Token& at_tok) {
    const auto& t = tmpl(self);
    for (const auto& p : t.type_params) {
      for (const auto& m : t.abstract_type_members) {
        if (p == m) {
          throw SyntaxError{pos_of(at_tok),
                            "'" + p + "' is both a type parameter and an abstract type member"};
        }
      }
    }
  }

  TypeRef parse_parent() {
    TypeRef ref = parse_type_ref();
    while (at(Tok::LParen)) skip_balanced();  // superclass constructor arguments
    return ref;
  }

  void parse_ctor_params(std::size_t self) {
    expect(Tok::LParen, "'('");
    if (at(Tok::RParen)) {
      ++i_;
      return;
    }
    while (true) {
      Modifiers mods = skip_modifiers();
      std::optional<bool> binding;  // true = var, false = val
      if (at_word("val") || at_word("var")) {
        binding = at_word("var");
        ++i_;
      }
      const Token& name_tok = cur();
      std::string name = expect_identifier();
      expect_op(":");
      if (at_op("=>")) ++i_;  // by-name
      TypeRef type = parse_type_ref();
      if (at_op("*")) ++i_;  // repeated
      if (at_op("=")) {
        ++i_;
        skip_expression(/*stop_at_comma=*/true, std::nullopt);
      }
      bool is_case = tmpl(self).kind == TemplateKind::CaseClass;
      if (is_case || binding) {
        FieldDecl f;
        f.name = name;
        f.reassignable = binding.value_or(false);
        f.visibility = mods.is_private ? Visibility::Private : Visibility::Public;
        f.declared_type = std::move(type);
        add_field(self, std::move(f), name_tok);
      }
      if (at(Tok::Comma)) {
        ++i_;
        continue;
      }
      expect(Tok::RParen, "',' or ')'");
      return;
    }
  }

  void skip_self_type() {
    // `{ self => ...` or `{ self: T => ...`
    std::size_t save = i_;
    if (at(Tok::Ident) && (word(cur(), "this") || !is_keyword(cur().text))) {
      ++i_;
      if (at_op("=>")) {
        ++i_;
        return;
      }
      if (at_op(":")) {
        ++i_;
        try {
          parse_type_ref(true);
          while (at_word("with")) {
            ++i_;
            parse_type_ref(true);
          }
          if (at_op("=>")) {
            ++i_;
            return;
          }
        } catch (const SyntaxError&) {
        }
      }
    }
    i_ = save;
  }

  void parse_body(std::size_t self) {
    expect(Tok::LBrace, "'{'");
    skip_self_type();
    while (!at(Tok::RBrace)) {
      if (at(Tok::Eof)) fail("expected '}'");
      if (at(Tok::Semi)) {
        ++i_;
        continue;
      }
      try {
        parse_member(self);
      } catch (const SyntaxError& e) {
        out_.diagnostics.push_back({e.position, e.message});
        recover_to_member_end();
      }
    }
    ++i_;
  }

  void parse_member(std::size_t self) {
    if (at_word("import")) {
      skip_line();
      return;
    }
    Modifiers mods = skip_modifiers();
    if (at_template_start()) {
      parse_template();
      return;
    }
    if (at_word("def")) {
      ++i_;
      skip_expression(/*stop_at_comma=*/false, std::nullopt);
      return;
    }
    if (at_word("type")) {
      ++i_;
      const Token& name_tok = cur();
      std::string name = expect_identifier();
      if (at(Tok::LBracket)) parse_type_params();
      skip_bounds();
      if (at_op("=")) {
        ++i_;
        skip_expression(false, std::nullopt);
        return;
      }
      auto kind = tmpl(self).kind;
      if (is_singleton_like(kind)) {
        throw SyntaxError{pos_of(name_tok),
                          std::string(kind == TemplateKind::AnonClass ? "anonymous classes"
                                                                      : "objects") +
                              " cannot declare abstract type members"};
      }
      tmpl(self).abstract_type_members.push_back(std::move(name));
      return;
    }
    if (at_word("val") || at_word("var")) {
      parse_field(self, mods);
      return;
    }
    fail("expected member definition");
  }

  void parse_field(std::size_t self, Modifiers mods) {
    bool reassignable = at_word("var");
    ++i_;
    if (at(Tok::LParen)) fail("pattern definitions are not supported");
    std::vector<std::pair<std::string, const Token*>> names;
    const Token* name_tok = &cur();
    names.emplace_back(expect_identifier(), name_tok);
    while (at(Tok::Comma)) {
      ++i_;
      name_tok = &cur();
      names.emplace_back(expect_identifier(), name_tok);
    }
    std::optional<TypeRef> annotated;
    if (at_op(":")) {
      ++i_;
      annotated = parse_type_ref();
    }
    std::optional<std::string> anon;
    if (at_op("=")) {
      ++i_;
      anon = parse_initializer(self);
    }
    TypeRef type = annotated ? *annotated
                   : anon    ? type_ref(*anon)
                             : type_ref(std::string(kInferredTypeHead));
    for (auto& [name, tok] : names) {
      FieldDecl f;
      f.name = std::move(name);
      f.reassignable = reassignable;
      f.visibility = mods.is_private ? Visibility::Private : Visibility::Public;
      f.declared_type = type;
      add_field(self, std::move(f), *tok);
    }
  }

  // Returns the synthesized class name when the whole initializer is a
  // single `new T {...}` expression.
  std::optional<std::string> parse_initializer(std::size_t self) {
    std::optional<std::string> only_anon;
    if (at_word("new")) {
      only_anon = parse_new(self);
      if (at_expression_end(/*stop_at_comma=*/false)) return only_anon;
    }
    skip_expression(false, self);
    return std::nullopt;
  }

  // `new T [(args)] [{ body }]`; returns the anonymous class name if a body
  // was present.
  std::optional<std::string> parse_new(std::size_t self) {
    ++i_;  // new
    const Token& type_tok = cur();
    if (at(Tok::LBrace)) fail("anonymous classes need a parent type");
    TypeRef parent = parse_type_ref();
    while (at(Tok::LParen)) skip_balanced();
    if (at_word("with")) fail("anonymous classes must have exactly one parent");
    if (!at(Tok::LBrace) || cur().newline_before) return std::nullopt;

    const std::string& enclosing = tmpl(self).name;
    std::string name = enclosing + "$anon$" + std::to_string(++anon_counter_[enclosing]);
    TemplateDef def;
    def.name = name;
    def.kind = TemplateKind::AnonClass;
    def.parents.push_back(std::move(parent));
    std::size_t anon = begin_template(std::move(def), type_tok);
    parse_body(anon);
    return name;
  }

  bool at_expression_end(bool stop_at_comma) const {
    if (at(Tok::Eof) || at(Tok::RBrace) || at(Tok::RParen) || at(Tok::RBracket) || at(Tok::Semi)) {
      return true;
    }
    if (stop_at_comma && at(Tok::Comma)) return true;
    return cur().newline_before && !continues_line();
  }

  // Whether the current token (first on its line) continues the previous
  // line's expression.
  bool continues_line() const {
    const Token& prev = toks_[i_ - 1];
    if (prev.kind == Tok::Op || prev.kind == Tok::Comma || prev.kind == Tok::Dot ||
        prev.kind == Tok::LParen || prev.kind == Tok::LBracket || prev.kind == Tok::LBrace) {
      return true;
    }
    if (word(prev, "new") || word(prev, "with") || word(prev, "extends") ||
        word(prev, "if") || word(prev, "else") || word(prev, "yield") || word(prev, "match")) {
      return true;
    }
    if (at(Tok::Dot) || at_word("else") || at_word("match") || at_word("catch") ||
        at_word("finally") || at_word("with") || at_word("yield") || at_op("=>")) {
      return true;
    }
    return false;
  }

  // Skips an opaque expression. When `anon_owner` is set, `new T {...}`
  // occurrences inside it still synthesize anonymous classes.
  void skip_expression(bool stop_at_comma, std::optional<std::size_t> anon_owner) {
    int depth = 0;
    bool first = true;
    while (!at(Tok::Eof)) {
      if (depth == 0 && !first && at_expression_end(stop_at_comma)) return;
      if (depth == 0 && first &&
          (at(Tok::RBrace) || at(Tok::RParen) || at(Tok::Semi) ||
           (stop_at_comma && at(Tok::Comma)))) {
        return;
      }
      first = false;
      if (anon_owner && at_word("new")) {
        parse_new(*anon_owner);
        continue;
      }
      if (at(Tok::LParen) || at(Tok::LBracket) || at(Tok::LBrace)) {
        ++depth;
      } else if (at(Tok::RParen) || at(Tok::RBracket) || at(Tok::RBrace)) {
        if (depth == 0) return;
        --depth;
      }
      ++i_;
    }
  }

  std::string file_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  ParseResult& out_;
  std::map<std::string, std::size_t> anon_counter_;
};

}  // namespace parser_detail

/// Parses one source file. On any diagnostic the template list should not be
/// trusted.
inline ParseResult parse_source(const std::string& file, std::string_view text) {
  ParseResult out;
  parser_detail::Lexer lexer(file, text);
  auto tokens = lexer.run(out.diagnostics);
  parser_detail::Parser parser(file, std::move(tokens), out);
  parser.parse_compilation_unit();
  return out;
}

struct SourceFile {
  std::string path;
  std::string text;
};

struct CorpusParseResult {
  std::optional<TemplateGraph> graph;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const noexcept { return graph.has_value(); }
};

/// Parses every file in order and merges the templates into one validated
/// graph. Duplicate names across files are reported at the later definition.
inline CorpusParseResult parse_corpus(const std::vector<SourceFile>& files) {
  CorpusParseResult out;
  std::vector<TemplateDef> defs;
  std::map<std::string, SourcePosition> defined_at;
  for (const auto& f : files) {
    auto r = parse_source(f.path, f.text);
    out.diagnostics.insert(out.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
    if (!r.ok()) continue;
    for (std::size_t i = 0; i < r.templates.size(); ++i) {
      const auto& pos = r.positions[i];
      auto [it, fresh] = defined_at.emplace(r.templates[i].name, pos);
      if (!fresh) {
        const auto& first = it->second;
        out.diagnostics.push_back(
            {pos, "duplicate template '" + r.templates[i].name + "' (first defined at " +
                      first.file + ":" + std::to_string(first.line) + ":" +
                      std::to_string(first.column) + ")"});
        continue;
      }
      try {
        validate_template(r.templates[i]);
      } catch (const IrError& e) {
        out.diagnostics.push_back({pos, e.what()});
        continue;
      }
      defs.push_back(std::move(r.templates[i]));
    }
  }
  if (!out.diagnostics.empty()) return out;
  try {
    out.graph = TemplateGraph::build(std::move(defs));
  } catch (const IrError& e) {
    out.diagnostics.push_back({SourcePosition{files.empty() ? "" : files.front().path, 1, 1},
                               e.what()});
  }
  return out;
}

}  // namespace immut
