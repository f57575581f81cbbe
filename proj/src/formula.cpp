#include "rtl/formula.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace rtl {

bool Formula::is_core() const {
  switch (op) {
    case Op::Atom:
      return true;
    case Op::Not:
      return left->is_core();
    case Op::And:
    case Op::Until:
    case Op::Since:
      return left->is_core() && right->is_core();
    default:
      return false;
  }
}

FormulaArena& FormulaArena::instance() {
  static FormulaArena arena;
  return arena;
}

std::size_t FormulaArena::KeyHash::operator()(const Key& k) const {
  std::size_t h = static_cast<std::size_t>(k.op);
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(reinterpret_cast<std::size_t>(k.l));
  mix(reinterpret_cast<std::size_t>(k.r));
  mix(std::hash<std::string>{}(k.name));
  return h;
}

FormulaPtr FormulaArena::mk(Op op, FormulaPtr l, FormulaPtr r,
                            std::string_view name) {
  Key key{op, l, r, std::string(name)};
  std::lock_guard<std::mutex> lock(mu_);
  auto it = table_.find(key);
  if (it != table_.end()) return it->second.get();
  auto node = std::make_unique<Formula>();
  node->op = op;
  node->left = l;
  node->right = r;
  node->name = key.name;
  FormulaPtr out = node.get();
  table_.emplace(std::move(key), std::move(node));
  return out;
}

FormulaPtr FormulaArena::atom(std::string_view name) {
  return mk(Op::Atom, nullptr, nullptr, name);
}
FormulaPtr FormulaArena::not_(FormulaPtr f) { return mk(Op::Not, f, nullptr, {}); }
FormulaPtr FormulaArena::and_(FormulaPtr a, FormulaPtr b) { return mk(Op::And, a, b, {}); }
FormulaPtr FormulaArena::until(FormulaPtr a, FormulaPtr b) { return mk(Op::Until, a, b, {}); }
FormulaPtr FormulaArena::since(FormulaPtr a, FormulaPtr b) { return mk(Op::Since, a, b, {}); }
FormulaPtr FormulaArena::or_(FormulaPtr a, FormulaPtr b) { return mk(Op::Or, a, b, {}); }
FormulaPtr FormulaArena::implies(FormulaPtr a, FormulaPtr b) { return mk(Op::Implies, a, b, {}); }
FormulaPtr FormulaArena::iff(FormulaPtr a, FormulaPtr b) { return mk(Op::Iff, a, b, {}); }
FormulaPtr FormulaArena::true_lit() { return mk(Op::TrueLit, nullptr, nullptr, {}); }
FormulaPtr FormulaArena::false_lit() { return mk(Op::FalseLit, nullptr, nullptr, {}); }
FormulaPtr FormulaArena::eventually(FormulaPtr f) { return mk(Op::Eventually, f, nullptr, {}); }
FormulaPtr FormulaArena::always(FormulaPtr f) { return mk(Op::Always, f, nullptr, {}); }

ParseError::ParseError(std::string msg, std::size_t off,
                       std::vector<std::string> exp)
    : std::runtime_error(std::move(msg)), offset(off), expected(std::move(exp)) {}

namespace {

struct Token {
  enum Kind {
    Ident,
    KwU,
    KwS,
    KwF,
    KwG,
    KwTrue,
    KwFalse,
    LParen,
    RParen,
    Comma,
    Bang,
    Amp,
    Pipe,
    Arrow,
    End,
  } kind;
  std::string text;
  std::size_t offset;
};

const char* token_name(Token::Kind k) {
  switch (k) {
    case Token::Ident: return "identifier";
    case Token::KwU: return "'U'";
    case Token::KwS: return "'S'";
    case Token::KwF: return "'F'";
    case Token::KwG: return "'G'";
    case Token::KwTrue: return "'True'";
    case Token::KwFalse: return "'False'";
    case Token::LParen: return "'('";
    case Token::RParen: return "')'";
    case Token::Comma: return "','";
    case Token::Bang: return "'!'";
    case Token::Amp: return "'&'";
    case Token::Pipe: return "'|'";
    case Token::Arrow: return "'->'";
    case Token::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) pos_++;
    tok_.offset = pos_;
    if (pos_ >= text_.size()) {
      tok_.kind = Token::End;
      tok_.text.clear();
      return;
    }
    char c = text_[pos_];
    auto single = [&](Token::Kind k) {
      tok_.kind = k;
      tok_.text = std::string(1, c);
      pos_++;
    };
    switch (c) {
      case '(': single(Token::LParen); return;
      case ')': single(Token::RParen); return;
      case ',': single(Token::Comma); return;
      case '!': single(Token::Bang); return;
      case '&': single(Token::Amp); return;
      case '|': single(Token::Pipe); return;
      case '-':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
          tok_.kind = Token::Arrow;
          tok_.text = "->";
          pos_ += 2;
          return;
        }
        throw ParseError("syntax error: stray '-'", pos_, {"'->'"});
      default:
        break;
    }
    if (std::isupper(static_cast<unsigned char>(c)) ||
        std::islower(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        pos_++;
      tok_.text = std::string(text_.substr(start, pos_ - start));
      if (tok_.text == "U") tok_.kind = Token::KwU;
      else if (tok_.text == "S") tok_.kind = Token::KwS;
      else if (tok_.text == "F") tok_.kind = Token::KwF;
      else if (tok_.text == "G") tok_.kind = Token::KwG;
      else if (tok_.text == "True") tok_.kind = Token::KwTrue;
      else if (tok_.text == "False") tok_.kind = Token::KwFalse;
      else {
        // atoms: [a-z][a-z0-9_]*
        bool ok = std::islower(static_cast<unsigned char>(tok_.text[0])) != 0;
        for (char ch : tok_.text)
          if (!(std::islower(static_cast<unsigned char>(ch)) ||
                std::isdigit(static_cast<unsigned char>(ch)) || ch == '_'))
            ok = false;
        if (!ok)
          throw ParseError("syntax error: bad identifier '" + tok_.text + "'",
                           start, {"identifier"});
        tok_.kind = Token::Ident;
      }
      return;
    }
    throw ParseError(std::string("syntax error: unexpected character '") + c + "'",
                     pos_, {"formula"});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text), arena_(FormulaArena::instance()) {}

  FormulaPtr run() {
    FormulaPtr f = implies();
    expect(Token::End);
    return f;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) {
    const Token& t = lex_.peek();
    std::string msg = "syntax error at offset " + std::to_string(t.offset) +
                      ": unexpected " + token_name(t.kind);
    throw ParseError(std::move(msg), t.offset, std::move(expected));
  }

  Token expect(Token::Kind k) {
    if (lex_.peek().kind != k) fail({token_name(k)});
    return lex_.take();
  }

  FormulaPtr implies() {
    FormulaPtr lhs = disj();
    if (lex_.peek().kind == Token::Arrow) {
      lex_.take();
      return arena_.implies(lhs, implies());  // right-assoc
    }
    return lhs;
  }

  FormulaPtr disj() {
    FormulaPtr f = conj();
    while (lex_.peek().kind == Token::Pipe) {
      lex_.take();
      f = arena_.or_(f, conj());
    }
    return f;
  }

  FormulaPtr conj() {
    FormulaPtr f = unary();
    while (lex_.peek().kind == Token::Amp) {
      lex_.take();
      f = arena_.and_(f, unary());
    }
    return f;
  }

  FormulaPtr unary() {
    switch (lex_.peek().kind) {
      case Token::Bang:
        lex_.take();
        return arena_.not_(unary());
      case Token::KwF:
        lex_.take();
        return arena_.eventually(unary());
      case Token::KwG:
        lex_.take();
        return arena_.always(unary());
      default:
        return primary();
    }
  }

  FormulaPtr primary() {
    switch (lex_.peek().kind) {
      case Token::KwU:
      case Token::KwS: {
        Token t = lex_.take();
        expect(Token::LParen);
        FormulaPtr a = implies();
        expect(Token::Comma);
        FormulaPtr b = implies();
        expect(Token::RParen);
        return t.kind == Token::KwU ? arena_.until(a, b) : arena_.since(a, b);
      }
      case Token::KwTrue:
        lex_.take();
        return arena_.true_lit();
      case Token::KwFalse:
        lex_.take();
        return arena_.false_lit();
      case Token::Ident:
        return arena_.atom(lex_.take().text);
      case Token::LParen: {
        lex_.take();
        FormulaPtr f = implies();
        expect(Token::RParen);
        return f;
      }
      default:
        fail({"'U'", "'S'", "'F'", "'G'", "'True'", "'False'", "identifier",
              "'('", "'!'"});
    }
  }

  Lexer lex_;
  FormulaArena& arena_;
};

// precedence levels: -> 1, | 2, & 3, unary 4, primary 5
int precedence(Op op) {
  switch (op) {
    case Op::Implies:
    case Op::Iff:  // printed expanded, level like ->
      return 1;
    case Op::Or: return 2;
    case Op::And: return 3;
    case Op::Not:
    case Op::Eventually:
    case Op::Always: return 4;
    default: return 5;
  }
}

void print_rec(FormulaPtr f, std::string& out, int min_prec) {
  int prec = precedence(f->op);
  bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (f->op) {
    case Op::Atom: out += f->name; break;
    case Op::TrueLit: out += "True"; break;
    case Op::FalseLit: out += "False"; break;
    case Op::Not:
      out += '!';
      print_rec(f->left, out, 4);
      break;
    case Op::Eventually:
      out += "F ";
      print_rec(f->left, out, 4);
      break;
    case Op::Always:
      out += "G ";
      print_rec(f->left, out, 4);
      break;
    case Op::And:
      print_rec(f->left, out, 3);
      out += " & ";
      print_rec(f->right, out, 4);
      break;
    case Op::Or:
      print_rec(f->left, out, 2);
      out += " | ";
      print_rec(f->right, out, 3);
      break;
    case Op::Implies:
      print_rec(f->left, out, 2);
      out += " -> ";
      print_rec(f->right, out, 1);
      break;
    case Op::Iff: {
      // no surface syntax; print the two-implication expansion
      std::string a, b;
      print_rec(f->left, a, 2);
      print_rec(f->right, b, 2);
      out += "(" + a + " -> " + b + ") & (" + b + " -> " + a + ")";
      break;
    }
    case Op::Until:
    case Op::Since:
      out += (f->op == Op::Until) ? "U(" : "S(";
      print_rec(f->left, out, 1);
      out += ", ";
      print_rec(f->right, out, 1);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

void collect_atoms(FormulaPtr f, std::set<std::string>& out) {
  if (f->op == Op::Atom) {
    out.insert(f->name);
    return;
  }
  if (f->left) collect_atoms(f->left, out);
  if (f->right) collect_atoms(f->right, out);
}

}  // namespace

FormulaPtr parse(std::string_view text) { return Parser(text).run(); }

std::string print(FormulaPtr f) {
  std::string out;
  print_rec(f, out, 1);
  return out;
}

namespace {

FormulaPtr desugar_rec(FormulaPtr f, FormulaPtr truthy, FormulaArena& ar) {
  switch (f->op) {
    case Op::Atom:
      return f;
    case Op::Not:
      return ar.not_(desugar_rec(f->left, truthy, ar));
    case Op::And:
      return ar.and_(desugar_rec(f->left, truthy, ar),
                     desugar_rec(f->right, truthy, ar));
    case Op::Until:
      return ar.until(desugar_rec(f->left, truthy, ar),
                      desugar_rec(f->right, truthy, ar));
    case Op::Since:
      return ar.since(desugar_rec(f->left, truthy, ar),
                      desugar_rec(f->right, truthy, ar));
    case Op::Or: {
      FormulaPtr a = desugar_rec(f->left, truthy, ar);
      FormulaPtr b = desugar_rec(f->right, truthy, ar);
      return ar.not_(ar.and_(ar.not_(a), ar.not_(b)));
    }
    case Op::Implies: {
      FormulaPtr a = desugar_rec(f->left, truthy, ar);
      FormulaPtr b = desugar_rec(f->right, truthy, ar);
      return ar.not_(ar.and_(a, ar.not_(b)));
    }
    case Op::Iff: {
      FormulaPtr fwd = ar.implies(f->left, f->right);
      FormulaPtr bwd = ar.implies(f->right, f->left);
      return desugar_rec(ar.and_(fwd, bwd), truthy, ar);
    }
    case Op::TrueLit:
      return truthy;
    case Op::FalseLit:
      return ar.not_(truthy);
    case Op::Eventually:
      return ar.until(desugar_rec(f->left, truthy, ar), truthy);
    case Op::Always:
      return ar.not_(ar.until(ar.not_(desugar_rec(f->left, truthy, ar)), truthy));
  }
  throw std::logic_error("desugar: bad op");
}

}  // namespace

FormulaPtr desugar(FormulaPtr f) {
  FormulaArena& ar = FormulaArena::instance();
  std::set<std::string> atoms;
  collect_atoms(f, atoms);
  FormulaPtr p0 = ar.atom(atoms.empty() ? "v_true" : *atoms.begin());
  FormulaPtr truthy = ar.not_(ar.and_(p0, ar.not_(p0)));
  return desugar_rec(f, truthy, ar);
}

std::size_t formula_length(FormulaPtr f) {
  std::size_t n = 1;
  if (f->left) n += formula_length(f->left);
  if (f->right) n += formula_length(f->right);
  return n;
}

std::vector<std::string> atom_names(FormulaPtr f) {
  std::set<std::string> atoms;
  collect_atoms(f, atoms);
  return {atoms.begin(), atoms.end()};
}

std::string fresh_atom(FormulaPtr f) {
  std::set<std::string> atoms;
  collect_atoms(f, atoms);
  if (!atoms.count("q")) return "q";
  for (int i = 1;; i++) {
    std::string cand = "q_" + std::to_string(i);
    if (!atoms.count(cand)) return cand;
  }
}

}  // namespace rtl
