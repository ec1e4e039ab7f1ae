#include "pcaptopo/filter.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <unordered_map>

namespace pcaptopo {

namespace {

FieldSpec scalar(std::string_view name, FieldType type) { return FieldSpec{name, type, AddressKind::Ipv4, {name}, false}; }
FieldSpec address(std::string_view name, AddressKind kind, std::vector<std::string_view> sources = {}) {
  if (sources.empty()) sources = {name};
  return FieldSpec{name, FieldType::Address, kind, std::move(sources), false};
}
FieldSpec alias(std::string_view name, FieldType type, std::vector<std::string_view> sources) {
  return FieldSpec{name, type, AddressKind::Ipv4, std::move(sources), false};
}
FieldSpec frame(std::string_view name, FieldType type) { return FieldSpec{name, type, AddressKind::Ipv4, {}, true}; }

std::vector<FieldSpec> build_namespace() {
  using T = FieldType;
  using K = AddressKind;
  return {
      frame("frame.len", T::Integer),
      frame("frame.cap_len", T::Integer),
      frame("frame.number", T::Integer),
      frame("frame.time_relative", T::Duration),
      address("eth.addr", K::Mac, {"eth.src", "eth.dst"}),
      address("eth.src", K::Mac),
      address("eth.dst", K::Mac),
      scalar("eth.type", T::Integer),
      scalar("vlan.id", T::Integer),
      scalar("arp.opcode", T::Integer),
      address("arp.src.proto_ipv4", K::Ipv4),
      address("arp.dst.proto_ipv4", K::Ipv4),
      address("arp.src.hw_mac", K::Mac),
      address("arp.dst.hw_mac", K::Mac),
      address("ip.addr", K::Ipv4, {"ip.src", "ip.dst"}),
      address("ip.src", K::Ipv4),
      address("ip.dst", K::Ipv4),
      scalar("ip.proto", T::Integer),
      scalar("ip.ttl", T::Integer),
      scalar("ip.len", T::Integer),
      scalar("ip.id", T::Integer),
      scalar("ip.hdr_len", T::Integer),
      scalar("ip.frag_offset", T::Integer),
      scalar("ip.flags.df", T::Bool),
      scalar("ip.flags.mf", T::Bool),
      address("ipv6.addr", K::Ipv6, {"ipv6.src", "ipv6.dst"}),
      address("ipv6.src", K::Ipv6),
      address("ipv6.dst", K::Ipv6),
      scalar("ipv6.nxt", T::Integer),
      scalar("ipv6.hlim", T::Integer),
      scalar("icmp.type", T::Integer),
      scalar("icmp.code", T::Integer),
      scalar("icmpv6.type", T::Integer),
      scalar("icmpv6.code", T::Integer),
      alias("tcp.port", T::Integer, {"tcp.srcport", "tcp.dstport"}),
      scalar("tcp.srcport", T::Integer),
      scalar("tcp.dstport", T::Integer),
      scalar("tcp.seq", T::Integer),
      scalar("tcp.ack", T::Integer),
      scalar("tcp.len", T::Integer),
      scalar("tcp.window_size", T::Integer),
      scalar("tcp.flags", T::Integer),
      scalar("tcp.flags.syn", T::Bool),
      scalar("tcp.flags.ack", T::Bool),
      scalar("tcp.flags.fin", T::Bool),
      scalar("tcp.flags.reset", T::Bool),
      scalar("tcp.flags.push", T::Bool),
      scalar("tcp.flags.urg", T::Bool),
      alias("udp.port", T::Integer, {"udp.srcport", "udp.dstport"}),
      scalar("udp.srcport", T::Integer),
      scalar("udp.dstport", T::Integer),
      scalar("udp.length", T::Integer),
      scalar("dns.id", T::Integer),
      scalar("dns.qry.name", T::Text),
      scalar("dns.qry.type", T::Integer),
      scalar("dns.flags.response", T::Bool),
      scalar("dns.flags.rcode", T::Integer),
      scalar("dns.count.answers", T::Integer),
      address("dns.a", K::Ipv4),
      address("dns.aaaa", K::Ipv6),
      scalar("dhcp.id", T::Integer),
      scalar("dhcp.option.dhcp", T::Integer),
      address("dhcp.hw.mac_addr", K::Mac),
      scalar("ntp.flags.mode", T::Integer),
      scalar("ntp.stratum", T::Integer),
      scalar("http.request.method", T::Text),
      scalar("http.request.uri", T::Text),
      scalar("http.response.code", T::Integer),
      scalar("http.host", T::Text),
      scalar("http.user_agent", T::Text),
      scalar("http.server", T::Text),
      scalar("tls.record.content_type", T::Integer),
      scalar("tls.handshake.type", T::Integer),
      scalar("ssh.protocol", T::Text),
      scalar("ftp.request.command", T::Text),
      scalar("ftp.response.code", T::Integer),
      scalar("smtp.req.command", T::Text),
      scalar("smtp.response.code", T::Integer),
      scalar("snmp.version", T::Integer),
      scalar("snmp.community", T::Text),
      scalar("data.len", T::Integer),
  };
}

const std::unordered_map<std::string_view, const FieldSpec*>& field_index() {
  static const auto index = [] {
    std::unordered_map<std::string_view, const FieldSpec*> m;
    for (const auto& f : field_namespace()) m.emplace(f.name, &f);
    return m;
  }();
  return index;
}

// ---- lexer --------------------------------------------------------------

enum class Tok { End, LParen, RParen, And, Or, Not, Op, Word, String };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t pos = 0;
  CompareOp op = CompareOp::Eq;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':' || c == '-' || c == '/' ||
         c == '+';
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t pos, std::string text, CompareOp op = CompareOp::Eq) {
    out.push_back(Token{k, std::move(text), pos, op});
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    auto two = s.substr(i, 2);
    if (c == '(') {
      push(Tok::LParen, start, "(");
      ++i;
    } else if (c == ')') {
      push(Tok::RParen, start, ")");
      ++i;
    } else if (two == "&&") {
      push(Tok::And, start, "&&");
      i += 2;
    } else if (two == "||") {
      push(Tok::Or, start, "||");
      i += 2;
    } else if (two == "==") {
      push(Tok::Op, start, "==", CompareOp::Eq);
      i += 2;
    } else if (two == "!=") {
      push(Tok::Op, start, "!=", CompareOp::Ne);
      i += 2;
    } else if (two == "<=") {
      push(Tok::Op, start, "<=", CompareOp::Le);
      i += 2;
    } else if (two == ">=") {
      push(Tok::Op, start, ">=", CompareOp::Ge);
      i += 2;
    } else if (c == '<') {
      push(Tok::Op, start, "<", CompareOp::Lt);
      ++i;
    } else if (c == '>') {
      push(Tok::Op, start, ">", CompareOp::Gt);
      ++i;
    } else if (c == '!') {
      push(Tok::Not, start, "!");
      ++i;
    } else if (c == '"') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        char ch = s[i++];
        if (ch == '"') {
          closed = true;
          break;
        }
        if (ch == '\\') {
          if (i >= s.size()) break;
          char esc = s[i++];
          if (esc == 'n') text.push_back('\n');
          else if (esc == 't') text.push_back('\t');
          else text.push_back(esc);
        } else {
          text.push_back(ch);
        }
      }
      if (!closed) throw ParseError(start, "unterminated string literal");
      push(Tok::String, start, std::move(text));
    } else if (word_char(c)) {
      while (i < s.size() && word_char(s[i])) ++i;
      std::string w(s.substr(start, i - start));
      std::string lower = w;
      std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (lower == "and") push(Tok::And, start, w);
      else if (lower == "or") push(Tok::Or, start, w);
      else if (lower == "not") push(Tok::Not, start, w);
      else if (lower == "eq") push(Tok::Op, start, w, CompareOp::Eq);
      else if (lower == "ne") push(Tok::Op, start, w, CompareOp::Ne);
      else if (lower == "lt") push(Tok::Op, start, w, CompareOp::Lt);
      else if (lower == "le") push(Tok::Op, start, w, CompareOp::Le);
      else if (lower == "gt") push(Tok::Op, start, w, CompareOp::Gt);
      else if (lower == "ge") push(Tok::Op, start, w, CompareOp::Ge);
      else if (lower == "contains") push(Tok::Op, start, w, CompareOp::Contains);
      else push(Tok::Word, start, std::move(w));
    } else {
      throw ParseError(start, fmt::format("unexpected character '{}'", c));
    }
  }
  out.push_back(Token{Tok::End, "", s.size()});
  return out;
}

// ---- parser -------------------------------------------------------------

std::string_view type_name(FieldType t) {
  switch (t) {
    case FieldType::Integer: return "integer";
    case FieldType::Bool: return "boolean";
    case FieldType::Text: return "text";
    case FieldType::Address: return "address";
    case FieldType::Duration: return "duration";
  }
  return "value";
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
  std::int64_t v = 0;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<Duration> parse_seconds(std::string_view s) {
  if (s.empty()) return std::nullopt;
  auto dot = s.find('.');
  auto whole = parse_integer(s.substr(0, dot));
  if (!whole || *whole < 0 || *whole > 9'000'000'000) return std::nullopt;
  std::int64_t frac = 0;
  if (dot != std::string_view::npos) {
    auto digits = s.substr(dot + 1);
    if (digits.empty() || digits.size() > 9) return std::nullopt;
    for (char c : digits) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    frac = *parse_integer(digits);
    for (std::size_t i = digits.size(); i < 9; ++i) frac *= 10;
  }
  return Duration(*whole * 1'000'000'000 + frac);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  ExprPtr parse() {
    if (peek().kind == Tok::End) return make_match_all();
    auto e = or_expr();
    if (peek().kind == Tok::RParen) throw ParseError(peek().pos, "unbalanced ')'");
    if (peek().kind != Tok::End) throw ParseError(peek().pos, fmt::format("unexpected '{}'", peek().text));
    return e;
  }

 private:
  const Token& peek() const { return tokens_[i_]; }
  const Token& take() { return tokens_[i_++]; }

  ExprPtr or_expr() {
    auto left = and_expr();
    while (peek().kind == Tok::Or) {
      take();
      left = make_or(left, and_expr());
    }
    return left;
  }

  ExprPtr and_expr() {
    auto left = not_expr();
    while (peek().kind == Tok::And) {
      take();
      left = make_and(left, not_expr());
    }
    return left;
  }

  ExprPtr not_expr() {
    if (peek().kind == Tok::Not) {
      take();
      return make_not(not_expr());
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = take();
    switch (t.kind) {
      case Tok::LParen: {
        if (peek().kind == Tok::RParen) throw ParseError(peek().pos, "empty parentheses");
        auto e = or_expr();
        if (peek().kind != Tok::RParen) throw ParseError(t.pos, "unbalanced '(': missing ')'");
        take();
        return e;
      }
      case Tok::Word: return atom_or_compare(t);
      case Tok::End: throw ParseError(t.pos, "unexpected end of filter");
      case Tok::RParen: throw ParseError(t.pos, "unbalanced ')'");
      default: throw ParseError(t.pos, fmt::format("unexpected '{}'", t.text));
    }
  }

  ExprPtr atom_or_compare(const Token& name) {
    if (peek().kind == Tok::Op) {
      const FieldSpec* field = find_field(name.text);
      if (!field) throw ParseError(name.pos, fmt::format("unknown field '{}'", name.text));
      const Token& op = take();
      const Token& lit = take();
      if (lit.kind != Tok::Word && lit.kind != Tok::String) {
        throw ParseError(lit.pos, fmt::format("expected a value after '{}'", op.text));
      }
      check_operator(*field, op);
      return make_compare(field, op.op, literal(*field, lit));
    }
    if (is_filter_protocol(name.text)) return make_protocol(name.text);
    if (find_field(name.text)) {
      throw ParseError(name.pos, fmt::format("field '{}' needs a comparison operator", name.text));
    }
    throw ParseError(name.pos, fmt::format("unknown protocol '{}'", name.text));
  }

  static void check_operator(const FieldSpec& field, const Token& op) {
    bool ordering = op.op == CompareOp::Lt || op.op == CompareOp::Le || op.op == CompareOp::Gt || op.op == CompareOp::Ge;
    if (ordering && field.type != FieldType::Integer && field.type != FieldType::Duration) {
      throw ParseError(op.pos, fmt::format("'{}' needs an integer or duration field; {} is {}", op.text, field.name,
                                           type_name(field.type)));
    }
    if (op.op == CompareOp::Contains && field.type != FieldType::Text) {
      throw ParseError(op.pos, fmt::format("'contains' needs a text field; {} is {}", field.name, type_name(field.type)));
    }
  }

  static FieldValue literal(const FieldSpec& field, const Token& lit) {
    auto mismatch = [&]() {
      return ParseError(lit.pos, fmt::format("'{}' is not a valid {} value for {}", lit.text,
                                             field.type == FieldType::Address ? kind_name(field.address_kind)
                                                                              : type_name(field.type),
                                             field.name));
    };
    if (field.type == FieldType::Text) return lit.text;
    if (lit.kind == Tok::String) throw mismatch();
    switch (field.type) {
      case FieldType::Integer:
        if (auto v = parse_integer(lit.text)) return *v;
        throw mismatch();
      case FieldType::Bool:
        if (lit.text == "1" || lit.text == "true" || lit.text == "True") return true;
        if (lit.text == "0" || lit.text == "false" || lit.text == "False") return false;
        throw mismatch();
      case FieldType::Address:
        if (auto a = Address::parse(lit.text, field.address_kind)) return *a;
        throw mismatch();
      case FieldType::Duration:
        if (auto d = parse_seconds(lit.text)) return *d;
        throw mismatch();
      case FieldType::Text: break;
    }
    throw mismatch();
  }

  std::vector<Token> tokens_;
  std::size_t i_ = 0;
};

// ---- evaluation ---------------------------------------------------------

template <typename T>
bool ordered(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
    case CompareOp::Contains: return false;
  }
  return false;
}

bool compare_value(CompareOp op, const FieldValue& value, const FieldValue& literal) {
  if (value.index() != literal.index()) return false;
  return std::visit(
      [&](const auto& v) -> bool {
        using V = std::decay_t<decltype(v)>;
        const auto& lit = std::get<V>(literal);
        if constexpr (std::is_same_v<V, std::string>) {
          if (op == CompareOp::Contains) return v.find(lit) != std::string::npos;
          return op == CompareOp::Eq ? v == lit : op == CompareOp::Ne ? v != lit : false;
        } else if constexpr (std::is_same_v<V, std::int64_t> || std::is_same_v<V, Duration>) {
          return ordered(op, v, lit);
        } else {
          return op == CompareOp::Eq ? v == lit : op == CompareOp::Ne ? v != lit : false;
        }
      },
      value);
}

bool evaluate_compare(const FieldCmp& cmp, const DissectedPacket& p) {
  const FieldSpec& f = *cmp.field;
  if (f.frame_field) {
    FieldValue v;
    if (f.name == "frame.len") v = std::int64_t{p.length};
    else if (f.name == "frame.cap_len") v = std::int64_t{p.captured_length};
    else if (f.name == "frame.number") v = static_cast<std::int64_t>(p.index + 1);
    else if (f.name == "frame.time_relative") v = p.time_relative;
    else return false;
    return compare_value(cmp.op, v, cmp.literal);
  }
  for (const auto& layer : p.layers) {
    for (const auto& field : layer.fields) {
      for (auto source : f.sources) {
        if (field.name == source && compare_value(cmp.op, field.value, cmp.literal)) return true;
      }
    }
  }
  return false;
}

std::string render_literal(const FieldValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using V = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<V, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<V, bool>) {
          return x ? "1" : "0";
        } else if constexpr (std::is_same_v<V, std::string>) {
          std::string out = "\"";
          for (char c : x) {
            if (c == '"' || c == '\\') out.push_back('\\');
            if (c == '\n') {
              out += "\\n";
              continue;
            }
            if (c == '\t') {
              out += "\\t";
              continue;
            }
            out.push_back(c);
          }
          return out + "\"";
        } else if constexpr (std::is_same_v<V, Address>) {
          return x.to_string();
        } else if constexpr (std::is_same_v<V, Duration>) {
          auto ns = x.count();
          return fmt::format("{}.{:09d}", ns / 1'000'000'000, ns % 1'000'000'000);
        } else {
          return "\"\"";
        }
      },
      v);
}

bool is_binary(const FilterExpr& e) {
  return std::holds_alternative<And>(e.node) || std::holds_alternative<Or>(e.node);
}

std::string render_child(const FilterExpr& e) {
  return is_binary(e) ? "(" + render(e) + ")" : render(e);
}

}  // namespace

const std::vector<FieldSpec>& field_namespace() {
  static const std::vector<FieldSpec> fields = build_namespace();
  return fields;
}

const FieldSpec* find_field(std::string_view name) {
  const auto& index = field_index();
  auto it = index.find(name);
  return it == index.end() ? nullptr : it->second;
}

bool Not::operator==(const Not& o) const { return *child == *o.child; }
bool And::operator==(const And& o) const { return *left == *o.left && *right == *o.right; }
bool Or::operator==(const Or& o) const { return *left == *o.left && *right == *o.right; }

ExprPtr make_match_all() { return std::make_shared<const FilterExpr>(FilterExpr{MatchAll{}}); }
ExprPtr make_protocol(std::string name) { return std::make_shared<const FilterExpr>(FilterExpr{ProtocolAtom{std::move(name)}}); }
ExprPtr make_compare(const FieldSpec* field, CompareOp op, FieldValue literal) {
  return std::make_shared<const FilterExpr>(FilterExpr{FieldCmp{field, op, std::move(literal)}});
}
ExprPtr make_not(ExprPtr child) { return std::make_shared<const FilterExpr>(FilterExpr{Not{std::move(child)}}); }
ExprPtr make_and(ExprPtr left, ExprPtr right) {
  return std::make_shared<const FilterExpr>(FilterExpr{And{std::move(left), std::move(right)}});
}
ExprPtr make_or(ExprPtr left, ExprPtr right) {
  return std::make_shared<const FilterExpr>(FilterExpr{Or{std::move(left), std::move(right)}});
}

ParseError::ParseError(std::size_t position, std::string message)
    : std::runtime_error(fmt::format("filter error at {}: {}", position, message)),
      position_(position),
      message_(std::move(message)) {}

ExprPtr parse_filter(std::string_view text) { return Parser(text).parse(); }

bool is_filter_protocol(std::string_view name) {
  return name == "frame" || DissectorRegistry::standard().knows_protocol(name);
}

std::string_view op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::Contains: return "contains";
  }
  return "?";
}

std::string render(const FilterExpr& expr) {
  return std::visit(
      [](const auto& n) -> std::string {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, MatchAll>) {
          return "";
        } else if constexpr (std::is_same_v<N, ProtocolAtom>) {
          return n.name;
        } else if constexpr (std::is_same_v<N, FieldCmp>) {
          return fmt::format("{} {} {}", n.field->name, op_text(n.op), render_literal(n.literal));
        } else if constexpr (std::is_same_v<N, Not>) {
          return "!" + render_child(*n.child);
        } else if constexpr (std::is_same_v<N, And>) {
          return render_child(*n.left) + " && " + render_child(*n.right);
        } else {
          return render_child(*n.left) + " || " + render_child(*n.right);
        }
      },
      expr.node);
}

bool evaluate(const FilterExpr& expr, const DissectedPacket& packet) {
  return std::visit(
      [&](const auto& n) -> bool {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, MatchAll>) {
          return true;
        } else if constexpr (std::is_same_v<N, ProtocolAtom>) {
          if (n.name == "frame") return true;
          return std::any_of(packet.layers.begin(), packet.layers.end(),
                             [&](const ProtocolLayer& l) { return l.protocol == n.name; });
        } else if constexpr (std::is_same_v<N, FieldCmp>) {
          return evaluate_compare(n, packet);
        } else if constexpr (std::is_same_v<N, Not>) {
          return !evaluate(*n.child, packet);
        } else if constexpr (std::is_same_v<N, And>) {
          return evaluate(*n.left, packet) && evaluate(*n.right, packet);
        } else {
          return evaluate(*n.left, packet) || evaluate(*n.right, packet);
        }
      },
      expr.node);
}

std::vector<std::size_t> apply_filter(std::span<const DissectedPacket> packets, const FilterExpr& expr) {
  std::vector<std::size_t> out;
  if (std::holds_alternative<MatchAll>(expr.node)) {
    out.resize(packets.size());
    for (std::size_t i = 0; i < packets.size(); ++i) out[i] = i;
    return out;
  }
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (evaluate(expr, packets[i])) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> apply_filter(std::span<const DissectedPacket> packets, const FilterExpr& expr,
                                      std::span<const std::size_t> within) {
  std::vector<std::size_t> out;
  for (auto i : within) {
    if (i < packets.size() && evaluate(expr, packets[i])) out.push_back(i);
  }
  return out;
}

}  // namespace pcaptopo
