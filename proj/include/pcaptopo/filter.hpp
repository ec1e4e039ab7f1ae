#pragma once

#include "pcaptopo/dissect.hpp"

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pcaptopo {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge, Contains };

enum class FieldType { Integer, Bool, Text, Address, Duration };

/// One entry of the public field namespace.
struct FieldSpec {
  std::string_view name;
  FieldType type;
  AddressKind address_kind = AddressKind::Ipv4;  // only for FieldType::Address
  // Layer field names this filter field reads. Several sources make a
  // multi-valued alias (ip.addr reads ip.src and ip.dst).
  std::vector<std::string_view> sources;
  bool frame_field = false;  // computed from the packet, not from a layer
};

const FieldSpec* find_field(std::string_view name);
const std::vector<FieldSpec>& field_namespace();

struct FilterExpr;
using ExprPtr = std::shared_ptr<const FilterExpr>;

struct MatchAll {
  bool operator==(const MatchAll&) const = default;
};
struct ProtocolAtom {
  std::string name;
  bool operator==(const ProtocolAtom&) const = default;
};
struct FieldCmp {
  const FieldSpec* field = nullptr;
  CompareOp op = CompareOp::Eq;
  FieldValue literal;
  bool operator==(const FieldCmp& o) const { return field == o.field && op == o.op && literal == o.literal; }
};
struct Not {
  ExprPtr child;
  bool operator==(const Not& o) const;
};
struct And {
  ExprPtr left, right;
  bool operator==(const And& o) const;
};
struct Or {
  ExprPtr left, right;
  bool operator==(const Or& o) const;
};

/// Immutable display-filter AST. Equality is structural.
struct FilterExpr {
  std::variant<MatchAll, ProtocolAtom, FieldCmp, Not, And, Or> node;
  bool operator==(const FilterExpr&) const = default;
};

ExprPtr make_match_all();
ExprPtr make_protocol(std::string name);
ExprPtr make_compare(const FieldSpec* field, CompareOp op, FieldValue literal);
ExprPtr make_not(ExprPtr child);
ExprPtr make_and(ExprPtr left, ExprPtr right);
ExprPtr make_or(ExprPtr left, ExprPtr right);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, std::string message);
  std::size_t position() const { return position_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t position_;
  std::string message_;
};

/// Parses display-filter text. Blank input yields MatchAll.
ExprPtr parse_filter(std::string_view text);

/// Canonical text form; parse_filter(render(e)) is structurally equal to e.
std::string render(const FilterExpr& expr);

bool is_filter_protocol(std::string_view name);

bool evaluate(const FilterExpr& expr, const DissectedPacket& packet);

/// Positions in `packets` whose packet matches, ascending.
std::vector<std::size_t> apply_filter(std::span<const DissectedPacket> packets, const FilterExpr& expr);
/// Same, restricted to the given ascending positions.
std::vector<std::size_t> apply_filter(std::span<const DissectedPacket> packets, const FilterExpr& expr,
                                      std::span<const std::size_t> within);

std::string_view op_text(CompareOp op);

}  // namespace pcaptopo
