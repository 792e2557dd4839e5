#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "sdmapkit/error.hpp"
#include "sdmapkit/osm.hpp"

namespace sdmapkit::osm {
namespace {

struct Attribute {
  std::string name;
  std::string value;
};

struct Position {
  std::size_t line = 1;
  std::size_t column = 1;
};

enum class TokenKind { StartTag, EndTag, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string name;
  std::vector<Attribute> attributes;
  bool self_closing = false;
  Position where;
};

/// Pull tokenizer for the XML subset OSM exports use. Text content, comments,
/// processing instructions, doctype and CDATA are skipped.
class XmlTokenizer {
 public:
  explicit XmlTokenizer(std::string_view text) : text_(text) {}

  Token next() {
    while (true) {
      skip_text();
      if (at_end()) return Token{TokenKind::End, {}, {}, false, pos_};
      // at '<'
      if (starts_with("<!--")) {
        skip_until("-->", "unterminated comment");
      } else if (starts_with("<![CDATA[")) {
        skip_until("]]>", "unterminated CDATA section");
      } else if (starts_with("<?")) {
        skip_until("?>", "unterminated processing instruction");
      } else if (starts_with("<!")) {
        skip_until(">", "unterminated declaration");
      } else if (starts_with("</")) {
        return end_tag();
      } else {
        return start_tag();
      }
    }
  }

  [[noreturn]] void fail(const std::string& message, Position where) const {
    throw Error(ErrorCode::MalformedXml, std::to_string(where.line) + ":" +
                                             std::to_string(where.column) + ": " + message);
  }
  [[noreturn]] void fail(const std::string& message) const { fail(message, pos_); }

 private:
  bool at_end() const { return offset_ >= text_.size(); }
  char peek() const { return text_[offset_]; }
  bool starts_with(std::string_view s) const { return text_.substr(offset_).starts_with(s); }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && offset_ < text_.size(); ++i, ++offset_) {
      if (text_[offset_] == '\n') {
        ++pos_.line;
        pos_.column = 1;
      } else {
        ++pos_.column;
      }
    }
  }

  void skip_text() {
    while (!at_end() && peek() != '<') advance();
  }

  void skip_whitespace() {
    while (!at_end() && is_space(peek())) advance();
  }

  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
  static bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.' || c == ':' || static_cast<unsigned char>(c) >= 0x80;
  }

  void skip_until(std::string_view terminator, const char* message) {
    const Position start = pos_;
    const auto found = text_.find(terminator, offset_);
    if (found == std::string_view::npos) fail(message, start);
    advance(found + terminator.size() - offset_);
  }

  std::string name() {
    const std::size_t begin = offset_;
    while (!at_end() && is_name_char(peek())) advance();
    if (begin == offset_) fail("expected a name");
    return std::string(text_.substr(begin, offset_ - begin));
  }

  Token end_tag() {
    Token token;
    token.kind = TokenKind::EndTag;
    token.where = pos_;
    advance(2);
    token.name = name();
    skip_whitespace();
    if (at_end() || peek() != '>') fail("expected '>' to close </" + token.name);
    advance();
    return token;
  }

  Token start_tag() {
    Token token;
    token.kind = TokenKind::StartTag;
    token.where = pos_;
    advance();
    token.name = name();
    while (true) {
      skip_whitespace();
      if (at_end()) fail("unterminated start tag <" + token.name, token.where);
      if (peek() == '>') {
        advance();
        return token;
      }
      if (starts_with("/>")) {
        advance(2);
        token.self_closing = true;
        return token;
      }
      Attribute attr;
      attr.name = name();
      skip_whitespace();
      if (at_end() || peek() != '=') fail("expected '=' after attribute " + attr.name);
      advance();
      skip_whitespace();
      if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
      const char quote = peek();
      advance();
      const Position value_start = pos_;
      const std::size_t begin = offset_;
      while (!at_end() && peek() != quote) {
        if (peek() == '<') fail("'<' inside attribute value");
        advance();
      }
      if (at_end()) fail("unterminated attribute value", value_start);
      attr.value = decode_entities(text_.substr(begin, offset_ - begin), value_start);
      advance();
      for (const auto& existing : token.attributes) {
        if (existing.name == attr.name) fail("duplicate attribute " + attr.name);
      }
      token.attributes.push_back(std::move(attr));
    }
  }

  std::string decode_entities(std::string_view raw, Position where) const {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      const auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity reference", where);
      const std::string_view entity = raw.substr(i + 1, semi - i - 1);
      if (entity == "amp") {
        out.push_back('&');
      } else if (entity == "lt") {
        out.push_back('<');
      } else if (entity == "gt") {
        out.push_back('>');
      } else if (entity == "quot") {
        out.push_back('"');
      } else if (entity == "apos") {
        out.push_back('\'');
      } else if (entity.size() > 1 && entity[0] == '#') {
        append_char_ref(out, entity.substr(1), where);
      } else {
        fail("unknown entity &" + std::string(entity) + ";", where);
      }
      i = semi;
    }
    return out;
  }

  void append_char_ref(std::string& out, std::string_view digits, Position where) const {
    int base = 10;
    if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
      base = 16;
      digits.remove_prefix(1);
    }
    std::uint32_t cp = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, base);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || cp > 0x10FFFF || cp == 0) {
      fail("bad character reference", where);
    }
    // UTF-8 encode.
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  std::string_view text_;
  std::size_t offset_ = 0;
  Position pos_;
};

const std::string* find_attr(const Token& token, std::string_view name) {
  for (const auto& a : token.attributes) {
    if (a.name == name) return &a.value;
  }
  return nullptr;
}

class OsmBuilder {
 public:
  explicit OsmBuilder(XmlTokenizer& tokenizer) : tok_(tokenizer) {}

  OsmDocument build() {
    std::vector<std::string> stack;
    bool seen_root = false;
    while (true) {
      Token token = tok_.next();
      if (token.kind == TokenKind::End) break;
      if (token.kind == TokenKind::EndTag) {
        if (stack.empty() || stack.back() != token.name) {
          tok_.fail("unexpected </" + token.name + ">" +
                        (stack.empty() ? std::string() : ", expected </" + stack.back() + ">"),
                    token.where);
        }
        close(stack.back());
        stack.pop_back();
        continue;
      }
      if (stack.empty()) {
        if (seen_root) tok_.fail("more than one root element", token.where);
        seen_root = true;
      }
      open(token, stack);
      if (token.self_closing) {
        close(token.name);
      } else {
        stack.push_back(token.name);
      }
    }
    if (!stack.empty()) tok_.fail("unclosed element <" + stack.back() + ">");
    if (!seen_root) tok_.fail("document has no root element");
    return finish();
  }

 private:
  enum class Owner { None, Node, Way };

  void open(const Token& token, const std::vector<std::string>& stack) {
    const std::string_view parent = stack.empty() ? std::string_view() : stack.back();
    if (token.name == "node" && parent == "osm") {
      OsmNode node;
      node.id = integer_attr(token, "id");
      node.location.lat = real_attr(token, "lat");
      node.location.lon = real_attr(token, "lon");
      if (!geo::is_valid(node.location)) tok_.fail("node coordinates out of range", token.where);
      nodes_.push_back(std::move(node));
      owner_ = Owner::Node;
    } else if (token.name == "way" && parent == "osm") {
      OsmWay way;
      way.id = integer_attr(token, "id");
      ways_.push_back(std::move(way));
      owner_ = Owner::Way;
    } else if (token.name == "nd" && parent == "way") {
      ways_.back().node_refs.push_back(integer_attr(token, "ref"));
    } else if (token.name == "tag" && (parent == "node" || parent == "way")) {
      const std::string* k = find_attr(token, "k");
      const std::string* v = find_attr(token, "v");
      if (k == nullptr || v == nullptr) tok_.fail("<tag> needs k and v attributes", token.where);
      Tags& tags = owner_ == Owner::Node ? nodes_.back().tags : ways_.back().tags;
      tags.insert_or_assign(*k, *v);
    }
  }

  void close(std::string_view name) {
    if (name == "node" || name == "way") owner_ = Owner::None;
  }

  OsmId integer_attr(const Token& token, std::string_view name) {
    const std::string* value = find_attr(token, name);
    if (value == nullptr) {
      tok_.fail("<" + token.name + "> missing attribute " + std::string(name), token.where);
    }
    OsmId out = 0;
    const auto [ptr, ec] = std::from_chars(value->data(), value->data() + value->size(), out);
    if (ec != std::errc{} || ptr != value->data() + value->size()) {
      tok_.fail("attribute " + std::string(name) + " is not an integer: " + *value, token.where);
    }
    return out;
  }

  double real_attr(const Token& token, std::string_view name) {
    const std::string* value = find_attr(token, name);
    if (value == nullptr) {
      tok_.fail("<" + token.name + "> missing attribute " + std::string(name), token.where);
    }
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value->data(), value->data() + value->size(), out);
    if (ec != std::errc{} || ptr != value->data() + value->size()) {
      tok_.fail("attribute " + std::string(name) + " is not a number: " + *value, token.where);
    }
    return out;
  }

  OsmDocument finish() {
    std::vector<Diagnostic> diagnostics;
    std::vector<OsmNode> nodes;
    std::unordered_set<OsmId> node_ids;
    for (auto& node : nodes_) {
      if (!node_ids.insert(node.id).second) {
        diagnostics.push_back({DiagnosticKind::DuplicateId, node.id, "duplicate node id"});
        continue;
      }
      nodes.push_back(std::move(node));
    }
    std::vector<OsmWay> ways;
    std::unordered_set<OsmId> way_ids;
    for (auto& way : ways_) {
      if (!way_ids.insert(way.id).second) {
        diagnostics.push_back({DiagnosticKind::DuplicateId, way.id, "duplicate way id"});
        continue;
      }
      bool dangling = false;
      for (const OsmId ref : way.node_refs) {
        if (!node_ids.contains(ref)) {
          diagnostics.push_back({DiagnosticKind::DanglingNodeRef, way.id,
                                 "way references missing node " + std::to_string(ref)});
          dangling = true;
          break;
        }
      }
      if (dangling) continue;
      if (way.node_refs.size() < 2) {
        diagnostics.push_back({DiagnosticKind::ShortWay, way.id, "way has fewer than 2 nodes"});
        continue;
      }
      ways.push_back(std::move(way));
    }
    return OsmDocument(std::move(nodes), std::move(ways), std::move(diagnostics));
  }

  XmlTokenizer& tok_;
  std::vector<OsmNode> nodes_;
  std::vector<OsmWay> ways_;
  Owner owner_ = Owner::None;
};

}  // namespace

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::DanglingNodeRef: return "DanglingNodeRef";
    case DiagnosticKind::ShortWay: return "ShortWay";
    case DiagnosticKind::DuplicateId: return "DuplicateId";
    case DiagnosticKind::ExcludedWay: return "ExcludedWay";
    case DiagnosticKind::ClippedWay: return "ClippedWay";
  }
  return "Unknown";
}

OsmDocument::OsmDocument(std::vector<OsmNode> nodes, std::vector<OsmWay> ways,
                         std::vector<Diagnostic> diagnostics)
    : nodes_(std::move(nodes)), ways_(std::move(ways)), diagnostics_(std::move(diagnostics)) {
  node_index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_.emplace(nodes_[i].id, i);
}

const OsmNode* OsmDocument::find_node(OsmId id) const {
  const auto it = node_index_.find(id);
  return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

OsmDocument parse_osm_xml(std::string_view document) {
  XmlTokenizer tokenizer(document);
  return OsmBuilder(tokenizer).build();
}

OsmDocument parse_osm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_osm_xml(buffer.str());
}

HighwayFilterResult filter_highways(const std::vector<OsmWay>& ways) {
  HighwayFilterResult result;
  for (const auto& way : ways) {
    const auto tag = way.tags.find("highway");
    const auto cls = tag == way.tags.end() ? std::nullopt : parse_highway_class(tag->second);
    if (!cls) {
      ++result.excluded;
      continue;
    }
    result.kept.push_back({way, *cls});
  }
  return result;
}

}  // namespace sdmapkit::osm
