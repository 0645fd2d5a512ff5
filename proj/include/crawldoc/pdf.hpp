// Copyright 2026 The crawldoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

// Text extraction with positions from PDF files. Scope: uncompressed and
// FlateDecode streams, classic xref or object streams (found by a linear
// object scan rather than the xref table), simple 1-byte fonts with
// /Widths or standard Courier metrics. Image-only pages yield no text.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "crawldoc/errors.hpp"
#include "crawldoc/util.hpp"

namespace crawldoc::pdf {

struct PageGeom {
  double width = 612;
  double height = 792;
};

/// One assembled text line in top-down page coordinates relative to the
/// media box (y0 is the top edge).
struct LineBox {
  std::string text;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int page = 0;
};

struct ExtractedText {
  std::vector<LineBox> lines;
  std::vector<PageGeom> pages;
};

// Ascent/descent of the nominal line box around the baseline, in em.
constexpr double kAscentEm = 0.800;
constexpr double kDescentEm = 0.200;

namespace detail {

// ---------------------------------------------------------------------------
// Object model
// ---------------------------------------------------------------------------

struct Object {
  enum class Kind { Null, Bool, Number, String, Name, Array, Dict, Ref };
  Kind kind = Kind::Null;
  bool bval = false;
  double num = 0;
  std::string str;  // String payload or Name text
  std::vector<Object> array;
  std::map<std::string, Object> dict;
  int ref_num = 0;
  std::string stream;
  bool has_stream = false;

  bool is(Kind k) const { return kind == k; }
  bool is_name(std::string_view n) const { return kind == Kind::Name && str == n; }

  const Object* find(const std::string& key) const {
    auto it = dict.find(key);
    return it == dict.end() ? nullptr : &it->second;
  }
};

inline bool is_pdf_ws(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\0';
}

inline bool is_pdf_delim(char c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' ||
         c == '{' || c == '}' || c == '/' || c == '%';
}

struct Lexer {
  std::string_view src;
  size_t pos = 0;

  bool eof() const { return pos >= src.size(); }
  char peek() const { return src[pos]; }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (is_pdf_ws(c)) {
        ++pos;
      } else if (c == '%') {
        while (!eof() && peek() != '\n' && peek() != '\r') ++pos;
      } else {
        break;
      }
    }
  }

  std::string read_keyword() {
    std::string kw;
    while (!eof() && !is_pdf_ws(peek()) && !is_pdf_delim(peek())) kw.push_back(src[pos++]);
    return kw;
  }

  std::string read_name() {
    ++pos;  // '/'
    std::string name;
    while (!eof() && !is_pdf_ws(peek()) && !is_pdf_delim(peek())) {
      char c = src[pos++];
      if (c == '#' && pos + 1 < src.size() &&
          std::isxdigit(static_cast<unsigned char>(src[pos])) &&
          std::isxdigit(static_cast<unsigned char>(src[pos + 1]))) {
        auto hex = [](char h) {
          return std::isdigit(static_cast<unsigned char>(h))
                     ? h - '0'
                     : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10;
        };
        name.push_back(static_cast<char>(hex(src[pos]) * 16 + hex(src[pos + 1])));
        pos += 2;
      } else {
        name.push_back(c);
      }
    }
    return name;
  }

  std::string read_literal_string() {
    ++pos;  // '('
    std::string out;
    int depth = 1;
    while (!eof()) {
      char c = src[pos++];
      if (c == '\\') {
        if (eof()) break;
        char e = src[pos++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 'r': out.push_back('\r'); break;
          case 't': out.push_back('\t'); break;
          case 'b': out.push_back('\b'); break;
          case 'f': out.push_back('\f'); break;
          case '(': out.push_back('('); break;
          case ')': out.push_back(')'); break;
          case '\\': out.push_back('\\'); break;
          case '\r':
            if (!eof() && peek() == '\n') ++pos;
            break;  // line continuation
          case '\n': break;
          default:
            if (e >= '0' && e <= '7') {
              int v = e - '0';
              for (int k = 0; k < 2 && !eof() && src[pos] >= '0' && src[pos] <= '7'; ++k)
                v = v * 8 + (src[pos++] - '0');
              out.push_back(static_cast<char>(v & 0xff));
            } else {
              out.push_back(e);
            }
        }
      } else if (c == '(') {
        ++depth;
        out.push_back(c);
      } else if (c == ')') {
        if (--depth == 0) break;
        out.push_back(c);
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  std::string read_hex_string() {
    ++pos;  // '<'
    std::string out;
    int hi = -1;
    while (!eof()) {
      char c = src[pos++];
      if (c == '>') break;
      if (!std::isxdigit(static_cast<unsigned char>(c))) continue;
      int v = std::isdigit(static_cast<unsigned char>(c))
                  ? c - '0'
                  : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
      if (hi < 0) {
        hi = v;
      } else {
        out.push_back(static_cast<char>(hi * 16 + v));
        hi = -1;
      }
    }
    if (hi >= 0) out.push_back(static_cast<char>(hi * 16));
    return out;
  }

  Object parse_number_or_ref() {
    size_t save = pos;
    std::string tok = read_keyword();
    char* endp = nullptr;
    double v = std::strtod(tok.c_str(), &endp);
    if (endp == tok.c_str() || *endp != '\0')
      throw ExtractionError("bad-object", "malformed number at offset " + std::to_string(save));

    // Lookahead for "gen R".
    bool integral = tok.find('.') == std::string::npos && v >= 0;
    if (integral) {
      size_t after_num = pos;
      skip_ws();
      size_t gen_start = pos;
      std::string gen = read_keyword();
      bool gen_ok = !gen.empty();
      for (char c : gen) {
        if (!std::isdigit(static_cast<unsigned char>(c))) gen_ok = false;
      }
      if (gen_ok) {
        skip_ws();
        if (!eof() && peek() == 'R' &&
            (pos + 1 >= src.size() || is_pdf_ws(src[pos + 1]) || is_pdf_delim(src[pos + 1]))) {
          ++pos;
          Object o;
          o.kind = Object::Kind::Ref;
          o.ref_num = static_cast<int>(v);
          return o;
        }
      }
      pos = after_num;
      (void)gen_start;
    }
    Object o;
    o.kind = Object::Kind::Number;
    o.num = v;
    return o;
  }

  Object parse_object(int depth = 0) {
    if (depth > 64) throw ExtractionError("bad-object", "object nesting too deep");
    skip_ws();
    if (eof()) throw ExtractionError("bad-object", "unexpected end of data");
    char c = peek();
    if (c == '<') {
      if (pos + 1 < src.size() && src[pos + 1] == '<') {
        pos += 2;
        Object o;
        o.kind = Object::Kind::Dict;
        while (true) {
          skip_ws();
          if (eof()) throw ExtractionError("bad-object", "unterminated dictionary");
          if (peek() == '>') {
            if (pos + 1 < src.size() && src[pos + 1] == '>') {
              pos += 2;
              break;
            }
            ++pos;
            continue;
          }
          if (peek() != '/') throw ExtractionError("bad-object", "dictionary key is not a name");
          std::string key = read_name();
          o.dict[key] = parse_object(depth + 1);
        }
        return o;
      }
      Object o;
      o.kind = Object::Kind::String;
      o.str = read_hex_string();
      return o;
    }
    if (c == '(') {
      Object o;
      o.kind = Object::Kind::String;
      o.str = read_literal_string();
      return o;
    }
    if (c == '/') {
      Object o;
      o.kind = Object::Kind::Name;
      o.str = read_name();
      return o;
    }
    if (c == '[') {
      ++pos;
      Object o;
      o.kind = Object::Kind::Array;
      while (true) {
        skip_ws();
        if (eof()) throw ExtractionError("bad-object", "unterminated array");
        if (peek() == ']') {
          ++pos;
          break;
        }
        o.array.push_back(parse_object(depth + 1));
      }
      return o;
    }
    if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c)))
      return parse_number_or_ref();

    std::string kw = read_keyword();
    Object o;
    if (kw == "true") {
      o.kind = Object::Kind::Bool;
      o.bval = true;
    } else if (kw == "false") {
      o.kind = Object::Kind::Bool;
      o.bval = false;
    } else if (kw == "null") {
      o.kind = Object::Kind::Null;
    } else {
      throw ExtractionError("bad-object", "unexpected token \"" + kw + "\"");
    }
    return o;
  }
};

// ---------------------------------------------------------------------------
// Stream decoding
// ---------------------------------------------------------------------------

inline std::string zlib_inflate(std::string_view data) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw ExtractionError("bad-object", "zlib init failed");
  std::string out;
  out.resize(std::max<size_t>(data.size() * 4, 4096));
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  size_t written = 0;
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    if (written == out.size()) out.resize(out.size() * 2);
    zs.next_out = reinterpret_cast<Bytef*>(out.data() + written);
    zs.avail_out = static_cast<uInt>(out.size() - written);
    rc = inflate(&zs, Z_NO_FLUSH);
    written = out.size() - zs.avail_out;
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;  // truncated but usable
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw ExtractionError("bad-object", "zlib inflate failed");
    }
  }
  inflateEnd(&zs);
  out.resize(written);
  return out;
}

/// PNG predictors (2-byte sub-family used by Flate /DecodeParms).
inline std::string undo_png_predictor(const std::string& data, int columns) {
  if (columns <= 0) throw ExtractionError("bad-object", "bad predictor columns");
  const size_t row = static_cast<size_t>(columns);
  std::string out;
  std::vector<uint8_t> prev(row, 0);
  for (size_t p = 0; p + 1 + row <= data.size() + row && p < data.size(); p += row + 1) {
    uint8_t tag = static_cast<uint8_t>(data[p]);
    size_t avail = std::min(row, data.size() - p - 1);
    std::vector<uint8_t> cur(row, 0);
    for (size_t i = 0; i < avail; ++i) cur[i] = static_cast<uint8_t>(data[p + 1 + i]);
    for (size_t i = 0; i < row; ++i) {
      uint8_t left = i > 0 ? cur[i - 1] : 0;
      uint8_t up = prev[i];
      switch (tag) {
        case 0: break;
        case 1: cur[i] = static_cast<uint8_t>(cur[i] + left); break;
        case 2: cur[i] = static_cast<uint8_t>(cur[i] + up); break;
        case 3: cur[i] = static_cast<uint8_t>(cur[i] + (left + up) / 2); break;
        case 4: {
          uint8_t ul = i > 0 ? prev[i - 1] : 0;
          int pa = std::abs(static_cast<int>(up) - ul);
          int pb = std::abs(static_cast<int>(left) - ul);
          int pc = std::abs(static_cast<int>(left) + up - 2 * ul);
          uint8_t pred = (pa <= pb && pa <= pc) ? left : (pb <= pc ? up : ul);
          cur[i] = static_cast<uint8_t>(cur[i] + pred);
          break;
        }
        default: throw ExtractionError("bad-object", "unsupported predictor row tag");
      }
    }
    out.append(reinterpret_cast<const char*>(cur.data()), row);
    prev = cur;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Document: linear object scan + lazy parse + ObjStm expansion
// ---------------------------------------------------------------------------

struct Document {
  std::string_view bytes;
  std::map<int, size_t> body_offset;       // object number -> offset after "obj"
  std::map<int, Object> parsed;            // cache, also holds ObjStm members
  Object trailer;                          // merged trailer entries

  const Object& get(int num) {
    auto hit = parsed.find(num);
    if (hit != parsed.end()) return hit->second;
    auto at = body_offset.find(num);
    if (at == body_offset.end()) {
      static const Object null_obj;
      return null_obj;
    }
    Object obj = parse_at(at->second);
    return parsed.emplace(num, std::move(obj)).first->second;
  }

  const Object& resolve(const Object& o) {
    if (o.kind == Object::Kind::Ref) return resolve(get(o.ref_num));
    return o;
  }

  double number(const Object& o, double fallback = 0) {
    const Object& r = resolve(o);
    return r.kind == Object::Kind::Number ? r.num : fallback;
  }

  Object parse_at(size_t offset) {
    Lexer lex{bytes, offset};
    Object obj = lex.parse_object();
    lex.skip_ws();
    if (obj.kind == Object::Kind::Dict && bytes.substr(lex.pos, 6) == "stream") {
      lex.pos += 6;
      if (lex.pos < bytes.size() && bytes[lex.pos] == '\r') ++lex.pos;
      if (lex.pos < bytes.size() && bytes[lex.pos] == '\n') ++lex.pos;
      size_t len = 0;
      bool have_len = false;
      if (const Object* lo = obj.find("Length")) {
        const Object& r = resolve(*lo);
        if (r.kind == Object::Kind::Number && r.num >= 0) {
          len = static_cast<size_t>(r.num);
          have_len = true;
        }
      }
      size_t data_start = lex.pos;
      if (have_len && data_start + len <= bytes.size()) {
        std::string_view tail = bytes.substr(data_start + len);
        size_t k = 0;
        while (k < tail.size() && is_pdf_ws(tail[k])) ++k;
        if (tail.substr(k, 9) == "endstream") {
          obj.stream = std::string(bytes.substr(data_start, len));
          obj.has_stream = true;
          return obj;
        }
      }
      // Fall back to searching for the endstream keyword.
      size_t end = bytes.find("endstream", data_start);
      if (end == std::string_view::npos)
        throw ExtractionError("truncated", "stream without endstream");
      size_t stop = end;
      while (stop > data_start && is_pdf_ws(bytes[stop - 1])) --stop;
      obj.stream = std::string(bytes.substr(data_start, stop - data_start));
      obj.has_stream = true;
    }
    return obj;
  }

  std::string decoded_stream(const Object& obj) {
    if (!obj.has_stream) return {};
    std::string data = obj.stream;
    std::vector<const Object*> filters;
    if (const Object* f = obj.find("Filter")) {
      const Object& rf = resolve(*f);
      if (rf.kind == Object::Kind::Name) filters.push_back(&rf);
      else if (rf.kind == Object::Kind::Array)
        for (const auto& e : rf.array) filters.push_back(&e);
    }
    for (const Object* f : filters) {
      const Object& rf = resolve(*f);
      if (rf.is_name("FlateDecode") || rf.is_name("Fl")) {
        data = zlib_inflate(data);
        if (const Object* parms = obj.find("DecodeParms")) {
          const Object& rp = resolve(*parms);
          if (rp.kind == Object::Kind::Dict) {
            int predictor = 1;
            if (const Object* p = rp.find("Predictor")) predictor = static_cast<int>(number(*p, 1));
            if (predictor >= 10) {
              int columns = 1;
              if (const Object* c = rp.find("Columns")) columns = static_cast<int>(number(*c, 1));
              data = undo_png_predictor(data, columns);
            } else if (predictor != 1) {
              throw ExtractionError("unsupported-filter", "TIFF predictor not supported");
            }
          }
        }
      } else {
        throw ExtractionError("unsupported-filter",
                              "stream filter " + rf.str + " not supported");
      }
    }
    return data;
  }
};

inline bool keyword_boundary(std::string_view bytes, size_t pos, size_t len) {
  bool before = pos == 0 || is_pdf_ws(bytes[pos - 1]) || is_pdf_delim(bytes[pos - 1]);
  size_t end = pos + len;
  bool after = end >= bytes.size() || is_pdf_ws(bytes[end]) || is_pdf_delim(bytes[end]);
  return before && after;
}

/// Scans for "N G obj" headers. More robust than trusting the xref table
/// and sufficient for both generated fixtures and ordinary files.
inline void scan_objects(Document& doc) {
  std::string_view b = doc.bytes;
  size_t pos = 0;
  while ((pos = b.find("obj", pos)) != std::string_view::npos) {
    if (!keyword_boundary(b, pos, 3)) {
      pos += 3;
      continue;
    }
    // Walk backwards over "N G ".
    size_t p = pos;
    auto skip_back_ws = [&](size_t q) {
      while (q > 0 && is_pdf_ws(b[q - 1])) --q;
      return q;
    };
    auto skip_back_digits = [&](size_t q) {
      size_t start = q;
      while (q > 0 && std::isdigit(static_cast<unsigned char>(b[q - 1]))) --q;
      return q == start ? std::string_view::npos : q;
    };
    size_t q = skip_back_ws(p);
    size_t gen_start = skip_back_digits(q);
    if (gen_start == std::string_view::npos) {
      pos += 3;
      continue;
    }
    q = skip_back_ws(gen_start);
    size_t num_start = skip_back_digits(q);
    if (num_start == std::string_view::npos) {
      pos += 3;
      continue;
    }
    int num = std::atoi(std::string(b.substr(num_start, q - num_start)).c_str());
    doc.body_offset.emplace(num, pos + 3);  // first wins (incremental updates append)
    pos += 3;
  }
}

inline void collect_trailer(Document& doc) {
  std::string_view b = doc.bytes;
  doc.trailer.kind = Object::Kind::Dict;
  size_t pos = 0;
  while ((pos = b.find("trailer", pos)) != std::string_view::npos) {
    if (!keyword_boundary(b, pos, 7)) {
      ++pos;
      continue;
    }
    try {
      Lexer lex{b, pos + 7};
      Object t = lex.parse_object();
      for (auto& [k, v] : t.dict) doc.trailer.dict.emplace(k, v);
    } catch (const ExtractionError&) {
      // tolerate damaged trailers; the object scan already found content
    }
    pos += 7;
  }
  // Cross-reference streams carry trailer entries in their own dict.
  if (doc.trailer.dict.find("Root") == doc.trailer.dict.end()) {
    for (const auto& [num, off] : doc.body_offset) {
      try {
        const Object& obj = doc.get(num);
        const Object* type = obj.find("Type");
        if (type && type->is_name("XRef")) {
          for (const auto& [k, v] : obj.dict) doc.trailer.dict.emplace(k, v);
        }
      } catch (const ExtractionError&) {
      }
    }
  }
}

/// Unpacks /Type /ObjStm streams so their members are reachable by number.
inline void expand_object_streams(Document& doc) {
  std::vector<int> nums;
  for (const auto& [num, off] : doc.body_offset) nums.push_back(num);
  for (int num : nums) {
    try {
      const Object& obj = doc.get(num);
      const Object* type = obj.find("Type");
      if (!type || !type->is_name("ObjStm") || !obj.has_stream) continue;
      std::string data = doc.decoded_stream(obj);
      int n = static_cast<int>(doc.number(*obj.find("N")));
      int first = static_cast<int>(doc.number(*obj.find("First")));
      Lexer head{data, 0};
      std::vector<std::pair<int, int>> members;
      for (int i = 0; i < n; ++i) {
        head.skip_ws();
        int onum = std::atoi(head.read_keyword().c_str());
        head.skip_ws();
        int ooff = std::atoi(head.read_keyword().c_str());
        members.emplace_back(onum, ooff);
      }
      for (auto [onum, ooff] : members) {
        if (doc.parsed.count(onum) || doc.body_offset.count(onum)) continue;
        Lexer lex{data, static_cast<size_t>(first + ooff)};
        doc.parsed.emplace(onum, lex.parse_object());
      }
    } catch (const ExtractionError&) {
      // a broken container loses only its members
    }
  }
}

// ---------------------------------------------------------------------------
// Fonts
// ---------------------------------------------------------------------------

struct FontMetrics {
  bool fixed = false;
  double fixed_width = 500;                 // per-char width in 1/1000 em
  int first_char = 0;
  std::vector<double> widths;               // from /Widths when present
  double missing_width = 500;

  double width(uint8_t code) const {
    if (!widths.empty()) {
      int idx = static_cast<int>(code) - first_char;
      if (idx >= 0 && idx < static_cast<int>(widths.size()) && widths[static_cast<size_t>(idx)] > 0)
        return widths[static_cast<size_t>(idx)];
      return missing_width;
    }
    return fixed ? fixed_width : missing_width;
  }
};

inline FontMetrics load_font(Document& doc, const Object& font_dict) {
  FontMetrics fm;
  if (const Object* base = font_dict.find("BaseFont")) {
    const Object& b = doc.resolve(*base);
    if (b.kind == Object::Kind::Name && b.str.find("Courier") != std::string::npos) {
      fm.fixed = true;
      fm.fixed_width = 600;  // Courier metrics: every glyph is 600/1000 em
    }
  }
  if (const Object* fc = font_dict.find("FirstChar"))
    fm.first_char = static_cast<int>(doc.number(*fc));
  if (const Object* w = font_dict.find("Widths")) {
    const Object& arr = doc.resolve(*w);
    if (arr.kind == Object::Kind::Array) {
      for (const auto& e : arr.array) fm.widths.push_back(doc.number(e, 0));
    }
  }
  if (fm.fixed) fm.missing_width = fm.fixed_width;
  return fm;
}

// ---------------------------------------------------------------------------
// Content interpreter
// ---------------------------------------------------------------------------

struct Matrix {  // [a b c d e f]
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  static Matrix translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }

  Matrix mul(const Matrix& m) const {  // this × m
    return {a * m.a + b * m.c,         a * m.b + b * m.d,
            c * m.a + d * m.c,         c * m.b + d * m.d,
            e * m.a + f * m.c + m.e,   e * m.b + f * m.d + m.f};
  }

  std::pair<double, double> apply(double x, double y) const {
    return {a * x + c * y + e, b * x + d * y + f};
  }

  double y_scale() const { return std::sqrt(c * c + d * d); }
};

struct TextRun {
  std::string text;
  double x0 = 0, x1 = 0, baseline = 0, size = 12;
  int page = 0;
};

struct GraphicsState {
  Matrix ctm;
};

struct TextState {
  Matrix tm, tlm;
  double font_size = 12;
  double char_spacing = 0, word_spacing = 0, leading = 0;
  double h_scale = 1.0;
  FontMetrics font;
};

inline void append_latin1(std::string& out, uint8_t b) {
  if (b >= 32 && b < 127) {
    out.push_back(static_cast<char>(b));
  } else if (b >= 160) {
    out.push_back(static_cast<char>(0xc0 | (b >> 6)));
    out.push_back(static_cast<char>(0x80 | (b & 0x3f)));
  }
  // control bytes dropped
}

struct ContentInterpreter {
  Document& doc;
  const Object* font_resources = nullptr;
  int page_index = 0;
  std::vector<TextRun>& runs;

  GraphicsState gs;
  std::vector<GraphicsState> gs_stack;
  TextState ts;

  void show_string(const std::string& bytes_shown) {
    Matrix trm = ts.tm.mul(gs.ctm);
    auto [sx, sy] = trm.apply(0, 0);
    double tx = 0;  // cumulative displacement in text space
    std::string text;
    for (unsigned char b : bytes_shown) {
      append_latin1(text, b);
      double w = ts.font.width(b) / 1000.0;
      tx += (w * ts.font_size + ts.char_spacing + (b == 32 ? ts.word_spacing : 0)) * ts.h_scale;
    }
    auto [ex, ey] = trm.apply(tx, 0);
    ts.tm = Matrix::translate(tx, 0).mul(ts.tm);
    if (text.empty()) return;
    TextRun run;
    run.text = std::move(text);
    run.x0 = std::min(sx, ex);
    run.x1 = std::max(sx, ex);
    run.baseline = sy;
    run.size = ts.font_size * trm.y_scale();
    run.page = page_index;
    runs.push_back(std::move(run));
    (void)ey;
  }

  void next_line(double tx, double ty) {
    ts.tlm = Matrix::translate(tx, ty).mul(ts.tlm);
    ts.tm = ts.tlm;
  }

  void skip_inline_image(Lexer& lex) {
    // BI ... ID <binary> EI
    size_t p = lex.src.find("EI", lex.pos);
    while (p != std::string_view::npos && !keyword_boundary(lex.src, p, 2))
      p = lex.src.find("EI", p + 2);
    lex.pos = p == std::string_view::npos ? lex.src.size() : p + 2;
  }

  void run_content(std::string_view content) {
    Lexer lex{content, 0};
    std::vector<Object> operands;
    while (true) {
      lex.skip_ws();
      if (lex.eof()) break;
      char ch = lex.peek();
      if (ch == '(' || ch == '<' || ch == '[' || ch == '/' || ch == '+' || ch == '-' ||
          ch == '.' || std::isdigit(static_cast<unsigned char>(ch))) {
        try {
          operands.push_back(lex.parse_object());
        } catch (const ExtractionError&) {
          operands.clear();
          lex.read_keyword();
          if (lex.pos < lex.src.size() && is_pdf_delim(lex.peek())) ++lex.pos;
        }
        continue;
      }
      if (ch == ')' || ch == ']' || ch == '>' || ch == '{' || ch == '}') {
        ++lex.pos;
        continue;
      }
      std::string op = lex.read_keyword();
      if (op.empty()) {
        ++lex.pos;
        continue;
      }
      execute(op, operands, lex);
      operands.clear();
    }
  }

  double opnum(const std::vector<Object>& ops, size_t i) {
    return i < ops.size() && ops[i].kind == Object::Kind::Number ? ops[i].num : 0;
  }

  void execute(const std::string& op, std::vector<Object>& ops, Lexer& lex) {
    if (op == "q") {
      gs_stack.push_back(gs);
    } else if (op == "Q") {
      if (!gs_stack.empty()) {
        gs = gs_stack.back();
        gs_stack.pop_back();
      }
    } else if (op == "cm" && ops.size() >= 6) {
      Matrix m{opnum(ops, 0), opnum(ops, 1), opnum(ops, 2),
               opnum(ops, 3), opnum(ops, 4), opnum(ops, 5)};
      gs.ctm = m.mul(gs.ctm);
    } else if (op == "BT") {
      ts.tm = Matrix{};
      ts.tlm = Matrix{};
    } else if (op == "ET") {
      // nothing to finalize; runs were emitted eagerly
    } else if (op == "Tf" && ops.size() >= 2) {
      ts.font_size = opnum(ops, 1);
      ts.font = FontMetrics{};
      if (font_resources && ops[0].kind == Object::Kind::Name) {
        if (const Object* f = font_resources->find(ops[0].str)) {
          const Object& fd = doc.resolve(*f);
          if (fd.kind == Object::Kind::Dict) ts.font = load_font(doc, fd);
        }
      }
    } else if (op == "Td" && ops.size() >= 2) {
      next_line(opnum(ops, 0), opnum(ops, 1));
    } else if (op == "TD" && ops.size() >= 2) {
      ts.leading = -opnum(ops, 1);
      next_line(opnum(ops, 0), opnum(ops, 1));
    } else if (op == "Tm" && ops.size() >= 6) {
      ts.tlm = Matrix{opnum(ops, 0), opnum(ops, 1), opnum(ops, 2),
                      opnum(ops, 3), opnum(ops, 4), opnum(ops, 5)};
      ts.tm = ts.tlm;
    } else if (op == "T*") {
      next_line(0, -ts.leading);
    } else if (op == "TL" && !ops.empty()) {
      ts.leading = opnum(ops, 0);
    } else if (op == "Tc" && !ops.empty()) {
      ts.char_spacing = opnum(ops, 0);
    } else if (op == "Tw" && !ops.empty()) {
      ts.word_spacing = opnum(ops, 0);
    } else if (op == "Tz" && !ops.empty()) {
      ts.h_scale = opnum(ops, 0) / 100.0;
    } else if (op == "Tj" && !ops.empty()) {
      if (ops.back().kind == Object::Kind::String) show_string(ops.back().str);
    } else if (op == "TJ" && !ops.empty() && ops.back().kind == Object::Kind::Array) {
      for (const auto& e : ops.back().array) {
        if (e.kind == Object::Kind::String) {
          show_string(e.str);
        } else if (e.kind == Object::Kind::Number) {
          double shift = -e.num / 1000.0 * ts.font_size * ts.h_scale;
          ts.tm = Matrix::translate(shift, 0).mul(ts.tm);
          if (e.num < -200) {  // wide negative kern reads as a space
            if (!runs.empty() && runs.back().page == page_index) runs.back().text.push_back(' ');
          }
        }
      }
    } else if (op == "'" && !ops.empty()) {
      next_line(0, -ts.leading);
      if (ops.back().kind == Object::Kind::String) show_string(ops.back().str);
    } else if (op == "\"" && ops.size() >= 3) {
      ts.word_spacing = opnum(ops, 0);
      ts.char_spacing = opnum(ops, 1);
      next_line(0, -ts.leading);
      if (ops[2].kind == Object::Kind::String) show_string(ops[2].str);
    } else if (op == "BI") {
      skip_inline_image(lex);
    }
    // all other operators (paths, colors, XObjects) are ignored
  }
};

// ---------------------------------------------------------------------------
// Page tree
// ---------------------------------------------------------------------------

struct PageData {
  Object page_dict;
  std::array<double, 4> media_box = {0, 0, 612, 792};
  Object font_resources;  // Dict kind, possibly empty
};

inline void walk_pages(Document& doc, const Object& node, std::array<double, 4> media_box,
                       Object resources, std::vector<PageData>& out, int depth = 0) {
  if (depth > 64) throw ExtractionError("bad-object", "page tree too deep");
  const Object& n = doc.resolve(node);
  if (n.kind != Object::Kind::Dict) return;

  if (const Object* mb = n.find("MediaBox")) {
    const Object& arr = doc.resolve(*mb);
    if (arr.kind == Object::Kind::Array && arr.array.size() == 4) {
      for (size_t i = 0; i < 4; ++i) media_box[i] = doc.number(arr.array[i]);
    }
  }
  if (const Object* res = n.find("Resources")) {
    const Object& r = doc.resolve(*res);
    if (r.kind == Object::Kind::Dict) resources = r;
  }

  const Object* type = n.find("Type");
  if (type && type->is_name("Pages")) {
    if (const Object* kids = n.find("Kids")) {
      const Object& arr = doc.resolve(*kids);
      for (const auto& kid : arr.array) walk_pages(doc, kid, media_box, resources, out, depth + 1);
    }
    return;
  }
  // Treat anything else with /Contents or /Type /Page as a page.
  if ((type && type->is_name("Page")) || n.find("Contents")) {
    PageData pd;
    pd.page_dict = n;
    pd.media_box = media_box;
    if (const Object* fonts = resources.find("Font")) {
      const Object& f = doc.resolve(*fonts);
      if (f.kind == Object::Kind::Dict) pd.font_resources = f;
    }
    out.push_back(std::move(pd));
  }
}

inline std::vector<PageData> find_pages(Document& doc) {
  std::vector<PageData> pages;
  const Object* root_ref = doc.trailer.find("Root");
  Object root;
  if (root_ref) root = doc.resolve(*root_ref);
  if (root.kind != Object::Kind::Dict) {
    // No usable trailer: look for a catalog by type.
    for (const auto& [num, off] : doc.body_offset) {
      try {
        const Object& obj = doc.get(num);
        const Object* type = obj.find("Type");
        if (type && type->is_name("Catalog")) {
          root = obj;
          break;
        }
      } catch (const ExtractionError&) {
      }
    }
  }
  if (root.kind == Object::Kind::Dict) {
    if (const Object* pages_ref = root.find("Pages"))
      walk_pages(doc, *pages_ref, {0, 0, 612, 792}, Object{}, pages);
  }
  if (pages.empty()) {
    // Last resort: every /Type /Page object in numeric order.
    for (const auto& [num, off] : doc.body_offset) {
      try {
        const Object& obj = doc.get(num);
        const Object* type = obj.find("Type");
        if (type && type->is_name("Page"))
          walk_pages(doc, obj, {0, 0, 612, 792}, Object{}, pages);
      } catch (const ExtractionError&) {
      }
    }
  }
  return pages;
}

inline std::string page_content(Document& doc, const PageData& page) {
  const Object* contents = page.page_dict.find("Contents");
  if (!contents) return {};
  const Object& c = doc.resolve(*contents);
  std::string data;
  if (c.kind == Object::Kind::Array) {
    for (const auto& e : c.array) {
      const Object& s = doc.resolve(e);
      if (s.has_stream) {
        data += doc.decoded_stream(s);
        data += "\n";
      }
    }
  } else if (c.has_stream) {
    data = doc.decoded_stream(c);
  }
  return data;
}

// ---------------------------------------------------------------------------
// Line assembly
// ---------------------------------------------------------------------------

inline std::vector<LineBox> assemble_lines(std::vector<TextRun>& runs,
                                           const std::vector<PageGeom>& pages,
                                           const std::vector<std::array<double, 4>>& boxes) {
  std::stable_sort(runs.begin(), runs.end(), [](const TextRun& a, const TextRun& b) {
    if (a.page != b.page) return a.page < b.page;
    if (a.baseline != b.baseline) return a.baseline > b.baseline;  // PDF y grows upward
    return a.x0 < b.x0;
  });

  std::vector<LineBox> lines;
  size_t i = 0;
  while (i < runs.size()) {
    size_t j = i + 1;
    double size = std::max(1.0, runs[i].size);
    while (j < runs.size() && runs[j].page == runs[i].page &&
           std::abs(runs[j].baseline - runs[i].baseline) <= 0.25 * size) {
      size = std::max(size, runs[j].size);
      ++j;
    }
    // Within a group the baseline sort may disagree with reading order,
    // so re-sort the members by x before concatenating.
    std::vector<size_t> members;
    for (size_t k = i; k < j; ++k) members.push_back(k);
    std::stable_sort(members.begin(), members.end(),
                     [&](size_t a, size_t b) { return runs[a].x0 < runs[b].x0; });
    std::string text = runs[members[0]].text;
    double x0 = runs[members[0]].x0, x1 = runs[members[0]].x1;
    for (size_t m = 1; m < members.size(); ++m) {
      const TextRun& run = runs[members[m]];
      double gap = run.x0 - x1;
      if (gap > 0.25 * size && !text.empty() && text.back() != ' ') text.push_back(' ');
      text += run.text;
      x0 = std::min(x0, run.x0);
      x1 = std::max(x1, run.x1);
    }

    const auto& box = boxes[static_cast<size_t>(runs[i].page)];
    const auto& geom = pages[static_cast<size_t>(runs[i].page)];
    double top_up = runs[i].baseline + kAscentEm * size;
    double bottom_up = runs[i].baseline - kDescentEm * size;
    LineBox line;
    line.text = std::move(text);
    line.page = runs[i].page;
    line.x0 = x0 - box[0];
    line.x1 = x1 - box[0];
    line.y0 = geom.height - (top_up - box[1]);
    line.y1 = geom.height - (bottom_up - box[1]);
    lines.push_back(std::move(line));
    i = j;
  }
  return lines;
}

}  // namespace detail

/// Extracts positioned text lines from a PDF byte string.
/// Throws ExtractionError with category "not-pdf", "truncated",
/// "encrypted", "bad-object" or "unsupported-filter".
inline ExtractedText extract_text(std::string_view bytes) {
  if (bytes.substr(0, 1024).find("%PDF-") == std::string_view::npos)
    throw ExtractionError("not-pdf", "missing %PDF header");
  size_t tail_start = bytes.size() > 1024 ? bytes.size() - 1024 : 0;
  if (bytes.substr(tail_start).find("%%EOF") == std::string_view::npos)
    throw ExtractionError("truncated", "missing %%EOF marker");

  detail::Document doc;
  doc.bytes = bytes;
  detail::scan_objects(doc);
  if (doc.body_offset.empty()) throw ExtractionError("bad-object", "no objects found");
  detail::collect_trailer(doc);
  if (doc.trailer.find("Encrypt"))
    throw ExtractionError("encrypted", "encrypted documents are not supported");
  detail::expand_object_streams(doc);

  std::vector<detail::PageData> pages = detail::find_pages(doc);

  ExtractedText out;
  std::vector<detail::TextRun> runs;
  std::vector<std::array<double, 4>> boxes;
  for (size_t p = 0; p < pages.size(); ++p) {
    const auto& mb = pages[p].media_box;
    out.pages.push_back({mb[2] - mb[0], mb[3] - mb[1]});
    boxes.push_back(mb);
    std::string content = detail::page_content(doc, pages[p]);
    detail::ContentInterpreter interp{doc,
                                      pages[p].font_resources.kind == detail::Object::Kind::Dict
                                          ? &pages[p].font_resources
                                          : nullptr,
                                      static_cast<int>(p), runs};
    interp.run_content(content);
  }
  out.lines = detail::assemble_lines(runs, out.pages, boxes);
  return out;
}

}  // namespace crawldoc::pdf
