#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace polygauss {

/// Minimal streaming JSON writer.  Keys keep insertion order and doubles are
/// printed with 17 significant digits, so equal inputs produce byte-identical
/// reports that round-trip exactly.
class JsonWriter {
 public:
  JsonWriter& begin_object() {
    prepare_value();
    out_ += '{';
    stack_.push_back('o');
    fresh_ = true;
    return *this;
  }
  JsonWriter& end_object() {
    stack_.pop_back();
    out_ += '}';
    fresh_ = false;
    return *this;
  }
  JsonWriter& begin_array() {
    prepare_value();
    out_ += '[';
    stack_.push_back('a');
    fresh_ = true;
    return *this;
  }
  JsonWriter& end_array() {
    stack_.pop_back();
    out_ += ']';
    fresh_ = false;
    return *this;
  }

  JsonWriter& key(std::string_view k) {
    if (!fresh_) out_ += ',';
    fresh_ = false;
    append_string(k);
    out_ += ':';
    pending_key_ = true;
    return *this;
  }

  JsonWriter& value(double v) {
    if (!std::isfinite(v)) throw std::logic_error("non-finite value in report");
    prepare_value();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out_ += buf;
    return *this;
  }
  JsonWriter& value(long long v) {
    prepare_value();
    out_ += std::to_string(v);
    return *this;
  }
  JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
  JsonWriter& value(bool v) {
    prepare_value();
    out_ += v ? "true" : "false";
    return *this;
  }
  JsonWriter& value(std::string_view s) {
    prepare_value();
    append_string(s);
    return *this;
  }
  JsonWriter& null() {
    prepare_value();
    out_ += "null";
    return *this;
  }
  /// Splices an already-serialized JSON document in value position.
  JsonWriter& raw_value(std::string_view json_text) {
    prepare_value();
    out_ += json_text;
    return *this;
  }

  const std::string& str() const { return out_; }

 private:
  void prepare_value() {
    if (pending_key_) {
      pending_key_ = false;
      return;
    }
    if (!stack_.empty() && stack_.back() == 'a' && !fresh_) out_ += ',';
    fresh_ = false;
  }

  void append_string(std::string_view s) {
    out_ += '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        case '\r': out_ += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  std::vector<char> stack_;
  bool fresh_ = true;
  bool pending_key_ = false;
};

}  // namespace polygauss
