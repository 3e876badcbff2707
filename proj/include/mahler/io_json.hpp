#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace mahler {

// Floating output at 17 significant digits so emitted records reproduce
// bit-for-bit across runs.
inline std::string fmt17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Minimal flat JSON object builder (keys are emitted in insertion order).
class JsonWriter {
  public:
    JsonWriter& field(const std::string& key, double v) { return raw(key, fmt17(v)); }
    JsonWriter& field(const std::string& key, int v) { return raw(key, std::to_string(v)); }
    JsonWriter& field(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
    JsonWriter& field(const std::string& key, const std::string& v) {
        std::string esc = "\"";
        for (char c : v) {
            if (c == '"' || c == '\\') esc += '\\';
            esc += c;
        }
        esc += '"';
        return raw(key, esc);
    }
    JsonWriter& field_array(const std::string& key, const std::vector<double>& vs) {
        std::string arr = "[";
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (i) arr += ",";
            arr += fmt17(vs[i]);
        }
        arr += "]";
        return raw(key, arr);
    }
    JsonWriter& raw(const std::string& key, const std::string& value) {
        if (!body_.empty()) body_ += ",";
        body_ += "\"" + key + "\":" + value;
        return *this;
    }
    std::string str() const { return "{" + body_ + "}"; }

  private:
    std::string body_;
};

}  // namespace mahler
