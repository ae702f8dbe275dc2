#include "report.hpp"

#include <cmath>
#include <cstdio>

namespace ahy {

namespace {

void escape(const std::string& s, std::string& out) {
    out += '"';
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    out += '"';
}

void dump(const Json& j, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string closePad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                escape(it.key(), out);
                out += ": ";
                dump(it.value(), indent, depth + 1, out);
            }
            out += "\n" + closePad + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                dump(j[i], indent, depth + 1, out);
            }
            out += "\n" + closePad + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double d = j.get<double>();
            if (!std::isfinite(d)) {
                out += "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", d);
            out += buf;
            return;
        }
        case Json::value_t::string:
            escape(j.get<std::string>(), out);
            return;
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dumpJson(const Json& j, int indent) {
    std::string out;
    dump(j, indent, 0, out);
    out += "\n";
    return out;
}

}  // namespace ahy
