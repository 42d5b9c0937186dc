// Minimal stand-in for pvpython used by the tests.
//
// Understands a line-oriented subset of Python:
//   from/import lines, comments, print('...'),
//   name = Call(...), Call(...), name.Attr = value, name.Method(...),
//   name = <literal>, raise Cls('msg'), sys.exit(n), time.sleep(s).
// Calls to functions outside a fixed paraview.simple list raise NameError,
// attribute names starting with a lowercase letter raise AttributeError,
// anything unparsable raises SyntaxError. Errors are reported as Python
// tracebacks on stderr with exit status 1.
//
// SaveScreenshot('name.png', ImageResolution=[w, h]) writes a PNG whose
// pixels are a pure function of the statements executed so far, so the
// same script always renders the same image.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

const std::set<std::string> kKnownCalls = {
    "Sphere", "Cone", "Cylinder", "Box", "Plane", "Wavelet", "Contour", "Clip", "Slice", "Tube", "Glyph",
    "StreamTracer", "Calculator", "Threshold", "ExtractSurface", "Delaunay2D", "WarpByScalar", "Shrink",
    "OpenDataFile", "LegacyVTKReader", "XMLImageDataReader", "Show", "Hide", "Render", "ResetCamera",
    "GetActiveView", "GetActiveViewOrCreate", "GetActiveCamera", "CreateView", "SetActiveSource",
    "GetActiveSource", "ColorBy", "GetColorTransferFunction", "GetOpacityTransferFunction",
    "GetDisplayProperties", "Delete", "SaveScreenshot", "UpdatePipeline", "GetAnimationScene", "Text",
    "GetScalarBar", "HideScalarBarIfNotNeeded", "LoadPalette"};

struct Failure {
    int line;
    std::string error_class;
    std::string message;
};

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string first_string_literal(const std::string& args) {
    static const std::regex lit(R"re(['"]([^'"]*)['"])re");
    std::smatch m;
    if (std::regex_search(args, m, lit)) return m[1].str();
    return "";
}

bool write_image(const std::string& path, int w, int h, std::uint64_t seed) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
    const std::uint8_t bg[3] = {static_cast<std::uint8_t>(seed & 0xff), static_cast<std::uint8_t>((seed >> 8) & 0xff),
                                static_cast<std::uint8_t>((seed >> 16) & 0xff)};
    const double cx = w * (0.3 + 0.4 * ((seed >> 24) & 0xff) / 255.0);
    const double cy = h * (0.3 + 0.4 * ((seed >> 32) & 0xff) / 255.0);
    const double r = std::min(w, h) * (0.15 + 0.2 * ((seed >> 40) & 0xff) / 255.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto* p = &px[(static_cast<std::size_t>(y) * w + x) * 3];
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= r * r) {
                p[0] = static_cast<std::uint8_t>(255 - bg[0]);
                p[1] = static_cast<std::uint8_t>((x * 255) / std::max(w - 1, 1));
                p[2] = static_cast<std::uint8_t>((y * 255) / std::max(h - 1, 1));
            } else {
                p[0] = bg[0];
                p[1] = bg[1];
                p[2] = static_cast<std::uint8_t>(bg[2] ^ ((x / 4 + y / 4) % 2 ? 0x20 : 0));
            }
        }
    }
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = PNG_FORMAT_RGB;
    return png_image_write_to_file(&img, path.c_str(), 0, px.data(), 0, nullptr) != 0;
}

class Interpreter {
public:
    explicit Interpreter(std::string script_path) : script_path_(std::move(script_path)) {}

    // Returns the process exit status.
    int run(const std::vector<std::string>& lines) {
        lines_ = lines;
        try {
            for (std::size_t i = 0; i < lines.size(); ++i) {
                std::string stmt = lines[i];
                const int first_line = static_cast<int>(i) + 1;
                // Join continuation lines while brackets are open.
                int depth = bracket_depth(stmt);
                while (depth > 0 && i + 1 < lines.size()) {
                    stmt += " " + trim(lines[++i]);
                    depth = bracket_depth(stmt);
                }
                if (exit_requested_) break;
                execute(trim(strip_comment(stmt)), first_line);
                if (exit_requested_) break;
            }
        } catch (const Failure& f) {
            report(f);
            return 1;
        }
        return exit_code_;
    }

private:
    static std::string strip_comment(const std::string& s) {
        bool in_s = false, in_d = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            char c = s[i];
            if (c == '\'' && !in_d) in_s = !in_s;
            else if (c == '"' && !in_s) in_d = !in_d;
            else if (c == '#' && !in_s && !in_d) return s.substr(0, i);
        }
        return s;
    }

    static int bracket_depth(const std::string& s) {
        int depth = 0;
        bool in_s = false, in_d = false;
        for (char c : s) {
            if (c == '\'' && !in_d) in_s = !in_s;
            else if (c == '"' && !in_s) in_d = !in_d;
            else if (!in_s && !in_d) {
                if (c == '(' || c == '[' || c == '{') ++depth;
                if (c == ')' || c == ']' || c == '}') --depth;
            }
        }
        return depth;
    }

    void report(const Failure& f) {
        std::cerr << "Traceback (most recent call last):\n";
        std::cerr << "  File \"" << script_path_ << "\", line " << f.line << ", in <module>\n";
        if (f.line >= 1 && f.line <= static_cast<int>(lines_.size()))
            std::cerr << "    " << trim(lines_[static_cast<std::size_t>(f.line) - 1]) << "\n";
        std::cerr << f.error_class << ": " << f.message << "\n";
    }

    void check_nested_calls(const std::string& args, int line) {
        static const std::regex call(R"(([A-Za-z_][A-Za-z0-9_]*)\s*\()");
        // Skip calls inside string literals by blanking them first.
        std::string clean = args;
        bool in_s = false, in_d = false;
        for (char& c : clean) {
            if (c == '\'' && !in_d) in_s = !in_s;
            else if (c == '"' && !in_s) in_d = !in_d;
            else if (in_s || in_d) c = ' ';
        }
        for (std::sregex_iterator it(clean.begin(), clean.end(), call), end; it != end; ++it) {
            const auto name = (*it)[1].str();
            if (!kKnownCalls.count(name) && !vars_.count(name))
                throw Failure{line, "NameError", "name '" + name + "' is not defined"};
        }
    }

    void call(const std::string& fn, const std::string& args, int line) {
        if (!kKnownCalls.count(fn)) throw Failure{line, "NameError", "name '" + fn + "' is not defined"};
        check_nested_calls(args, line);
        if (fn == "OpenDataFile" || fn == "LegacyVTKReader" || fn == "XMLImageDataReader") {
            auto file = first_string_literal(args);
            std::ifstream probe(file);
            if (file.empty() || !probe)
                throw Failure{line, "FileNotFoundError", "[Errno 2] No such file or directory: '" + file + "'"};
        }
        if (fn == "SaveScreenshot") {
            auto file = first_string_literal(args);
            if (file.empty()) throw Failure{line, "TypeError", "SaveScreenshot() missing required argument 'filename'"};
            int w = 64, h = 48;
            static const std::regex res(R"(ImageResolution\s*=\s*\[\s*(\d+)\s*,\s*(\d+)\s*\])");
            std::smatch m;
            if (std::regex_search(args, m, res)) {
                w = std::stoi(m[1].str());
                h = std::stoi(m[2].str());
            }
            if (w <= 0 || h <= 0 || w > 4096 || h > 4096)
                throw Failure{line, "ValueError", "invalid ImageResolution"};
            if (!write_image(file, w, h, state_)) throw Failure{line, "RuntimeError", "could not write " + file};
        }
    }

    // chain is ".A.B.C"; every attribute must be CamelCase.
    void check_attribute(const std::string& obj, const std::string& chain, int line) {
        if (!vars_.count(obj)) throw Failure{line, "NameError", "name '" + obj + "' is not defined"};
        std::stringstream parts(chain.substr(1));
        for (std::string attr; std::getline(parts, attr, '.');) {
            if (attr.empty() || !std::isupper(static_cast<unsigned char>(attr[0])))
                throw Failure{line, "AttributeError", "'Proxy' object has no attribute '" + attr + "'"};
        }
    }

    void execute(const std::string& stmt, int line) {
        if (stmt.empty()) return;
        state_ = fnv1a(stmt, fnv1a("\n", state_));

        static const std::regex import_re(R"(^(from\s+[\w.]+\s+import\s+.+|import\s+[\w.,\s]+)$)");
        static const std::regex print_re(R"(^print\((.*)\)$)");
        static const std::regex exit_re(R"(^sys\.exit\(\s*(-?\d*)\s*\)$)");
        static const std::regex sleep_re(R"(^(?:time\.)?sleep\(\s*([0-9.]+)\s*\)$)");
        static const std::regex raise_re(R"(^raise\s+([A-Za-z_]\w*)\s*(?:\((.*)\))?$)");
        static const std::regex assign_call_re(R"(^([A-Za-z_]\w*)\s*=\s*([A-Za-z_]\w*)\s*\((.*)\)$)");
        static const std::regex call_re(R"(^([A-Za-z_]\w*)\s*\((.*)\)$)");
        static const std::regex attr_set_re(R"(^([A-Za-z_]\w*)((?:\.[A-Za-z_]\w*)+)\s*=\s*(.+)$)");
        static const std::regex method_re(
            R"(^(?:([A-Za-z_]\w*)\s*=\s*)?([A-Za-z_]\w*)((?:\.[A-Za-z_]\w*)+)\s*\((.*)\)$)");
        static const std::regex assign_re(R"(^([A-Za-z_]\w*)\s*=\s*(.+)$)");

        std::smatch m;
        if (std::regex_match(stmt, import_re)) return;
        if (std::regex_match(stmt, m, exit_re)) {
            exit_code_ = m[1].str().empty() ? 0 : std::stoi(m[1].str());
            exit_requested_ = true;
            return;
        }
        if (std::regex_match(stmt, m, sleep_re)) {
            std::this_thread::sleep_for(std::chrono::duration<double>(std::stod(m[1].str())));
            return;
        }
        if (std::regex_match(stmt, m, print_re)) {
            auto lit = first_string_literal(m[1].str());
            std::cout << (lit.empty() ? trim(m[1].str()) : lit) << std::endl;
            return;
        }
        if (std::regex_match(stmt, m, raise_re))
            throw Failure{line, m[1].str(), first_string_literal(m[2].str())};
        if (std::regex_match(stmt, m, method_re)) {
            check_attribute(m[2].str(), m[3].str(), line);
            check_nested_calls(m[4].str(), line);
            if (m[1].matched) vars_.insert(m[1].str());
            return;
        }
        if (std::regex_match(stmt, m, assign_call_re)) {
            call(m[2].str(), m[3].str(), line);
            vars_.insert(m[1].str());
            return;
        }
        if (std::regex_match(stmt, m, call_re)) {
            call(m[1].str(), m[2].str(), line);
            return;
        }
        if (std::regex_match(stmt, m, attr_set_re)) {
            check_attribute(m[1].str(), m[2].str(), line);
            check_nested_calls(m[3].str(), line);
            return;
        }
        if (std::regex_match(stmt, m, assign_re)) {
            check_nested_calls(m[2].str(), line);
            vars_.insert(m[1].str());
            return;
        }
        throw Failure{line, "SyntaxError", "invalid syntax"};
    }

    std::string script_path_;
    std::vector<std::string> lines_;
    std::set<std::string> vars_;
    std::uint64_t state_ = 1469598103934665603ULL;
    int exit_code_ = 0;
    bool exit_requested_ = false;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: fake_pvpython script.py\n";
        return 2;
    }
    std::ifstream in(argv[1], std::ios::binary);
    if (!in) {
        std::cerr << "fake_pvpython: can't open file '" << argv[1] << "'\n";
        return 2;
    }
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    return Interpreter(argv[1]).run(lines);
}
