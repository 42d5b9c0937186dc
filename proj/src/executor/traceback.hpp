#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chatvis::executor {

struct SourceLocation {
    std::string file;
    int line = 0;
    friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
};

// One interpreter error block, from the first `File "..."` line through the
// line naming the error class.
struct TracebackRecord {
    std::vector<std::string> lines;  // verbatim
    std::string error_class;
    std::string error_message;
    std::vector<SourceLocation> locations;

    std::string text() const;  // lines joined by '\n'
    friend bool operator==(const TracebackRecord&, const TracebackRecord&) = default;
};

inline constexpr const char* kUnknownErrorClass = "UnknownError";

// Scans line by line. A line containing File followed by a quoted path opens a
// record; every following line is collected until one starting with
// <identifier>Error or <identifier>Exception, which closes it. A record still
// open at end of input gets error class UnknownError. Total: never throws.
std::vector<TracebackRecord> extract_tracebacks(std::string_view output);

bool is_file_line(std::string_view line);

}  // namespace chatvis::executor
