#ifndef NSV_ERRORS_HPP
#define NSV_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsv {

// Base class for all toolkit errors. CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number of the offending line.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + message), line_(line)
    {
    }

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Invalid experiment/property configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// External verifier adapter violated the query/verdict protocol.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Detector generation ran out of candidates or attempts before reaching N.
class DetectorShortfall : public Error {
public:
    DetectorShortfall(const std::string& message, std::size_t found)
        : Error(message), found_(found)
    {
    }

    // Number of detectors collected before the generator gave up.
    std::size_t found() const { return found_; }

private:
    std::size_t found_;
};

} // namespace nsv

#endif
