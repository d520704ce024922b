#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace ffmct {

enum class ErrorKind {
    invalid_argument,  // bad shapes, bad config values, precondition violations
    runtime,           // numeric failures, divergence, internal inconsistencies
    io,                // file system problems
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

namespace detail {

template <typename... Parts>
std::string cat(Parts&&... parts) {
    std::ostringstream oss;
    (oss << ... << parts);
    return oss.str();
}

}  // namespace detail

template <typename... Parts>
[[noreturn]] void fail(ErrorKind kind, Parts&&... parts) {
    throw Error(kind, detail::cat(std::forward<Parts>(parts)...));
}

}  // namespace ffmct

#define FFMCT_CHECK_ARG(cond, ...)                                                 \
    do {                                                                           \
        if (!(cond)) ::ffmct::fail(::ffmct::ErrorKind::invalid_argument, __VA_ARGS__); \
    } while (0)

#define FFMCT_CHECK_RUNTIME(cond, ...)                                      \
    do {                                                                    \
        if (!(cond)) ::ffmct::fail(::ffmct::ErrorKind::runtime, __VA_ARGS__); \
    } while (0)

#define FFMCT_CHECK_IO(cond, ...)                                      \
    do {                                                               \
        if (!(cond)) ::ffmct::fail(::ffmct::ErrorKind::io, __VA_ARGS__); \
    } while (0)
