#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcb {

using cplx = std::complex<double>;

// Transverse point. Only the first `dim` components are meaningful, the rest
// stay zero so squared norms work for d = 1 without branching.
using Point = std::array<double, 2>;

inline double norm2(const Point& p) { return p[0] * p[0] + p[1] * p[1]; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }
inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

enum class ErrorKind { config, numeric, range };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void config_error(const std::string& msg) { throw Error(ErrorKind::config, msg); }
[[noreturn]] inline void numeric_error(const std::string& msg) { throw Error(ErrorKind::numeric, msg); }
[[noreturn]] inline void range_error(const std::string& msg)
{
    throw Error(ErrorKind::range, "out of implemented range: " + msg);
}

// Process-wide warning sink. Messages are deduplicated and echoed to the
// registered handler (stderr by default).
void warn(const std::string& msg);
std::vector<std::string> warnings();
void clear_warnings();
using WarningHandler = void (*)(const char*, void*);
void set_warning_handler(WarningHandler handler, void* user);

} // namespace pcb
