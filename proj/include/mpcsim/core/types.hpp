#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace mpcsim {

using Vertex = std::uint32_t;
using Word = std::uint64_t;
using MachineId = std::uint32_t;

inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

struct Edge {
    Vertex u = 0;
    Vertex v = 0;

    constexpr Edge() = default;
    constexpr Edge(Vertex a, Vertex b) : u(a < b ? a : b), v(a < b ? b : a) {}

    friend constexpr auto operator<=>(const Edge&, const Edge&) = default;

    [[nodiscard]] constexpr Vertex other(Vertex x) const { return x == u ? v : u; }
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class ArgumentError : public Error {
  public:
    using Error::Error;
};

class CapacityError : public Error {
  public:
    using Error::Error;
};

// Anything that falsifies a space or shape claim at run time.
class Fault : public Error {
  public:
    using Error::Error;
};

enum class Cap : std::uint8_t { space, send, receive };

inline const char* cap_name(Cap c) {
    switch (c) {
        case Cap::space: return "space";
        case Cap::send: return "send";
        case Cap::receive: return "receive";
    }
    return "?";
}

class SimulationFault : public Fault {
  public:
    SimulationFault(MachineId machine, Cap cap, std::size_t limit, std::size_t observed, const std::string& detail = {})
        : Fault("machine " + std::to_string(machine) + " exceeded " + cap_name(cap) + " cap " +
                std::to_string(limit) + " (observed " + std::to_string(observed) + " words)" +
                (detail.empty() ? std::string() : "; " + detail)),
          machine_(machine), cap_(cap), limit_(limit), observed_(observed) {}

    [[nodiscard]] MachineId machine() const { return machine_; }
    [[nodiscard]] Cap cap() const { return cap_; }
    [[nodiscard]] std::size_t limit() const { return limit_; }
    [[nodiscard]] std::size_t observed() const { return observed_; }

  private:
    MachineId machine_;
    Cap cap_;
    std::size_t limit_;
    std::size_t observed_;
};

class BallOverflow : public Fault {
  public:
    BallOverflow(Vertex center, std::size_t budget, std::size_t observed)
        : Fault("ball of center " + std::to_string(center) + " exceeds budget " +
                std::to_string(budget) + " (observed " + std::to_string(observed) + " words)"),
          center_(center), budget_(budget), observed_(observed) {}

    [[nodiscard]] Vertex center() const { return center_; }
    [[nodiscard]] std::size_t budget() const { return budget_; }
    [[nodiscard]] std::size_t observed() const { return observed_; }

  private:
    Vertex center_;
    std::size_t budget_;
    std::size_t observed_;
};

class RuleViolation : public Fault {
  public:
    using Fault::Fault;
};

}  // namespace mpcsim
