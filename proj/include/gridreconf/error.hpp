#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gridreconf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based; `field` names the column or key.
class ParseError : public Error {
public:
    ParseError(int line, std::string field, const std::string& message)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + message),
          line_(line), field_(std::move(field)) {}

    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

class NotRadial : public Error {
public:
    using Error::Error;
};

class SingularBranch : public Error {
public:
    explicit SingularBranch(int branch_id)
        : Error("branch " + std::to_string(branch_id) + " has zero impedance"), branch_id_(branch_id) {}
    int branch_id() const noexcept { return branch_id_; }

private:
    int branch_id_;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

class NotConverged : public Error {
public:
    NotConverged(int island_root, const std::string& message)
        : Error(message), island_root_(island_root) {}
    int island_root() const noexcept { return island_root_; }

private:
    int island_root_;
};

class Unreachable : public Error {
public:
    explicit Unreachable(std::vector<int> bus_ids);
    const std::vector<int>& bus_ids() const noexcept { return bus_ids_; }

private:
    std::vector<int> bus_ids_;
};

class InitialInfeasible : public Error {
public:
    using Error::Error;
};

}  // namespace gridreconf
