#pragma once

#include <stdexcept>
#include <string>

namespace igpk {

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotSpd : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DegenerateData : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DegenerateRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonFiniteTrajectory : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace igpk
