#include "stinger/error.hpp"

namespace stinger {

ParseError::ParseError(const std::string& what, std::size_t row)
    : ValidationError(what + " (row " + std::to_string(row) + ")"), row_(row) {}

TrainingDivergence::TrainingDivergence(const std::string& what, int epoch)
    : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

}  // namespace stinger
