#pragma once

#include <stdexcept>
#include <string>

namespace tw {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// chem
struct UnsupportedToken : Error { using Error::Error; };
struct UnbalancedParens : Error { using Error::Error; };
struct ValenceExceeded : Error { using Error::Error; };

// geometry
struct DisconnectedGraph : Error { using Error::Error; };
struct DegenerateGeometry : Error { using Error::Error; };

// metrics
struct LengthMismatch : Error { using Error::Error; };

// env
struct NonFiniteEnergy : Error { using Error::Error; };

// search
struct BudgetRefused : Error { using Error::Error; };

// theory
struct OptimumEscapedSpace : Error { using Error::Error; };

// cli / config
struct ConfigError : Error { using Error::Error; };

}  // namespace tw
