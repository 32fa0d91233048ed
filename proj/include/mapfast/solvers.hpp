#pragma once

#include <array>
#include <string>
#include <string_view>

#include "mapfast/budget.hpp"
#include "mapfast/cbs.hpp"
#include "mapfast/oracle.hpp"
#include "mapfast/sat_mapf.hpp"

namespace mapfast {

// Portfolio members, in label order.
enum class Algorithm { Cbs = 0, Cbsh = 1, Sat = 2 };

inline constexpr int kPortfolioSize = 3;
inline constexpr std::array<Algorithm, kPortfolioSize> kPortfolio{Algorithm::Cbs, Algorithm::Cbsh, Algorithm::Sat};

std::string algorithm_name(Algorithm a);
std::string algorithm_name(int index);
// Throws std::invalid_argument for names outside the portfolio.
Algorithm algorithm_from_name(std::string_view name);

SolveResult solve(Algorithm algorithm, const MapfInstance& instance, double budget_seconds,
                  ClockKind clock = ClockKind::Wall, const SatOptions& sat_options = {});

}  // namespace mapfast
