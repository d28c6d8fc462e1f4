#pragma once

#include "ppgd/ppnet.hpp"

/// Serial reference kernels written directly from the defining formulas:
/// no caching, no OpenMP, sigma' evaluated as sigma * (1 - sigma). Kept for
/// testing and benchmarking the production kernels in ppnet.hpp.
namespace ppgd::reference {

double forward(const NetworkParams& params, std::span<const double> x);

RiskBreakdown penalized_risk(const NetworkParams& params, const DataSet& data, double c1);

NetworkParams gradient(const NetworkParams& params, const DataSet& data, double c1);

}  // namespace ppgd::reference
