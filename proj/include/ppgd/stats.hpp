#pragma once

#include <span>

namespace ppgd {

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7, the R default). q in [0, 1]; input need not be sorted.
double quantile(std::span<const double> values, double q);

double median(std::span<const double> values);

/// 75th minus 25th percentile, type 7.
double iqr(std::span<const double> values);

}  // namespace ppgd
