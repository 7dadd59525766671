#pragma once

#include <cmath>
#include <numbers>

namespace ezfsched {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// Rates are kept in nats internally; bits are presentation only.
inline double nats_to_bits(double nats) { return nats / std::numbers::ln2; }

}  // namespace ezfsched
