#pragma once

#include <iosfwd>
#include <string>

#include "asgd/optimizers.hpp"

namespace asgd {

/// Writes one row per record. The first nine columns are fixed:
/// k, h, t, f_gap, E_sc, E_ac_c, x_norm_to_opt, v_norm_to_opt, noise_norm;
/// then E_gd_c, E_gd_sc, clamped, and x_i, v_i, e_i when vectors are present.
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::string& path, const Trace& trace);

/// Reads a CSV produced by write_trace_csv. Metadata is not stored in the
/// CSV and is left default.
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::string& path);

/// %.17g formatting; non-finite values print as nan / inf / -inf.
std::string format_double(double value);

}  // namespace asgd
