#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "mpr/density.hpp"
#include "mpr/riccati.hpp"
#include "mpr/voi.hpp"

namespace mpr {

/// t, A, B, C per node.
void write_riccati_csv(std::ostream& out, const RiccatiSolution& sol);

/// t, A, B, C, R, Q per node (partial-information bundle).
void write_riccati_csv(std::ostream& out, const RiccatiSolution& sol, const FilterVariance& fv,
                       const QPath& q);

/// t, pi, R, dI (dI empty on the last row).
void write_filter_csv(std::ostream& out, const struct FilterPath& path);

/// w, pdf, cdf.
void write_density_csv(std::ostream& out, const WealthDistribution& dist);

/// gamma, mean, std, admissible, flag.
void write_frontier_csv(std::ostream& out, std::span<const FrontierPoint> points);

/// axis, V^I, V^D, ratio, CE columns, ingredients, flags.
void write_voi_csv(std::ostream& out, const char* axis_name,
                   std::span<const InfoValueReport> reports);

/// FNV-1a 64-bit checksum, used by the CLI output manifests.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace mpr
