#pragma once

#include "config.hpp"
#include "output.hpp"

#include <string>
#include <vector>

namespace pcb {

// Tabulates S_T, chi / E[I]^2 and E[I] over the sweep. For the kinetic regime
// chi / E[I]^2 is reported as (S_0 - 1) / 2 with S_0 the instantaneous index,
// which is the same quantity in the diffusive case.
std::vector<CurveRow> compute_curve(const MediumSpec& medium, const SourceSpec& source, double k0,
                                    const AnalyticSpec& spec);

// Subcommand bodies. Output paths are checked before any computation; the
// curve commands also write a plot next to the CSV (same stem, .svg).
void cmd_analytic(const RunConfig& config, const std::string& out_csv);
void cmd_figure(const RunConfig& config, const std::string& out_csv);
// Returns the experiment so the caller can apply the acceptance rule.
ExperimentResult cmd_mc(const RunConfig& config, const std::string& out_csv);

} // namespace pcb
