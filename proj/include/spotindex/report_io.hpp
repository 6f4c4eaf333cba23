#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "spotindex/simulator.hpp"

namespace spotindex {

std::string tool_version();

JobSpec parse_job(std::istream& in, const std::string& source = "<job>");
JobSpec load_job(const std::filesystem::path& path);
std::string job_to_json(const JobSpec& job, int indent = 2);

SimConfig parse_sim_config(std::istream& in, const std::string& source = "<config>");
std::string sim_config_to_json(const SimConfig& config, int indent = 2);

/// Full report with a config echo (job, simulation config, seed, tool
/// version, plus the command line when given). Keys are sorted, so identical
/// runs serialize byte-identically.
std::string report_to_json(const SimReport& report, const JobSpec& job, const SimConfig& config, int indent = 2,
                           const std::string& cli_echo_json = {});

/// Summary, events, billing and per-task data. The echo block is kept as raw JSON text.
struct LoadedReport {
  SimReport report;
  std::string echo_json;
};

LoadedReport parse_report(std::istream& in, const std::string& source = "<report>");
LoadedReport load_report(const std::filesystem::path& path);

void write_events_jsonl(std::ostream& out, const SimReport& report);
void write_billing_csv(std::ostream& out, const SimReport& report);

}  // namespace spotindex
