#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fairbv/harness.hpp"
#include "json.hpp"

namespace fairbv {

enum class ReportFormat { Json, Csv, Markdown };
ReportFormat report_format_from(const std::string& s);

// Dataset files: header `distance,is_genuine,group_a,group_b`.
ScoreDataset parse_dataset(std::istream& in);
ScoreDataset load_dataset(const std::filesystem::path& path);
std::string serialize_dataset(const ScoreDataset& ds);
void save_dataset(const ScoreDataset& ds, const std::filesystem::path& path);

SuiteDefinition suite_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SuiteDefinition& def);
SuiteDefinition load_suite(const std::filesystem::path& path);
// A bare name resolves to <dir>/<name>.json; anything else is a path.
SuiteDefinition resolve_suite(const std::string& name_or_path, const std::filesystem::path& dir);

nlohmann::json to_json(const ReportRow& row);
ReportRow row_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SuiteResult& r);
SuiteResult suite_result_from_json(const nlohmann::json& j);
SuiteResult load_suite_result(const std::filesystem::path& path);

std::string render_report(const SuiteResult& r, ReportFormat f);
void save_report(const SuiteResult& r, ReportFormat f, const std::filesystem::path& path);

// Writes to a sibling temp file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace fairbv
