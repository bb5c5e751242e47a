#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrho/core.hpp"
#include "lrho/features.hpp"
#include "lrho/learn.hpp"
#include "lrho/mlp.hpp"

namespace lrho {

struct IoError : Error {
  using Error::Error;
};

// Instances, solutions and models are pretty-printed JSON documents. Writing is deterministic, so
// write -> read -> write reproduces the same bytes.
std::string instance_to_text(const FjspInstance& inst);
FjspInstance instance_from_text(const std::string& text);
void save_instance(const std::filesystem::path& path, const FjspInstance& inst);
FjspInstance load_instance(const std::filesystem::path& path);

std::string solution_to_text(const Solution& sol);
Solution solution_from_text(const std::string& text);
void save_solution(const std::filesystem::path& path, const Solution& sol);
Solution load_solution(const std::filesystem::path& path);

std::string model_to_text(const MlpModel& model);
MlpModel model_from_text(const std::string& text);
void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);

// Datasets are JSON lines: a schema line naming the variant and feature columns, then one record per line.
struct Dataset {
  FeatureVariant variant = FeatureVariant::Makespan;
  std::vector<StateRecord> records;
};
void write_dataset(std::ostream& out, FeatureVariant variant, const std::vector<StateRecord>& records);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, FeatureVariant variant, const std::vector<StateRecord>& records);
Dataset load_dataset(const std::filesystem::path& path);

// Minimal CSV: header plus rows, fields quoted only when needed.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};
std::string csv_to_text(const CsvTable& table);
CsvTable csv_from_text(const std::string& text);
void save_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable load_csv(const std::filesystem::path& path);
// Appends rows, writing the header only when the file is new or empty. Throws if headers disagree.
void append_csv(const std::filesystem::path& path, const CsvTable& table);

// Shortest text that reads back to the same double.
std::string format_double(double v);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lrho
