#pragma once
// Output files are written to a temporary sibling and renamed into place on
// commit, so a failure never leaves a truncated artifact behind.

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace bcmf::io {

class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target, bool binary = false);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ofstream& stream() { return out_; }
  // Flushes, checks the stream and renames over the target.
  void commit();

 private:
  std::filesystem::path target_, temp_;
  std::ofstream out_;
  bool committed_ = false;
};

// A group of files inside one output directory that appear together or not
// at all. Files are staged in order and renamed only by commit().
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);
  ~OutputSet();

  std::ofstream& open(const std::string& name, bool binary = false);
  void commit();

 private:
  std::filesystem::path dir_;
  bool created_dir_ = false;
  bool committed_ = false;
  std::vector<std::unique_ptr<AtomicFile>> files_;
};

// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace bcmf::io
