#include "bcmf/io/output.hpp"

#include <system_error>

#include "bcmf/error.hpp"

namespace bcmf::io {

namespace fs = std::filesystem;

AtomicFile::AtomicFile(fs::path target, bool binary) : target_(std::move(target)) {
  temp_ = target_;
  temp_ += ".partial";
  out_.open(temp_, binary ? std::ios::out | std::ios::binary | std::ios::trunc : std::ios::out | std::ios::trunc);
  if (!out_) throw Error("cannot open '" + temp_.string() + "' for writing");
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    fs::remove(temp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw Error("write to '" + temp_.string() + "' failed");
  out_.close();
  std::error_code ec;
  fs::rename(temp_, target_, ec);
  if (ec) throw Error("cannot move '" + temp_.string() + "' to '" + target_.string() + "': " + ec.message());
  committed_ = true;
}

OutputSet::OutputSet(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  if (!fs::exists(dir_)) {
    fs::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory '" + dir_.string() + "': " + ec.message());
    created_dir_ = true;
  } else if (!fs::is_directory(dir_)) {
    throw Error("output path '" + dir_.string() + "' exists and is not a directory");
  }
}

OutputSet::~OutputSet() {
  if (committed_) return;
  files_.clear();  // removes the staged temporaries
  std::error_code ec;
  if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
}

std::ofstream& OutputSet::open(const std::string& name, bool binary) {
  files_.push_back(std::make_unique<AtomicFile>(dir_ / name, binary));
  return files_.back()->stream();
}

void OutputSet::commit() {
  for (auto& f : files_) f->commit();
  committed_ = true;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace bcmf::io
