#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace ctl
{

struct WrittenFile
{
    std::string name;
    std::uintmax_t bytes = 0;
    std::string digest; // FNV-1a 64, hex
};

// Writes to a temporary sibling and renames it into place on commit().
// The temporary is removed if the object dies uncommitted.
class AtomicFile
{
public:
    AtomicFile(const std::filesystem::path &dir, std::string name, bool binary = false);
    ~AtomicFile();
    AtomicFile(const AtomicFile &) = delete;
    AtomicFile &operator=(const AtomicFile &) = delete;

    std::ofstream &stream() { return out_; }
    WrittenFile commit();

private:
    std::filesystem::path final_;
    std::filesystem::path temp_;
    std::string name_;
    std::ofstream out_;
    bool committed_ = false;
};

// "%.*g" with a fixed precision; deterministic across runs
std::string fmt(double v, int precision = 12);

std::string file_digest(const std::filesystem::path &path);

} // namespace ctl
