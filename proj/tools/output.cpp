#include "output.hpp"

#include "cavity/scenario.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace ctl
{

AtomicFile::AtomicFile(const std::filesystem::path &dir, std::string name, bool binary)
    : final_(dir / name), name_(std::move(name))
{
    temp_ = dir / ("." + name_ + ".tmp." + std::to_string(::getpid()));
    out_.open(temp_, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out_) {
        throw std::filesystem::filesystem_error("cannot create output file", temp_,
                                                std::make_error_code(std::errc::io_error));
    }
}

AtomicFile::~AtomicFile()
{
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(temp_, ec);
    }
}

WrittenFile AtomicFile::commit()
{
    out_.flush();
    const bool ok = static_cast<bool>(out_);
    out_.close();
    if (!ok || out_.fail()) {
        throw std::filesystem::filesystem_error("write failed", temp_, std::make_error_code(std::errc::io_error));
    }
    std::filesystem::rename(temp_, final_);
    committed_ = true;
    return {name_, std::filesystem::file_size(final_), file_digest(final_)};
}

std::string fmt(double v, int precision)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::string file_digest(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 14695981039346656037ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        h = cavity::fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

} // namespace ctl
