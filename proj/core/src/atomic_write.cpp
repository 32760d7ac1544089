#include "xtract/atomic_write.hpp"

#include <fstream>
#include <random>

#include "xtract/error.hpp"

namespace xtract {

void write_file_atomically(const std::filesystem::path& path, std::string_view content)
{
    std::random_device rd;
    auto tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
        }
    }
    std::error_code ec;
    auto existing = std::filesystem::status(path, ec);
    if (!ec && std::filesystem::exists(existing)) std::filesystem::permissions(tmp, existing.permissions(), ec);
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::io_error, "cannot replace " + path.string());
    }
}

}  // namespace xtract
