#include "inspecta/image.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "inspecta/error.hpp"

namespace inspecta {

namespace {

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    return token;
}

int parse_int(const std::string& token, const std::filesystem::path& path) {
    if (token.empty()) throw IoError("truncated PGM header: " + path.string());
    for (char ch : token) {
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw IoError("bad PGM header token '" + token + "': " + path.string());
    }
    return std::stoi(token);
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image file: " + path.string());

    if (next_token(in) != "P5") throw IoError("not a binary PGM (P5): " + path.string());
    const int width = parse_int(next_token(in), path);
    const int height = parse_int(next_token(in), path);
    const int maxval = parse_int(next_token(in), path);
    if (width <= 0 || height <= 0) throw IoError("bad PGM dimensions: " + path.string());
    if (maxval != 255) throw IoError("unsupported PGM maxval (want 255): " + path.string());

    Image image(width, height);
    in.read(reinterpret_cast<char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(image.pixels.size()))
        throw IoError("truncated PGM pixel data: " + path.string());
    return image;
}

void write_pgm(const Image& image, const std::filesystem::path& path) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height))
        throw ValidationError("refusing to write malformed image: " + path.string());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write image file: " + path.string());
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw IoError("short write on image file: " + path.string());
}

}  // namespace inspecta
