#include "pgm.hpp"

#include "errors.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace wta {

namespace {

class Tokenizer {
public:
    Tokenizer(std::string_view data, const std::string& source) : data_(data), source_(source) {}

    // Skips whitespace and '#' comments.
    void skip()
    {
        while (pos_ < data_.size()) {
            const char c = data_[pos_];
            if (c == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r')
                    ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* what)
    {
        skip();
        if (pos_ >= data_.size())
            throw ParseError(source_ + ": truncated, expected " + what);
        if (!std::isdigit(static_cast<unsigned char>(data_[pos_])))
            throw ParseError(source_ + ": expected " + std::string(what) + " at byte " + std::to_string(pos_));
        unsigned long v = 0;
        while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
            v = v * 10 + static_cast<unsigned long>(data_[pos_] - '0');
            if (v > 1'000'000'000UL)
                throw ParseError(source_ + ": " + std::string(what) + " too large");
            ++pos_;
        }
        return v;
    }

    std::size_t& pos() { return pos_; }
    std::string_view data() const { return data_; }

private:
    std::string_view data_;
    const std::string& source_;
    std::size_t pos_ = 0;
};

} // namespace

GrayImage parse_pgm(std::string_view bytes, const std::string& source)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw ParseError(source + ": not a P2/P5 graymap (bad magic number)");
    const bool binary = bytes[1] == '5';

    Tokenizer tok(bytes, source);
    tok.pos() = 2;
    const unsigned long width = tok.number("width");
    const unsigned long height = tok.number("height");
    const unsigned long maxval = tok.number("maxval");
    if (width == 0 || height == 0)
        throw ParseError(source + ": zero image dimension");
    if (maxval != 255)
        throw UnsupportedFormatError(source + ": maxval " + std::to_string(maxval) + " unsupported, only 255");

    GrayImage img(width, height);
    const std::size_t count = img.pixels.size();
    if (binary) {
        // Exactly one whitespace byte separates maxval from the raster.
        std::size_t& pos = tok.pos();
        if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
            throw ParseError(source + ": missing whitespace after maxval");
        ++pos;
        if (bytes.size() - pos < count)
            throw ParseError(source + ": truncated raster, expected " + std::to_string(count) + " bytes, got "
                             + std::to_string(bytes.size() - pos));
        for (std::size_t i = 0; i < count; ++i)
            img.pixels[i] = static_cast<std::uint8_t>(bytes[pos + i]);
        return img;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned long v = tok.number("pixel value");
        if (v > maxval)
            throw ParseError(source + ": pixel value " + std::to_string(v) + " exceeds maxval");
        img.pixels[i] = static_cast<std::uint8_t>(v);
    }
    return img;
}

GrayImage load_pgm(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pgm(buf.str(), path);
}

std::string encode_pgm(const GrayImage& img, PgmFormat format)
{
    std::ostringstream out;
    out << (format == PgmFormat::Binary ? "P5" : "P2") << '\n' << img.width << ' ' << img.height << "\n255\n";
    if (format == PgmFormat::Binary) {
        out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
        return out.str();
    }
    for (std::size_t y = 0; y < img.height; ++y) {
        std::size_t line = 0;
        for (std::size_t x = 0; x < img.width; ++x) {
            const std::string v = std::to_string(img.at(x, y));
            if (line + v.size() + 1 > 70) {
                out << '\n';
                line = 0;
            } else if (x > 0) {
                out << ' ';
                ++line;
            }
            out << v;
            line += v.size();
        }
        out << '\n';
    }
    return out.str();
}

void save_pgm(const GrayImage& img, const std::string& path, PgmFormat format)
{
    if (img.pixels.size() != img.width * img.height)
        throw DomainError("save_pgm: pixel count does not match width x height");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << encode_pgm(img, format);
    if (!out)
        throw IoError("error writing '" + path + "'");
}

} // namespace wta
