#pragma once

/**
 * @file image_io.hpp
 * @brief Radiograph loading and saving.
 *
 * PGM files are binary P5 with big-endian 16-bit samples and maxval 16383;
 * a larger maxval is rejected because the pipeline is calibrated for 14-bit
 * data. PNG covers 8- and 16-bit grayscale; 16-bit values above 16383 are
 * rejected for the same reason.
 */

#include "kneetex/types.hpp"

#include <filesystem>

namespace kneetex {

ImageU16 read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const ImageU16& image);

ImageU16 read_png(const std::filesystem::path& path);
void write_png16(const std::filesystem::path& path, const ImageU16& image);

// Dispatches on the file extension (.pgm / .png, case-insensitive).
ImageU16 read_image(const std::filesystem::path& path);

}  // namespace kneetex
