#pragma once

#include <string>

#include "stereoflow/field.hpp"

namespace stereoflow {

// Images: 8/16-bit grayscale or RGB PNG (non-interlaced, non-paletted) and
// binary PGM/PPM. Intensities are normalized to [0,1] on read; 8-bit writes
// invert the read mapping exactly.
Image read_image(const std::string& path);
void write_image(const Image& image, const std::string& path);        // 8-bit
void write_image_png16(const Image& image, const std::string& path);  // 16-bit PNG

struct FlowFile {
  CorrField flow;
  Field valid;  // all-ones for formats without a validity channel
};

enum class FlowFormat { Flo, KittiPng };

// `.flo`: float tag 202021.25, width, height, interleaved (u,v) float32,
// little-endian. KITTI PNG: 16-bit RGB, u=(ch1-2^15)/64, v=(ch2-2^15)/64,
// ch3 nonzero = valid. The format is picked from the file extension.
FlowFile read_flow(const std::string& path);
void write_flow(const CorrField& flow, const std::string& path, FlowFormat format);
void write_flow_kitti(const CorrField& flow, const Field& valid,
                      const std::string& path);

struct DisparityFile {
  Field disparity;  // single channel, pixels
  Field valid;
};

// KITTI PNG: 16-bit single channel, disparity = value/256, 0 = invalid.
// PFM: float32 per the header's endianness sign, rows stored bottom-up;
// non-finite values are carried as invalid.
DisparityFile read_disparity(const std::string& path);
void write_disparity_kitti(const Field& disparity, const Field& valid,
                           const std::string& path);

Field read_pfm(const std::string& path);
void write_pfm(const Field& field, const std::string& path);

// 8-bit grayscale 0/255 masks.
Field read_mask_png(const std::string& path);
void write_mask_png(const Field& mask, const std::string& path);

// Direction-as-hue rendering on the standard 55-entry color wheel; zero
// motion maps to white. max_magnitude <= 0 picks the field's 99th
// percentile magnitude.
Image flow_to_color(const CorrField& flow, double max_magnitude = 0.0);

}  // namespace stereoflow
