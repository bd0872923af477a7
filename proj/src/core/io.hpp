#pragma once

#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/subspace.hpp"

namespace mdgait::io {

// --- IQ recordings ---------------------------------------------------------
// Binary, little-endian: magic "MDOP", version u16, f_s f64, f_c f64, N u64,
// direction u8, label u8 (255 = unlabeled), then N interleaved (I, Q) f64
// pairs. The subject id travels in the manifest, not the sample file.

void save_recording(const IQRecording& rec, const std::string& path);
IQRecording load_recording(const std::string& path);

// --- Dataset manifest ------------------------------------------------------

struct ManifestEntry {
  std::string file;  // relative to the manifest's directory
  std::string subject_id;
  GaitClass label = GaitClass::NW;
  Direction direction = Direction::Toward;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string root;  // directory the file paths are relative to
};

void save_manifest(const Manifest& manifest, const std::string& path);
Manifest load_manifest(const std::string& path);
std::string resolve_recording_path(const Manifest& manifest, const ManifestEntry& entry);

// --- Subspace model file ---------------------------------------------------
// Binary, little-endian: magic "MDPC", version u16, representation kind u8,
// p u64, d u64, lambda u64, centering flag u8, then the mean (p f64), the
// basis (p*lambda f64, column-major), the eigenvalues (lambda f64), the total
// variance f64, and a CRC-32 (u32) of every preceding byte.

struct StoredModel {
  subspace::SubspaceModel model;
  RepresentationKind kind = RepresentationKind::CvdPre;
};

void save_model(const StoredModel& stored, const std::string& path);
StoredModel load_model(const std::string& path);

// --- Text artifacts --------------------------------------------------------

// Row-major matrix as plain CSV (no header); rows x cols must match size.
void save_matrix_csv(const std::string& path, const std::vector<double>& values,
                     std::size_t rows, std::size_t cols);

// Writes content to a temporary sibling and renames it into place, so readers
// never observe a half-written artifact.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace mdgait::io
