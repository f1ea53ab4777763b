#pragma once

// Spectra, MS images and labelled datasets, plus the CSV / PGM file surface
// shared by the rest of the library.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace pertrans {

/// Input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    auto pos = line.find(sep, begin);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, pos - begin));
    begin = pos + 1;
  }
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline bool blank(std::string_view line) { return trim(line).empty(); }

}  // namespace detail

/// A mass spectrum: strictly increasing m/z axis with non-negative finite
/// intensities of equal length.
class Spectrum {
 public:
  Spectrum(std::vector<double> mz, std::vector<double> intensity)
      : mz_(std::move(mz)), intensity_(std::move(intensity)) {
    validate();
  }

  /// Unit-spaced axis 0..q-1; convenient for tests and raw signals.
  static Spectrum from_intensities(std::vector<double> intensity) {
    std::vector<double> mz(intensity.size());
    for (std::size_t i = 0; i < mz.size(); ++i) mz[i] = static_cast<double>(i);
    return Spectrum(std::move(mz), std::move(intensity));
  }

  std::size_t size() const noexcept { return mz_.size(); }
  std::span<const double> mz() const noexcept { return mz_; }
  std::span<const double> intensity() const noexcept { return intensity_; }
  double operator[](std::size_t i) const { return intensity_[i]; }

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  void validate() const {
    if (mz_.empty()) throw ValidationError("spectrum must hold at least one point");
    if (mz_.size() != intensity_.size())
      throw ValidationError("spectrum mz and intensity lengths differ");
    for (std::size_t i = 0; i < mz_.size(); ++i) {
      if (!std::isfinite(mz_[i])) throw ValidationError("non-finite mz value");
      if (!std::isfinite(intensity_[i]))
        throw ValidationError("non-finite intensity at index " + std::to_string(i));
      if (intensity_[i] < 0.0)
        throw ValidationError("negative intensity at index " + std::to_string(i));
      if (i > 0 && !(mz_[i - 1] < mz_[i]))
        throw ValidationError("mz axis must be strictly increasing (index " +
                              std::to_string(i) + ")");
    }
  }

  std::vector<double> mz_;
  std::vector<double> intensity_;
};

/// Rectangular grid of spectra sharing one m/z axis, stored row-major.
class MSImage {
 public:
  MSImage(std::size_t width, std::size_t height, std::vector<double> mz,
          std::vector<std::vector<double>> spectra)
      : width_(width), height_(height), mz_(std::move(mz)), spectra_(std::move(spectra)) {
    if (width_ == 0 || height_ == 0) throw ValidationError("image dimensions must be positive");
    if (width_ * height_ != spectra_.size())
      throw ValidationError("width*height does not match number of spectra");
    if (mz_.empty()) throw ValidationError("image mz axis is empty");
    for (std::size_t i = 1; i < mz_.size(); ++i)
      if (!(mz_[i - 1] < mz_[i])) throw ValidationError("image mz axis not increasing");
    for (const auto& s : spectra_)
      if (s.size() != mz_.size()) throw ValidationError("pixel spectrum length != mz length");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return spectra_.size(); }
  std::span<const double> mz() const noexcept { return mz_; }
  std::span<const double> pixel(std::size_t index) const { return spectra_.at(index); }
  std::span<const double> pixel(std::size_t row, std::size_t col) const {
    return spectra_.at(row * width_ + col);
  }
  const std::vector<std::vector<double>>& spectra() const noexcept { return spectra_; }

  friend bool operator==(const MSImage&, const MSImage&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> mz_;
  std::vector<std::vector<double>> spectra_;
};

/// n spectra on one shared axis with binary outcomes and group identifiers.
struct LabeledDataset {
  std::vector<double> mz;
  std::vector<std::vector<double>> intensities;
  std::vector<int> labels;
  std::vector<std::string> groups;

  LabeledDataset() = default;
  LabeledDataset(std::vector<double> mz_axis, std::vector<std::vector<double>> rows,
                 std::vector<int> y, std::vector<std::string> group_ids)
      : mz(std::move(mz_axis)),
        intensities(std::move(rows)),
        labels(std::move(y)),
        groups(std::move(group_ids)) {
    validate();
  }

  std::size_t size() const noexcept { return intensities.size(); }
  std::size_t width() const noexcept { return mz.size(); }

  Spectrum spectrum(std::size_t i) const { return Spectrum(mz, intensities.at(i)); }

  void validate() const {
    if (mz.empty()) throw ValidationError("dataset mz axis is empty");
    for (std::size_t j = 1; j < mz.size(); ++j)
      if (!(mz[j - 1] < mz[j])) throw ValidationError("dataset mz axis not strictly increasing");
    if (labels.size() != intensities.size() || groups.size() != intensities.size())
      throw ValidationError("dataset count mismatch: " + std::to_string(intensities.size()) +
                            " spectra, " + std::to_string(labels.size()) + " labels, " +
                            std::to_string(groups.size()) + " groups");
    for (std::size_t i = 0; i < intensities.size(); ++i) {
      if (intensities[i].size() != mz.size())
        throw ValidationError("spectrum " + std::to_string(i) + " has " +
                              std::to_string(intensities[i].size()) + " values, expected " +
                              std::to_string(mz.size()));
      for (double v : intensities[i])
        if (!std::isfinite(v) || v < 0.0)
          throw ValidationError("spectrum " + std::to_string(i) +
                                " holds a negative or non-finite intensity");
      if (labels[i] != 0 && labels[i] != 1)
        throw ValidationError("label of row " + std::to_string(i) + " is not binary");
    }
  }

  /// Rows whose indices are listed, in the given order.
  LabeledDataset subset(std::span<const std::size_t> rows) const {
    LabeledDataset out;
    out.mz = mz;
    out.intensities.reserve(rows.size());
    for (auto r : rows) {
      out.intensities.push_back(intensities.at(r));
      out.labels.push_back(labels.at(r));
      out.groups.push_back(groups.at(r));
    }
    return out;
  }
};

// --------------------------------------------------------------------------
// Spectrum CSV: "mz,intensity" per line, no header.

inline Spectrum parse_spectrum_csv(std::istream& in) {
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    auto fields = detail::split(line);
    double mz = 0.0, value = 0.0;
    if (fields.size() != 2 || !detail::parse_double(fields[0], mz) ||
        !detail::parse_double(fields[1], value))
      throw ValidationError("malformed spectrum line " + std::to_string(lineno) +
                            ": expected 'mz,intensity'");
    if (value < 0.0)
      throw ValidationError("negative intensity on line " + std::to_string(lineno));
    rows.emplace_back(mz, value);
  }
  if (rows.empty()) throw ValidationError("spectrum file holds no data rows");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> mz(rows.size()), intensity(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first == rows[i - 1].first)
      throw ValidationError("duplicate mz value " + detail::format_double(rows[i].first));
    mz[i] = rows[i].first;
    intensity[i] = rows[i].second;
  }
  return Spectrum(std::move(mz), std::move(intensity));
}

inline Spectrum load_spectrum_csv(const std::string& path) {
  auto in = detail::open_in(path);
  return parse_spectrum_csv(in);
}

inline void write_spectrum_csv(const Spectrum& s, std::ostream& out) {
  for (std::size_t i = 0; i < s.size(); ++i)
    out << detail::format_double(s.mz()[i]) << ',' << detail::format_double(s[i]) << '\n';
}

inline void save_spectrum_csv(const Spectrum& s, const std::string& path) {
  auto out = detail::open_out(path);
  write_spectrum_csv(s, out);
  detail::finish_write(out, path);
}

// --------------------------------------------------------------------------
// Dataset CSV: header row of q mz values, then one row of q intensities per
// spectrum. Labels CSV: "label,group" per row, aligned by row index.

namespace detail {

inline std::vector<double> parse_number_row(std::string_view line, std::size_t lineno,
                                            const char* what) {
  std::vector<double> row;
  for (auto field : split(line)) {
    double v = 0.0;
    if (!parse_double(field, v))
      throw ValidationError(std::string("malformed ") + what + " line " + std::to_string(lineno) +
                            ": '" + std::string(trim(field)) + "' is not a finite number");
    row.push_back(v);
  }
  return row;
}

}  // namespace detail

inline LabeledDataset parse_dataset_csv(std::istream& spectra, std::istream& labels) {
  LabeledDataset ds;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(spectra, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    auto row = detail::parse_number_row(line, lineno, "spectra");
    if (!have_header) {
      ds.mz = std::move(row);
      have_header = true;
      continue;
    }
    if (row.size() != ds.mz.size())
      throw ValidationError("row-length mismatch on spectra line " + std::to_string(lineno) +
                            ": " + std::to_string(row.size()) + " values, header has " +
                            std::to_string(ds.mz.size()));
    ds.intensities.push_back(std::move(row));
  }
  if (!have_header) throw ValidationError("spectra file is empty (missing mz header row)");

  lineno = 0;
  while (std::getline(labels, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    auto fields = detail::split(line);
    if (fields.size() != 2)
      throw ValidationError("malformed labels line " + std::to_string(lineno) +
                            ": expected 'label,group'");
    auto label = detail::trim(fields[0]);
    auto group = std::string(detail::trim(fields[1]));
    if (lineno == 1 && label == "label") continue;
    if (label != "0" && label != "1")
      throw ValidationError("non-binary label '" + std::string(label) + "' on labels line " +
                            std::to_string(lineno));
    if (group.empty())
      throw ValidationError("empty group on labels line " + std::to_string(lineno));
    ds.labels.push_back(label == "1" ? 1 : 0);
    ds.groups.push_back(std::move(group));
  }
  if (ds.labels.size() != ds.intensities.size())
    throw ValidationError("count mismatch: " + std::to_string(ds.intensities.size()) +
                          " spectra but " + std::to_string(ds.labels.size()) + " labels");
  ds.validate();
  return ds;
}

inline LabeledDataset load_dataset_csv(const std::string& spectra_path,
                                       const std::string& labels_path) {
  auto spectra = detail::open_in(spectra_path);
  auto labels = detail::open_in(labels_path);
  return parse_dataset_csv(spectra, labels);
}

/// Header row of axis values followed by one row per matrix row.
inline void write_matrix_csv(std::span<const double> header,
                             const std::vector<std::vector<double>>& rows, std::ostream& out) {
  auto emit = [&out](std::span<const double> r) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ',';
      out << detail::format_double(r[j]);
    }
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
}

inline void save_dataset_csv(const LabeledDataset& ds, const std::string& spectra_path,
                             const std::string& labels_path) {
  auto out = detail::open_out(spectra_path);
  write_matrix_csv(ds.mz, ds.intensities, out);
  detail::finish_write(out, spectra_path);
  auto lab = detail::open_out(labels_path);
  for (std::size_t i = 0; i < ds.size(); ++i) lab << ds.labels[i] << ',' << ds.groups[i] << '\n';
  detail::finish_write(lab, labels_path);
}

// --------------------------------------------------------------------------
// PGM output.

/// Row-major real matrix.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  Grid(std::size_t r, std::size_t c, std::vector<double> v) : rows(r), cols(c), values(std::move(v)) {
    if (values.size() != rows * cols) throw ValidationError("grid size mismatch");
  }

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Min-max scaling to 0..255 with round-half-up; a constant grid maps to 0.
inline std::vector<std::uint8_t> scale_to_bytes(const Grid& grid) {
  std::vector<std::uint8_t> px(grid.values.size(), 0);
  if (grid.values.empty()) return px;
  for (double v : grid.values)
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("PGM grid must be finite and non-negative");
  auto [lo_it, hi_it] = std::minmax_element(grid.values.begin(), grid.values.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;
  if (range <= 0.0) return px;
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = static_cast<std::uint8_t>(std::floor(255.0 * (grid.values[i] - lo) / range + 0.5));
  return px;
}

inline void write_pgm(const Grid& grid, std::ostream& out) {
  auto px = scale_to_bytes(grid);
  out << "P5\n" << grid.cols << ' ' << grid.rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

inline void write_pgm(const Grid& grid, const std::string& path) {
  auto out = detail::open_out(path, true);
  write_pgm(grid, out);
  detail::finish_write(out, path);
}

}  // namespace pertrans
