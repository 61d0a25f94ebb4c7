#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "imputelab/dataset.hpp"
#include "imputelab/date.hpp"

namespace testutil {

constexpr double NA = std::numeric_limits<double>::quiet_NaN();

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd m(n, p);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

/// Equality treating NaN == NaN, so missingness patterns compare too.
inline bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const bool na = std::isnan(a(i, j)), nb = std::isnan(b(i, j));
      if (na != nb) return false;
      if (!na && a(i, j) != b(i, j)) return false;
    }
  return true;
}

inline imputelab::ParticipantSeries make_series(const std::string& pid,
                                                const std::vector<std::vector<double>>& days,
                                                std::int64_t start_day = 18628) {
  imputelab::ParticipantSeries s;
  s.participant_id = pid;
  for (std::size_t t = 0; t < days.size(); ++t) {
    imputelab::DayRow row;
    row.day = imputelab::date{start_day + static_cast<std::int64_t>(t)};
    row.week = static_cast<int>(t / 7 + 1);
    for (double v : days[t])
      row.values.push_back(std::isnan(v) ? imputelab::Cell{} : imputelab::Cell{v});
    s.rows.push_back(std::move(row));
  }
  return s;
}

inline imputelab::LongitudinalDataset make_dataset(
    const std::vector<std::string>& features,
    const std::vector<std::pair<std::string, std::vector<std::vector<double>>>>& participants) {
  imputelab::LongitudinalDataset ds;
  ds.feature_names = features;
  for (const auto& [pid, days] : participants) ds.participants.push_back(make_series(pid, days));
  return ds;
}

class TempDir {
public:
  TempDir() {
    auto pattern = (std::filesystem::temp_directory_path() / "imputelab_test_XXXXXX").string();
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    path_ = mkdtemp(buf.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
  std::string path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
