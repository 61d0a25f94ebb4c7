#pragma once

#include <stdexcept>
#include <string>

namespace imputelab {

/// Error categories; config errors map to CLI exit code 2, data errors to 3.
enum class errc {
  bad_config,
  feature_not_found,
  split_infeasible,
  invalid_input,
  invalid_df,
  undefined_metric,
  degenerate_pairs,
  single_class_train,
  malformed_row,
  duplicate_row,
  missing_column,
  all_data_dropped,
  soft_impute_failed,
  io_error,
};

class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

  /// true for errors caused by bad configuration or arguments (exit code 2).
  bool is_config_error() const {
    switch (code_) {
      case errc::bad_config:
      case errc::feature_not_found:
      case errc::invalid_input:
      case errc::invalid_df:
      case errc::undefined_metric:
        return true;
      default:
        return false;
    }
  }

private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw error(code, what); }

}  // namespace imputelab
