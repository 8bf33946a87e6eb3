#pragma once

#include <stdexcept>
#include <string>

namespace crowdloc {

struct invalid_layout_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct invalid_prior_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct invalid_region_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct empty_cluster_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct insufficient_data_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct degenerate_geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct undefined_scale_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace crowdloc
