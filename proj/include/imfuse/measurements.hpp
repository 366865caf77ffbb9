#pragma once

#include <string>
#include <vector>

namespace imfuse {

struct Reading {
  std::string cell_id;
  double rxlev_dbm = 0.0;
};

// One mobile measurement report: the serving level plus at most six of the
// strongest detected BA-list neighbors, strongest first.
struct MmrReport {
  std::string serving_id;
  double serving_rxlev_dbm = 0.0;
  std::vector<Reading> neighbors;
};

// One drive-test record: every detectable cell at a road position. Readings
// include the serving cell and carry distinct ids.
struct DtRecord {
  double x = 0.0;
  double y = 0.0;
  std::vector<Reading> readings;
};

}  // namespace imfuse
