#pragma once

#include <vector>

namespace vct::testing {

struct ZCase {
  std::vector<double> x;
  std::vector<double> y;
  double z;
};

// Reference z values computed in exact rational arithmetic (square root last).
inline const std::vector<ZCase>& z_cases() {
  static const std::vector<ZCase> cases = {
      {{3.949, 4.23, 2.824, 2.114, 3.217, 1.772, 1.475, 0.531, 2.377, 0.559},
       {3.617, 1.265, 3.461, -0.243, 3.272, 3.211, 3.393, 3.494, 3.06, 3.971, 2.053, 2.807},
       -0.89139539434310211},
      {{4.236, 2.753, 2.566, 3.047, 2.711, 2.228, 4.665, 4.131, 1.204, 4.453},
       {5.354, 3.219, 2.354, 2.276, 2.287, 2.35, 4.303, 2.899, 2.372, 1.134, 3.673, 4.536},
       0.27428868841254578},
      {{1.11, -0.773, 4.579, 2.875, 3.503, 6.484, 5.924, 4.978, 4.442, 5.547, 2.798}, {4.89, 2.253, 3.504},
       0.219672692969063},
      {{4.261, 2.548, 2.953, 1.292, 3.588, 3.369, 3.316, 2.992},
       {0.783, 3.329, 3.872, 3.499, 1.459, 2.563, 2.51, 2.423, 3.013, 2.618, 2.701, 1.822},
       1.2354499809770738},
      {{3.03, 5.229, 3.471, 4.024, 2.699, 0.469, 3.593, 4.536}, {4.519, 3.642, 3.824, 2.387}, -0.31464373272210994},
      {{6.176, 2.595, 3.726, 3.326, 2.046, 3.737}, {2.226, 1.262, 2.235, -0.614}, 2.6168196082176642},
      {{4.746, 4.079, 1.966, 3.978, 6.437}, {7.503, 2.72, 6.628, 3.996}, -0.73103387017566446},
      {{6.622, 4.659, 4.624, 2.679, 3.13, 5.02, 5.451, 6.56, 5.622, 4.854},
       {3.618, 4.126, 0.461, 6.253, 6.671, 0.244, 2.661, 2.218, 1.097, 1.21},
       2.4923980284618703},
      {{4.354, 3.68, 5.324, 5.348, 7.391}, {4.399, 3.089, 3.091, 1.6, 2.415, 2.654, 0.389, -0.138, 2.528},
       3.8222183398253708},
      {{5.291, 6.485, 5.672, 7.655, 6.026, 7.344},
       {5.89, 3.576, 5.679, 1.331, 3.233, 2.595, 4.321, 2.493, 3.821, 3.721},
       4.6987533513176523},
  };
  return cases;
}

}  // namespace vct::testing
