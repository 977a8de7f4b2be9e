#pragma once

// Run configuration: plain key=value lines, '#' starts a comment.
//
//   v0 = 7.5               finite-range strength            [-1000, 1000]
//   z = -1                 Coulomb coefficient              [-100, 100]
//   l = 0,1,2              partial waves                    each in [0, 20]
//   r_min = 3              smallest box radius              [2, 40]
//   r_max = 21             largest box radius               [2, 40], > r_min
//   r_scan_step = 0.05     box-radius scan step             [0.001, 1]
//   dr = 1e-4              radial integration step          [1e-5, 1e-3]
//   e_max = 6              top of the energy window         (0, 100]
//   outputs = boxres_out   output directory
//   mode = stabilize       stabilize | oracle | both
//   match_radius = 60      phase-shift matching radius      [10, 1000]
//   oracle_points = 401    phase-shift samples per sweep    [7, 100000]
//   oracle_windows = 0:1.7795:1.7815, ...   extra fit windows as l:lo:hi
//   wf_stride = 10         grid stride of wavefunction CSV  [1, 100000]

#include <string>
#include <string_view>
#include <vector>

#include "boxres/potential.hpp"
#include "boxres/stabilization.hpp"

namespace boxres {

enum class RunMode { stabilize, oracle, both };

std::string_view to_string(RunMode mode);
/// Throws ConfigError for anything other than stabilize, oracle or both.
RunMode parse_mode(std::string_view text);

struct OracleWindow {
    int l = 0;
    double lo = 0.0;
    double hi = 0.0;
};

struct RunConfig {
    PotentialSpec potential; ///< v0 and z; l is taken from partial_waves
    std::vector<int> partial_waves{0, 1, 2};
    RadiusRange r_range{3.0, 21.0};
    double r_scan_step = 0.05;
    double dr = 1e-4;
    double e_max = 6.0;
    std::string outputs = "boxres_out";
    RunMode mode = RunMode::stabilize;
    double match_radius = 60.0;
    int oracle_points = 401;
    std::vector<OracleWindow> oracle_windows;
    int wf_stride = 10;
};

/// Parses and range-checks configuration text. Unknown or repeated keys,
/// malformed values and out-of-range values throw ConfigError; messages name
/// the line and, for range errors, the permitted interval.
RunConfig validate_config(std::string_view raw);

/// Reads `path` and calls validate_config. Throws ConfigError if unreadable.
RunConfig load_config(const std::string& path);

} // namespace boxres
