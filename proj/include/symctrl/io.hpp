/*
 * io.hpp
 *
 * Problem configs (JSON), controller files, trace CSV and metrics JSON.
 *
 * Controller file, UTF-8 text:
 *
 *   #dim <n>
 *   #eta <value>
 *   #mu <value>
 *   #state_box lo1 hi1 ... lon hin
 *   #input_box lo1 hi1 ... lom him
 *   #initials i1 i2 ...
 *   #bad b1 b2 ...
 *   src input dst          (one per transition, ascending)
 *
 * Indices are mixed-radix lattice indices; reals are printed with %.17g.
 */
#ifndef SYMCTRL_IO_HPP_
#define SYMCTRL_IO_HPP_

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "symctrl/loop.hpp"
#include "symctrl/synthesis.hpp"

namespace symctrl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  ControlSystem plant;
  ControlSystem specification;
  SynthesisParams params;
  SynthesisOptions options;
};

/* numbers may be JSON numbers or constant expressions such as "1/30" */
ProblemConfig parse_config(const std::string& json_text);
ProblemConfig load_config(const std::string& path);

std::string format_real(double v);

void write_controller(std::ostream& out, const Controller& ctrl);
Controller read_controller(std::istream& in);
void save_controller(const std::string& path, const Controller& ctrl);
Controller load_controller(const std::string& path);

void write_trace_csv(std::ostream& out, const ClosedLoopTrace& trace);

/* {"states":..,"transitions":..,"memory_units":..,"steps":..,"wall_time_ms":..} */
std::string metrics_json(const Metrics& m);

}  // namespace symctrl

#endif  // SYMCTRL_IO_HPP_
