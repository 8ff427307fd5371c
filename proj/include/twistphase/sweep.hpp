#pragma once

// Run configuration, parameter sweeps, finite-size trends, transition
// detection and table output.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twistphase/models.hpp"
#include "twistphase/twist.hpp"

namespace twistphase {

struct SweptParameter {
  std::string name;
  double start = 0.0;
  double stop = 1.0;
  int count = 2;

  /// start + (stop - start) * i / (count - 1); the last value is exactly `stop`.
  double value(int i) const;
};

enum class OutputFormat { Csv, Jsonl };

/// A validated run request. `model` is the template; a swept parameter holds
/// its start value there.
struct SweepSpec {
  ModelSpec model;
  std::optional<SweptParameter> sweep;
  std::vector<int> dims;
  std::vector<int> sizes;  // linear sizes for finite-size trends
  int twist_axis = 0;      // 0-based
  double threshold = kDefaultIllDefinedThreshold;
  OutputFormat format = OutputFormat::Csv;
  NConvention n_convention = NConvention::TotalModes;

  ModelSpec model_at(double value) const;
  /// Value of the model's primary parameter (lambda, phi; 0 for custom).
  double primary_value() const;
  EvalOptions eval_options() const;
};

/// Flat `key=value` tokens separated by whitespace or newlines; `#` starts a
/// comment. Numeric values may be `sweep(start,stop,count)`. Relative table
/// paths resolve against `base_dir`.
SweepSpec parse_config(std::string_view text, const std::string& base_dir = {});

struct ResultRow {
  double param = 0.0;
  double re_z = 0.0;
  double im_z = 0.0;
  double abs_z = 0.0;
  double log_abs_z = 0.0;
  double gamma_g = 0.0;  // NaN when ill-defined or singular
  double min_gap = 0.0;
  long n_singular = 0;

  bool singular() const;     // z fields are NaN
  bool ill_defined() const;  // z finite, gamma_g NaN
};

struct ResultTable {
  std::string param_name = "param";
  std::vector<ResultRow> rows;
  /// Largest per-mode |factor| met while building the table.
  double max_factor_abs = 0.0;
};

enum class SingularPolicy {
  NanRow,        // any singular mode turns the row into NaN
  ExcludeModes,  // report the product over the regular modes
};

struct RunOptions {
  unsigned workers = 1;
  bool strict = false;  // singular modes and evaluation errors become exceptions
  std::optional<SingularPolicy> policy;  // defaults: sweep/point NanRow, trend ExcludeModes
};

ResultRow make_row(double param, const TwistResult& r, double min_gap);

ResultTable run_point(const SweepSpec& spec, const RunOptions& opt = {});
ResultTable run_sweep(const SweepSpec& spec, const RunOptions& opt = {});
ResultTable finite_size_trend(const SweepSpec& spec, const RunOptions& opt = {});

enum class TransitionKind { ZMinimum, GammaJump, IllDefinedOnset };

std::string to_string(TransitionKind k);

struct Transition {
  double value = 0.0;
  TransitionKind kind;
};

struct DetectOptions {
  double z_minimum_below = 0.1;
  double gamma_jump_above = 1.5707963267948966;  // pi/2
};

/// z-minimum: interior local minimum of abs_z below the threshold.
/// gamma-jump: |d gamma_g| (mod 2 pi) above the threshold between adjacent
/// defined rows; runs of consecutive jumps sharing a row count once, reported
/// at the midpoint of the run.
/// ill-defined-onset: first ill-defined row.
std::vector<Transition> detect_transitions(const ResultTable& table, const DetectOptions& opt = {});

std::string emit(const ResultTable& table, OutputFormat format);
/// Inverse of emit for JSONL.
ResultTable parse_jsonl(std::string_view text);

struct GapRow {
  double param = 0.0;
  double min_gap = 0.0;
  KPoint k;
};

std::vector<GapRow> gap_scan(const SweepSpec& spec, const RunOptions& opt = {});
std::string emit_gaps(const std::vector<GapRow>& rows, OutputFormat format);

}  // namespace twistphase
