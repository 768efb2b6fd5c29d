#pragma once

#include <string>

#include "tempered/csv.hpp"

namespace tempered {

enum class PlotKind { HistogramGrid, LogLogFit, DecayCurves };

PlotKind plot_kind_from_name(const std::string& name);

struct PlotOptions {
  bool log_alpha_axis = true;  // histogram x axis in log10(alpha)
  int bins = 30;
  std::string x_column = "n";
  std::string series_column;  // empty: sniffed from the table
  std::string y_column;       // empty: sniffed from the table
  std::string y_column2;      // optional second decay panel
};

/// Renders one of the figure styles from a result table. Deterministic: the
/// output depends only on the table and options (no timestamps or ids).
/// Throws SchemaMismatch when the table lacks the needed columns and Error
/// when there are no data rows.
std::string render_plot(const CsvTable& table, PlotKind kind, const PlotOptions& opts = {});

void write_plot_file(const std::string& path, const CsvTable& table, PlotKind kind,
                     const PlotOptions& opts = {});

}  // namespace tempered
