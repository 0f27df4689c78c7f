// Copyright 2026 The compgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "compgen/results.hpp"

namespace compgen {

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  double err = 0.0;   // half-height of the error bar
  std::string label;  // category name for bar charts
};

struct PlotSeries {
  std::string name;
  std::vector<PlotPoint> points;
};

/// Everything a plot shows. The SVG is a pure function of this struct and
/// the CSV form stores it exactly, so re-plotting from CSV reproduces the
/// same bytes.
struct PlotData {
  std::string kind;  // beta | bits | metric_vs_gen | bars
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::string annotation;
  std::vector<PlotSeries> series;
};

std::string render_svg(const PlotData& plot);
std::string plot_to_csv(const PlotData& plot);
PlotData plot_from_csv(const std::string& text);

struct PlotRequest {
  std::string kind = "beta";
  std::string quantity = "accuracy_macro";
  std::string subset = "Test";
  std::string readout = "linear";
  std::optional<std::string> n_label;  // default: the largest present
  std::string mode;                    // empty: every mode is its own series
  std::string metric = "dci_disentanglement";  // metric_vs_gen x axis
  std::string metric_mode = "latent";
  std::string bar_group = "n_label";
};

/// Builds a plot from long-format observations; throws kInvalidArgument when
/// nothing matches the request.
PlotData build_plot(const std::vector<Observation>& observations, const PlotRequest& request);

/// Writes <stem>.svg and <stem>.csv.
void write_plot(const PlotData& plot, const std::filesystem::path& stem);

}  // namespace compgen
