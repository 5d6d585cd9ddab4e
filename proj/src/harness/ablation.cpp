// Copyright 2026 The HDF Authors.
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

#include "hdf/harness/ablation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace hdf::harness {

std::vector<SettingSummary> AblationReport::summary() const {
  std::vector<SettingSummary> out;
  for (const auto& run : runs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SettingSummary& s) { return s.setting == run.setting; });
    if (it == out.end()) {
      out.push_back(SettingSummary{run.setting});
      it = out.end() - 1;
    }
    ++it->runs;
    it->war_mean += run.test.war;
    it->uar_mean += run.test.uar;
  }
  for (auto& s : out) {
    s.war_mean /= static_cast<double>(s.runs);
    s.uar_mean /= static_cast<double>(s.runs);
    double vw = 0, vu = 0;
    for (const auto& run : runs) {
      if (run.setting != s.setting) continue;
      vw += (run.test.war - s.war_mean) * (run.test.war - s.war_mean);
      vu += (run.test.uar - s.uar_mean) * (run.test.uar - s.uar_mean);
    }
    // Sample standard deviation over seeds.
    const double dof = s.runs > 1 ? static_cast<double>(s.runs - 1) : 1.0;
    s.war_std = std::sqrt(vw / dof);
    s.uar_std = std::sqrt(vu / dof);
  }
  return out;
}

std::optional<SettingSummary> AblationReport::find(const std::string& setting) const {
  for (const auto& s : summary())
    if (s.setting == setting) return s;
  return std::nullopt;
}

AblationReport run_ablation(const RunConfig& cfg, const DatasetBundle& data, std::ostream* records,
                            std::ostream* progress) {
  AblationReport report;
  for (const auto& setting : cfg.ablate.settings) {
    const model::Variant v = resolve_variant(cfg, setting);
    for (std::uint64_t seed : cfg.ablate.seeds) {
      const auto t0 = std::chrono::steady_clock::now();
      TrainResult res = train(cfg, v, seed, data.train, nullptr, TrainSinks{records, nullptr});
      model::Model<float> m(v.model, res.params);
      AblationRun run{setting, seed, res.params.element_count(), evaluate(m, data.test)};
      if (records) {
        nlohmann::json j = {{"type", "ablation"}, {"setting", setting}, {"seed", seed},
                            {"parameters", run.parameters}, {"test", to_json(run.test)}};
        *records << j.dump() << "\n";
      }
      if (progress) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        char line[160];
        std::snprintf(line, sizeof(line), "setting %-4s seed %llu  WAR %6.2f  UAR %6.2f  (%.1fs)\n", setting.c_str(),
                      static_cast<unsigned long long>(seed), run.test.war, run.test.uar, secs);
        *progress << line << std::flush;
      }
      report.runs.push_back(std::move(run));
    }
  }
  return report;
}

namespace {

const char* mark(bool on) { return on ? "✓" : "✗"; }

std::string cell(const AblationReport& r, const std::string& setting, bool war) {
  const auto s = r.find(setting);
  if (!s) return "n/a";
  char buf[64];
  const double mean = war ? s->war_mean : s->uar_mean;
  const double sd = war ? s->war_std : s->uar_std;
  if (s->runs > 1) std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", mean, sd);
  else std::snprintf(buf, sizeof(buf), "%.2f", mean);
  return buf;
}

}  // namespace

std::string format_component_table(const AblationReport& r) {
  std::string out = "| Setting | DAM | DSM | WAR | UAR |\n|---|:-:|:-:|---|---|\n";
  const struct { const char* row; const char* setting; bool dam, dsm; } rows[] = {
      {"a", "a", false, false}, {"b", "b", true, false}, {"c", "c", false, true}, {"d", "d", true, true}};
  for (const auto& row : rows) {
    out += std::string("| ") + row.row + " | " + mark(row.dam) + " | " + mark(row.dsm) + " | " +
           cell(r, row.setting, true) + " | " + cell(r, row.setting, false) + " |\n";
  }
  return out;
}

std::string format_branch_table(const AblationReport& r) {
  std::string out = "| Setting | Fre. | Tim. | WAR | UAR |\n|---|:-:|:-:|---|---|\n";
  const struct { const char* row; const char* setting; bool fre, tim; } rows[] = {
      {"a", "c", false, false}, {"b", "freq", true, false}, {"c", "time", false, true}, {"d", "d", true, true}};
  for (const auto& row : rows) {
    out += std::string("| ") + row.row + " | " + mark(row.fre) + " | " + mark(row.tim) + " | " +
           cell(r, row.setting, true) + " | " + cell(r, row.setting, false) + " |\n";
  }
  return out;
}

}  // namespace hdf::harness
