// Copyright 2026 The skinscreen Authors.
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

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skinscreen/errors.hpp"
#include "skinscreen/evaluation.hpp"

namespace skinscreen {
namespace {

std::size_t idx(Label c) { return c == Label::monkeypox ? 0 : 1; }

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void ConfusionMatrix::add(Label actual, Label predicted) { ++counts[idx(actual)][idx(predicted)]; }

std::size_t ConfusionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

std::size_t ConfusionMatrix::true_positive(Label c) const { return counts[idx(c)][idx(c)]; }

std::size_t ConfusionMatrix::false_positive(Label c) const {
  const std::size_t i = idx(c);
  return counts[1 - i][i];
}

std::size_t ConfusionMatrix::false_negative(Label c) const {
  const std::size_t i = idx(c);
  return counts[i][1 - i];
}

std::size_t ConfusionMatrix::support(Label c) const {
  const std::size_t i = idx(c);
  return counts[i][0] + counts[i][1];
}

MetricsReport weighted_metrics(const ConfusionMatrix& cm) {
  const std::size_t n = cm.total();
  if (n == 0) throw InvalidInput("cannot compute metrics over an empty confusion matrix");
  MetricsReport report;
  report.confusion = cm;
  report.n_evaluated = n;
  report.accuracy = ratio(cm.correct(), n);
  for (Label c : {Label::monkeypox, Label::others}) {
    ClassMetrics m;
    const std::size_t tp = cm.true_positive(c);
    m.support = cm.support(c);
    m.precision = ratio(tp, tp + cm.false_positive(c));
    m.recall = ratio(tp, tp + cm.false_negative(c));
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    const double w = static_cast<double>(m.support) / static_cast<double>(n);
    report.weighted_precision += w * m.precision;
    report.weighted_recall += w * m.recall;
    report.weighted_f1 += w * m.f1;
    report.per_class[c] = m;
  }
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["weighted_precision"] = weighted_precision;
  j["weighted_recall"] = weighted_recall;
  j["weighted_f1"] = weighted_f1;
  j["accuracy"] = accuracy;
  j["n_evaluated"] = n_evaluated;
  auto& pc = j["per_class"] = nlohmann::ordered_json::object();
  for (const auto& [label, m] : per_class) {
    pc[std::string(to_string(label))] = {
        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  j["confusion"] = {{"actual_monkeypox", {confusion.counts[0][0], confusion.counts[0][1]}},
                    {"actual_others", {confusion.counts[1][0], confusion.counts[1][1]}}};
  auto& sk = j["skipped"] = nlohmann::ordered_json::array();
  for (const auto& s : skipped) sk.push_back({{"id", s.id}, {"reason", s.reason}});
  return j.dump();
}

std::string MetricsReport::to_text() const {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %9s %9s %9s %8s\n", "class", "precision", "recall", "f1", "support");
  out << line;
  for (const auto& [label, m] : per_class) {
    std::snprintf(line, sizeof(line), "%-12s %9.4f %9.4f %9.4f %8zu\n", std::string(to_string(label)).c_str(),
                  m.precision, m.recall, m.f1, m.support);
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-12s %9.4f %9.4f %9.4f %8zu\n", "weighted", weighted_precision,
                weighted_recall, weighted_f1, n_evaluated);
  out << line;
  std::snprintf(line, sizeof(line), "accuracy %.4f over %zu record(s)\n", accuracy, n_evaluated);
  out << line;
  if (!skipped.empty()) {
    out << skipped.size() << " record(s) skipped:\n";
    for (const auto& s : skipped) out << "  " << s.id << ": " << s.reason << '\n';
  }
  return out.str();
}

}  // namespace skinscreen
