// lowra/eval.hpp

// Copyright 2026  The lowra authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOWRA_EVAL_HPP
#define LOWRA_EVAL_HPP

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "lowra/error.hpp"
#include "lowra/manifest.hpp"

namespace lowra {

// minimum substitutions + insertions + deletions, unit costs
inline std::size_t levenshtein(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

struct PerResult {
  double per = 0.0;  // corpus-level, unclamped: edits may exceed ref length
  std::size_t n_ref_phones = 0;
  std::size_t n_edits = 0;
};

inline PerResult per(const std::vector<std::vector<std::string>>& refs,
                     const std::vector<std::vector<std::string>>& hyps) {
  if (refs.size() != hyps.size())
    fail(ErrorCode::LengthMismatch,
         std::to_string(refs.size()) + " references vs " +
             std::to_string(hyps.size()) + " hypotheses");
  PerResult r;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    r.n_ref_phones += refs[i].size();
    r.n_edits += levenshtein(refs[i], hyps[i]);
  }
  if (r.n_ref_phones == 0)
    fail(ErrorCode::EmptyReference, "no reference phones to score against");
  r.per = static_cast<double>(r.n_edits) / static_cast<double>(r.n_ref_phones);
  return r;
}

struct EvalResult {
  std::string model_name;
  std::string pretrain_desc;  // "No" for the feature baseline
  bool frozen = true;
  std::string train_budget_desc;
  std::string corpus;
  double per = 0.0;
  std::size_t n_ref_phones = 0;
  std::size_t n_edits = 0;
};

// ---- results CSV: model,pretrain,frozen,budget,corpus,per,n_ref_phones,n_edits ----

inline constexpr const char* kEvalCsvHeader =
    "model,pretrain,frozen,budget,corpus,per,n_ref_phones,n_edits";

namespace detail {

inline std::string eval_row(const EvalResult& r) {
  char num[64];
  std::snprintf(num, sizeof num, "%.6f", r.per);
  return r.model_name + "," + r.pretrain_desc + "," +
         (r.frozen ? "yes" : "no") + "," + r.train_budget_desc + "," +
         r.corpus + "," + num + "," + std::to_string(r.n_ref_phones) + "," +
         std::to_string(r.n_edits);
}

}  // namespace detail

inline void write_eval_csv(const std::vector<EvalResult>& results,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << kEvalCsvHeader << "\n";
  for (const auto& r : results) out << detail::eval_row(r) << "\n";
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

// creates the file with a header on first use
inline void append_eval_row(const EvalResult& r,
                            const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  if (fresh) out << kEvalCsvHeader << "\n";
  out << detail::eval_row(r) << "\n";
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

inline std::vector<EvalResult> read_eval_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<EvalResult> out;
  const auto bad = [&](const std::string& why) {
    fail(ErrorCode::ParseError,
         path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kEvalCsvHeader) continue;  // header, possibly repeated
    const auto fields = split_on(line, ',');
    if (fields.size() != 8) bad("expected 8 comma-separated fields");
    EvalResult r;
    r.model_name = fields[0];
    r.pretrain_desc = fields[1];
    if (fields[2] == "yes")
      r.frozen = true;
    else if (fields[2] == "no")
      r.frozen = false;
    else
      bad("frozen must be yes or no");
    r.train_budget_desc = fields[3];
    r.corpus = fields[4];
    try {
      r.per = std::stod(fields[5]);
      r.n_ref_phones = std::stoul(fields[6]);
      r.n_edits = std::stoul(fields[7]);
    } catch (const std::exception&) {
      bad("malformed numeric field");
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---- report rendering ----

enum class ReportLayout { table1, table2 };

struct Report {
  std::string markdown;
  std::string csv;  // same grid, same cell strings
};

// Pivots corpora into columns.  table1 keys rows by (model, pretrain,
// frozen); table2 adds a budget column.  Missing cells render as an
// em dash; the frozen flag renders as N/A for rows without
// pretraining.  Later duplicates of a cell win.
inline Report render_report(const std::vector<EvalResult>& results,
                            ReportLayout layout) {
  const bool with_budget = layout == ReportLayout::table2;

  struct Row {
    std::string model, pretrain, frozen, budget;
    std::vector<std::pair<std::string, std::string>> cells;  // corpus -> per
  };
  std::vector<Row> rows;
  std::vector<std::string> corpora;

  for (const auto& r : results) {
    const std::string frozen_str =
        r.pretrain_desc == "No" ? "N/A" : (r.frozen ? "Yes" : "No");
    const std::string budget = with_budget ? r.train_budget_desc : "";
    Row* row = nullptr;
    for (auto& existing : rows)
      if (existing.model == r.model_name &&
          existing.pretrain == r.pretrain_desc &&
          existing.frozen == frozen_str && existing.budget == budget)
        row = &existing;
    if (row == nullptr) {
      rows.push_back(Row{r.model_name, r.pretrain_desc, frozen_str, budget, {}});
      row = &rows.back();
    }
    if (std::find(corpora.begin(), corpora.end(), r.corpus) == corpora.end())
      corpora.push_back(r.corpus);
    char num[32];
    std::snprintf(num, sizeof num, "%.2f", r.per);
    bool replaced = false;
    for (auto& [corpus, cell] : row->cells)
      if (corpus == r.corpus) {
        cell = num;
        replaced = true;
      }
    if (!replaced) row->cells.emplace_back(r.corpus, num);
  }

  std::vector<std::string> header{"Model", "Pre-train", "Frozen"};
  if (with_budget) header.push_back("Budget");
  header.insert(header.end(), corpora.begin(), corpora.end());

  std::vector<std::vector<std::string>> grid;
  for (const auto& row : rows) {
    std::vector<std::string> cells{row.model, row.pretrain, row.frozen};
    if (with_budget) cells.push_back(row.budget);
    for (const auto& corpus : corpora) {
      std::string v = "—";
      for (const auto& [c, cell] : row.cells)
        if (c == corpus) v = cell;
      cells.push_back(v);
    }
    grid.push_back(std::move(cells));
  }

  Report rep;
  const auto md_row = [](const std::vector<std::string>& cells) {
    std::string s = "|";
    for (const auto& c : cells) s += " " + c + " |";
    return s + "\n";
  };
  rep.markdown += md_row(header);
  std::string rule = "|";
  for (std::size_t i = 0; i < header.size(); ++i) rule += " --- |";
  rep.markdown += rule + "\n";
  for (const auto& cells : grid) rep.markdown += md_row(cells);

  const auto csv_row = [](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i)
      s += (i ? "," : "") + cells[i];
    return s + "\n";
  };
  rep.csv += csv_row(header);
  for (const auto& cells : grid) rep.csv += csv_row(cells);
  return rep;
}

}  // namespace lowra

#endif  // LOWRA_EVAL_HPP
