#include <algorithm>
#include <map>
#include <sstream>

#include "phase.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::pipeline {

namespace fs = std::filesystem;

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw HarnessFault("csv column '" + name + "' not found");
  }
};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Table read_csv(const fs::path& path) {
  Table t;
  std::stringstream ss(corpus::read_text(path));
  std::string line;
  if (std::getline(ss, line)) t.header = split_line(line);
  while (std::getline(ss, line)) {
    if (!line.empty()) t.rows.push_back(split_line(line));
  }
  return t;
}

// Projects `columns` of `t`, prefixed by constant leading cells.
std::string project(const Table& t, const std::vector<std::string>& columns, const std::string& prefix = "",
                    std::size_t epoch_offset = 0) {
  std::vector<std::size_t> idx;
  for (const auto& c : columns) idx.push_back(t.column(c));
  std::string out;
  for (const auto& row : t.rows) {
    out += prefix;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i) out += ",";
      std::string cell = idx[i] < row.size() ? row[idx[i]] : "";
      if (i == 0 && epoch_offset) cell = std::to_string(std::stoul(cell) + epoch_offset);
      out += cell;
    }
    out += "\n";
  }
  return out;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
  return out;
}

}  // namespace

void cmd_report(const CommandContext& ctx) {
  detail::Phase ph(ctx, "report");
  std::size_t written = 0;
  auto emit = [&](const std::string& rel, const std::string& text) {
    ph.write(rel, text);
    ++written;
  };

  if (fs::exists(ph.path("measure.csv"))) emit("report/table1.csv", corpus::read_text(ph.path("measure.csv")));

  // Discriminator pre-training curve: batch values and their moving average
  // per epoch.
  const std::vector<std::string> curve = {"epoch", "u_d", "u_theta", "d_a", "d_s",
                                          "ema_u_d", "ema_u_theta", "ema_d_a", "ema_d_s"};
  std::size_t pretrain_epochs = 0;
  if (fs::exists(ph.path("disc_log.csv"))) {
    const auto log = read_csv(ph.path("disc_log.csv"));
    pretrain_epochs = log.rows.size();
    emit("report/fig2_pretrain.csv", join(curve) + "\n" + project(log, curve));
  }

  // Pre-training curve followed by the re-trained discriminator of every HW
  // cell; epochs continue after the end of pre-training.
  if (fs::exists(ph.path("hw/d_s.csv"))) {
    emit("report/table2_d_s.csv", corpus::read_text(ph.path("hw/d_s.csv")));
    emit("report/table2_d_a.csv", corpus::read_text(ph.path("hw/d_a.csv")));
    const std::vector<std::string> cols = {"epoch", "d_s", "ema_d_s", "d_a", "ema_d_a"};
    std::string fig3 = "series," + join(cols) + "\n";
    if (fs::exists(ph.path("disc_log.csv"))) fig3 += project(read_csv(ph.path("disc_log.csv")), cols, "pretrain,");
    if (fs::exists(ph.path("hw/logs"))) {
      std::vector<fs::path> logs;
      for (const auto& e : fs::directory_iterator(ph.path("hw/logs"))) logs.push_back(e.path());
      std::sort(logs.begin(), logs.end());
      for (const auto& p : logs) {
        fig3 += project(read_csv(p), cols, p.stem().string() + ",", pretrain_epochs);
      }
    }
    emit("report/fig3_hw.csv", fig3);
  }

  for (const char* mode : {"pg", "relax"}) {
    const std::string rel = std::string("gan_") + mode + "/third_party.csv";
    if (!fs::exists(ph.path(rel))) continue;
    const std::vector<std::string> cols = {"round", "d_s", "d_a", "u_d", "u_theta", "accuracy"};
    emit(std::string("report/fig4_") + mode + ".csv", join(cols) + "\n" + project(read_csv(ph.path(rel)), cols));
  }

  if (written == 0) throw ParameterError("report: no experiment outputs found in " + ctx.out.string());
  ph.finish();
  fs::copy_file(ph.path(kManifestName), ph.path("report/manifest.json"), fs::copy_options::overwrite_existing);
}

}  // namespace seqdisc::pipeline
