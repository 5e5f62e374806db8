#include "hearthlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hearthlab/errors.hpp"

namespace hearth {

std::string format_fixed(double value, int digits) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value,
                                 std::chars_format::fixed, digits);
  if (ec != std::errc()) throw std::runtime_error("format_fixed overflow");
  std::string out(buf, ptr);
  if (out.rfind("-0.", 0) == 0 &&
      out.find_first_not_of("0.", 1) == std::string::npos) {
    out.erase(0, 1);  // no negative zero
  }
  return out;
}

std::string format_shortest(double value) {
  if (std::isnan(value)) return "nan";
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_shortest overflow");
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, int line) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(),
                                   value);
  if (ec != std::errc() || ptr != field.data() + field.size() ||
      field.empty()) {
    throw LoadError("csv line " + std::to_string(line) + ": bad number '" +
                    std::string(field) + "'");
  }
  return value;
}

std::string csv_cell(double v, int digits) {
  return std::isnan(v) ? std::string() : format_fixed(v, digits);
}

}  // namespace

std::string curve_csv(const LearningCurve& curve) {
  std::string out = "episode,total_reward,steps,success\n";
  for (std::size_t e = 0; e < curve.size(); ++e) {
    out += std::to_string(e) + "," + format_shortest(curve.totals[e]) + "," +
           std::to_string(curve.steps[e]) + "," +
           (curve.successes[e] ? "1" : "0") + "\n";
  }
  return out;
}

CsvTable parse_csv(std::string_view text) {
  if (text.empty() || text.back() != '\n') {
    throw LoadError("csv must end with a newline");
  }
  if (text.find('\r') != std::string_view::npos) {
    throw LoadError("csv must use \\n line endings");
  }
  CsvTable table;
  std::size_t start = 0;
  int line = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view row = text.substr(start, end - start);
    start = end + 1;
    ++line;
    std::vector<std::string> fields;
    for (auto f : split(row, ',')) fields.emplace_back(f);
    if (line == 1) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw LoadError("csv line " + std::to_string(line) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

LearningCurve parse_curve_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  const std::vector<std::string> expected{"episode", "total_reward", "steps",
                                          "success"};
  if (table.header != expected) throw LoadError("unexpected curve csv header");
  LearningCurve curve;
  int line = 1;
  for (const auto& row : table.rows) {
    ++line;
    if (parse_number<long>(row[0], line) !=
        static_cast<long>(curve.size())) {
      throw LoadError("csv line " + std::to_string(line) +
                      ": episodes must count up from 0");
    }
    curve.totals.push_back(parse_number<double>(row[1], line));
    curve.steps.push_back(parse_number<int>(row[2], line));
    if (row[3] != "0" && row[3] != "1") {
      throw LoadError("csv line " + std::to_string(line) +
                      ": success must be 0 or 1");
    }
    curve.successes.push_back(row[3] == "1" ? 1 : 0);
  }
  return curve;
}

std::string matrix_csv(const std::vector<std::string>& rows,
                       const std::vector<std::string>& cols,
                       const std::vector<double>& values, int digits) {
  std::string out = "source\\target";
  for (const auto& c : cols) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += rows[r];
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out += "," + csv_cell(values[r * cols.size() + c], digits);
    }
    out += "\n";
  }
  return out;
}

namespace {

struct Rgb {
  double r, g, b;
};

Rgb lerp(Rgb a, Rgb b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

std::string hex(Rgb c) {
  auto byte = [](double v) {
    return static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0)));
  };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", byte(c.r), byte(c.g),
                byte(c.b));
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string heatmap_svg(const std::string& title,
                        const std::vector<std::string>& rows,
                        const std::vector<std::string>& cols,
                        const std::vector<double>& values, double anchor) {
  constexpr int kCell = 64;
  constexpr int kLeft = 120;
  constexpr int kTop = 64;
  const Rgb warm{178, 24, 43};
  const Rgb cool{33, 102, 172};
  const Rgb white{247, 247, 247};

  double span = 0.0;
  for (double v : values) {
    if (!std::isnan(v)) span = std::max(span, std::abs(v - anchor));
  }
  if (span == 0.0) span = 1.0;

  const int width = kLeft + kCell * static_cast<int>(cols.size()) + 16;
  const int height = kTop + kCell * static_cast<int>(rows.size()) + 16;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"8\" y=\"20\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";
  svg << "<text x=\"8\" y=\"" << kTop - 10 << "\" fill=\"#555555\">"
      << "source \\ target</text>\n";
  for (std::size_t c = 0; c < cols.size(); ++c) {
    svg << "<text x=\"" << kLeft + kCell * c + kCell / 2 << "\" y=\""
        << kTop - 10 << "\" text-anchor=\"middle\">" << xml_escape(cols[c])
        << "</text>\n";
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t y = kTop + kCell * r;
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + kCell / 2 + 4
        << "\" text-anchor=\"end\">" << xml_escape(rows[r]) << "</text>\n";
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::size_t x = kLeft + kCell * c;
      const double v = values[r * cols.size() + c];
      std::string fill = "#cccccc";
      std::string label = "n/a";
      std::string ink = "#000000";
      if (!std::isnan(v)) {
        const double t = std::clamp((v - anchor) / span, -1.0, 1.0);
        fill = hex(t >= 0 ? lerp(white, warm, t) : lerp(white, cool, -t));
        label = format_fixed(v, 2);
        if (std::abs(t) > 0.6) ink = "#ffffff";
      }
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell
          << "\" height=\"" << kCell << "\" fill=\"" << fill
          << "\" stroke=\"#ffffff\"/>\n";
      svg << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 4
          << "\" text-anchor=\"middle\" fill=\"" << ink << "\">" << label
          << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string correlations_csv(const TransferReport& report) {
  std::string out = "target,n_sources";
  for (const auto& m : report.ratios) {
    out += ",rho_ep" + std::to_string(m.checkpoint);
  }
  out += "\n";
  for (const auto& tc : report.correlations) {
    out += tc.target + "," + std::to_string(tc.n_sources);
    for (double r : tc.rho) out += "," + format_fixed(r, 3);
    out += "\n";
  }
  return out;
}

std::string forgetting_csv(const TransferReport& report) {
  std::string out = "target";
  for (const auto& m : report.ratios) {
    out += ",mean_ratio_ep" + std::to_string(m.checkpoint);
  }
  for (const auto& m : report.ratios) {
    out += ",positive_ep" + std::to_string(m.checkpoint);
  }
  out += "\n";
  const std::size_t nt = report.targets.size();
  for (std::size_t t = 0; t < nt; ++t) {
    std::string means, positives;
    for (std::size_t c = 0; c < report.ratios.size(); ++c) {
      double sum = 0.0;
      int n = 0;
      int positive = 0;
      for (std::size_t s = 0; s < report.sources.size(); ++s) {
        if (report.sources[s] == report.targets[t]) continue;
        const double r = report.ratio(c, s, t);
        if (std::isnan(r)) continue;
        sum += r;
        ++n;
        positive += r > 1.0 ? 1 : 0;
      }
      means += "," + format_fixed(n ? sum / n : std::nan(""), 3);
      positives += "," + std::to_string(positive);
    }
    out += report.targets[t] + means + positives + "\n";
  }
  return out;
}

void write_text_file(const std::string& path, std::string_view content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_report(const TransferReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  for (const NamedCurve& c : report.curves) {
    write_text_file((root / "curves" / (c.stem + ".csv")).string(),
                    curve_csv(c.curve));
  }
  write_text_file((root / "matrix_sim.csv").string(),
                  matrix_csv(report.sources, report.targets,
                             report.similarity_st, 3));
  write_text_file((root / "heatmap_sim.svg").string(),
                  heatmap_svg("Similarity of activity descriptions",
                              report.sources, report.targets,
                              report.similarity_st, 0.0));
  for (const RatioMatrix& m : report.ratios) {
    const std::string tag = "ep" + std::to_string(m.checkpoint);
    write_text_file((root / ("matrix_ratio_" + tag + ".csv")).string(),
                    matrix_csv(report.sources, report.targets, m.values, 3));
    write_text_file(
        (root / ("heatmap_ratio_" + tag + ".svg")).string(),
        heatmap_svg("Transfer ratio, first " + std::to_string(m.checkpoint) +
                        " episodes",
                    report.sources, report.targets, m.values, 1.0));
  }
  write_text_file((root / "correlations.csv").string(),
                  correlations_csv(report));
  write_text_file((root / "forgetting.csv").string(), forgetting_csv(report));
}

namespace {

nlohmann::json dense_json(const Dense& d) {
  return {{"in", d.in}, {"out", d.out}, {"w", d.w}, {"b", d.b}};
}

Dense dense_from(const nlohmann::json& j) {
  Dense d(j.at("in").get<int>(), j.at("out").get<int>());
  d.w = j.at("w").get<std::vector<double>>();
  d.b = j.at("b").get<std::vector<double>>();
  if (d.w.size() != std::size_t(d.in) * d.out ||
      d.b.size() != std::size_t(d.out)) {
    throw LoadError("policy layer has inconsistent shape");
  }
  return d;
}

}  // namespace

std::string params_to_json(const PolicyParams& p) {
  nlohmann::json j = {{"format", "hearthlab-policy-1"},
                      {"trunk1", dense_json(p.trunk1)},
                      {"trunk2", dense_json(p.trunk2)},
                      {"prim_head", dense_json(p.prim_head)},
                      {"obj_head", dense_json(p.obj_head)},
                      {"value_head", dense_json(p.value_head)}};
  return j.dump() + "\n";
}

PolicyParams params_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object() || j.value("format", "") != "hearthlab-policy-1") {
      throw LoadError("not a hearthlab-policy-1 file");
    }
    PolicyParams p;
    p.trunk1 = dense_from(j.at("trunk1"));
    p.trunk2 = dense_from(j.at("trunk2"));
    p.prim_head = dense_from(j.at("prim_head"));
    p.obj_head = dense_from(j.at("obj_head"));
    p.value_head = dense_from(j.at("value_head"));
    const int h = p.hidden_dim();
    if (p.trunk2.in != h || p.trunk2.out != h || p.prim_head.in != h ||
        p.prim_head.out != kNumPrimitives || p.obj_head.in != h ||
        p.value_head.in != h || p.value_head.out != 1) {
      throw LoadError("policy layers do not chain");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed policy file: ") + e.what());
  }
}

}  // namespace hearth
