#include "dpmseq/cli/ingest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <vector>

namespace dpmseq::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(std::string_view(line).substr(
        start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

} // namespace

Dataset parse_dataset(std::istream& in, const IngestOptions& opts) {
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t ncols = 0, lineno = 0, rows = 0;
  bool first = true;
  bool has_labels = opts.label_column.value_or(false);
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t.rfind("//", 0) == 0) continue;
    auto fields = split(t, opts.delimiter);
    if (first) {
      first = false;
      bool header = false;
      if (opts.header) {
        header = *opts.header;
      } else {
        header = true;
        for (const auto& f : fields)
          if (to_double(f)) header = false;
      }
      if (header) {
        if (!opts.label_column && fields.size() >= 2 && fields.back() == "label")
          has_labels = true;
        ncols = fields.size();
        continue;
      }
    }
    if (ncols == 0) ncols = fields.size();
    if (fields.size() != ncols)
      throw IngestError(lineno, "expected " + std::to_string(ncols) +
                                    " columns, found " +
                                    std::to_string(fields.size()));
    const std::size_t d = has_labels ? ncols - 1 : ncols;
    if (d == 0) throw IngestError(lineno, "no numeric columns");
    for (std::size_t k = 0; k < d; ++k) {
      const auto v = to_double(fields[k]);
      if (!v || !std::isfinite(*v))
        throw IngestError(lineno, "field " + std::to_string(k + 1) +
                                      " is not a finite number: '" +
                                      fields[k] + "'");
      values.push_back(*v);
    }
    if (has_labels) {
      int lab = 0;
      const auto& f = fields.back();
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), lab);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw IngestError(lineno, "label is not an integer: '" + f + "'");
      labels.push_back(lab);
    }
    ++rows;
  }
  if (rows == 0) throw IngestError(lineno, "no data rows");
  const std::size_t d = has_labels ? ncols - 1 : ncols;
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  std::copy(values.begin(), values.end(), m.data());
  return Dataset(std::move(m), std::move(labels));
}

Dataset ingest(const std::string& path, const IngestOptions& opts) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return parse_dataset(f, opts);
}

} // namespace dpmseq::cli
