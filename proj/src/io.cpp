#include "histoboost/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace histoboost {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

bool parse_int(std::string_view text, long long& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void fail_at(const std::string& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return fields;
}

std::ifstream open_or_fail(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

RawDataset load_csv(const std::string& path, const std::string& label_column, bool has_header) {
  std::ifstream in = open_or_fail(path);
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> names;
  std::size_t width = 0;
  long long label_index = -1;

  if (has_header) {
    if (!std::getline(in, line)) fail_at(path, 1, "missing header line");
    ++line_no;
    for (auto f : split_csv_line(line)) names.emplace_back(f);
    width = names.size();
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j] == label_column) label_index = static_cast<long long>(j);
    }
  }
  if (label_index < 0) {
    long long idx;
    if (parse_int(label_column, idx)) {
      label_index = idx;
    } else if (has_header) {
      throw std::runtime_error(path + ": no column named '" + label_column + "'");
    } else {
      throw std::runtime_error(path + ": label must be a column index when there is no header");
    }
  }
  if (label_index < 0 || (width > 0 && label_index >= static_cast<long long>(width))) {
    throw std::runtime_error(path + ": label index " + std::to_string(label_index) +
                             " out of range");
  }

  RawDataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (width == 0) {
      width = fields.size();
      if (label_index >= static_cast<long long>(width)) {
        fail_at(path, line_no, "label index " + std::to_string(label_index) + " out of range");
      }
    }
    if (fields.size() != width) {
      fail_at(path, line_no,
              "expected " + std::to_string(width) + " fields, got " +
                  std::to_string(fields.size()));
    }
    if (data.columns.empty()) {
      data.columns.resize(width - 1);
      for (std::size_t j = 0; j < width; ++j) {
        if (static_cast<long long>(j) == label_index) continue;
        if (has_header) {
          data.feature_names.push_back(names[j]);
        } else {
          data.feature_names.push_back("c" + std::to_string(j));
        }
      }
    }
    std::size_t col = 0;
    for (std::size_t j = 0; j < width; ++j) {
      double v;
      if (fields[j].empty()) {
        v = std::numeric_limits<double>::quiet_NaN();
      } else if (!parse_double(fields[j], v)) {
        fail_at(path, line_no, "non-numeric field '" + std::string(fields[j]) + "'");
      }
      if (static_cast<long long>(j) == label_index) {
        if (std::isnan(v)) fail_at(path, line_no, "label value is missing");
        data.targets.push_back(v);
      } else {
        data.columns[col++].push_back(v);
      }
    }
  }
  return data;
}

RawDataset load_libsvm(const std::string& path) {
  std::ifstream in = open_or_fail(path);
  std::string line;
  std::size_t line_no = 0;

  std::vector<double> targets;
  // (row, column, value) triplets until the width is known.
  std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty() || rest.front() == '#') continue;
    std::size_t row = targets.size();

    std::size_t token_no = 0;
    long long prev_index = 0;
    while (!rest.empty()) {
      std::size_t sp = rest.find_first_of(" \t");
      std::string_view token = rest.substr(0, sp);
      rest = sp == std::string_view::npos ? std::string_view{} : trim(rest.substr(sp + 1));
      if (token.empty()) continue;

      if (token_no == 0) {
        double label;
        if (!parse_double(token, label)) {
          fail_at(path, line_no, "bad label '" + std::string(token) + "'");
        }
        targets.push_back(label);
      } else {
        std::size_t colon = token.find(':');
        if (colon == std::string_view::npos) {
          fail_at(path, line_no, "expected index:value, got '" + std::string(token) + "'");
        }
        long long index;
        double value;
        if (!parse_int(token.substr(0, colon), index) || index < 1) {
          fail_at(path, line_no, "feature indices are 1-based integers");
        }
        if (!parse_double(token.substr(colon + 1), value)) {
          fail_at(path, line_no, "bad feature value in '" + std::string(token) + "'");
        }
        if (index <= prev_index) {
          fail_at(path, line_no, "feature indices must be strictly increasing");
        }
        prev_index = index;
        std::size_t col = static_cast<std::size_t>(index - 1);  // to 0-based
        width = std::max(width, col + 1);
        cells.emplace_back(row, col, value);
      }
      ++token_no;
    }
  }

  RawDataset data;
  data.targets = std::move(targets);
  data.columns.assign(width, std::vector<double>(data.targets.size(), 0.0));
  for (auto& [row, col, value] : cells) data.columns[col][row] = value;
  for (std::size_t j = 0; j < width; ++j) {
    data.feature_names.push_back("f" + std::to_string(j + 1));
  }
  return data;
}

void save_csv(const RawDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "label";
  for (const auto& name : data.feature_names) out << ',' << name;
  out << '\n';
  for (std::int64_t i = 0; i < data.num_rows(); ++i) {
    out << format_double(data.targets[static_cast<std::size_t>(i)]);
    for (const auto& col : data.columns) {
      double v = col[static_cast<std::size_t>(i)];
      out << ',';
      if (!std::isnan(v)) out << format_double(v);
    }
    out << '\n';
  }
}

std::string model_to_string(const Model& model) {
  std::ostringstream out;
  out << "version 1\n";
  out << "loss " << (model.loss == LossKind::squared ? "squared" : "logistic") << '\n';
  out << "learning_rate " << format_double(model.learning_rate) << '\n';
  out << "initial_score " << format_double(model.initial_score) << '\n';
  out << "num_trees " << model.trees.size() << '\n';
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& nodes = model.trees[t].nodes();
    out << "tree " << t << ' ' << nodes.size() << '\n';
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const TreeNode& node = nodes[n];
      out << "node " << n << ' ';
      if (node.is_leaf()) {
        out << "leaf 0 -1 -1 " << format_double(node.value);
      } else {
        out << node.feature << ' ' << format_double(node.threshold_value) << ' ' << node.left
            << ' ' << node.right << " 0";
      }
      out << '\n';
    }
  }
  return out.str();
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << model_to_string(model);
  if (!out) throw std::runtime_error("failed writing " + path);
}

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  // Next non-empty line split on single spaces.
  std::vector<std::string> next(const std::string& expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::string_view t = trim(line);
      if (t.empty()) continue;
      std::vector<std::string> tokens;
      std::istringstream ss{std::string(t)};
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      return tokens;
    }
    fail_at(path_, line_no_, "unexpected end of file, expected " + expected);
  }

  [[noreturn]] void fail(const std::string& what) { fail_at(path_, line_no_, what); }

 private:
  std::istream& in_;
  std::string path_;
  std::size_t line_no_ = 0;
};

std::string expect_kv(LineReader& r, const std::string& key) {
  auto tokens = r.next(key);
  if (tokens.size() != 2 || tokens[0] != key) r.fail("expected '" + key + " <value>'");
  return tokens[1];
}

Model parse_model(std::istream& in, const std::string& path) {
  LineReader r(in, path);
  if (expect_kv(r, "version") != "1") r.fail("unsupported model version");
  Model model;
  model.loss = loss_from_name(expect_kv(r, "loss"));
  if (!parse_double(expect_kv(r, "learning_rate"), model.learning_rate)) {
    r.fail("bad learning_rate");
  }
  if (!parse_double(expect_kv(r, "initial_score"), model.initial_score)) {
    r.fail("bad initial_score");
  }
  long long num_trees;
  if (!parse_int(expect_kv(r, "num_trees"), num_trees) || num_trees < 0) {
    r.fail("bad num_trees");
  }

  for (long long t = 0; t < num_trees; ++t) {
    auto header = r.next("tree header");
    long long id, num_nodes;
    if (header.size() != 3 || header[0] != "tree" || !parse_int(header[1], id) || id != t ||
        !parse_int(header[2], num_nodes) || num_nodes < 1) {
      r.fail("expected 'tree " + std::to_string(t) + " <num_nodes>'");
    }
    Tree tree;
    for (long long n = 0; n < num_nodes; ++n) {
      auto tok = r.next("node line");
      if (tok.size() != 7 || tok[0] != "node") r.fail("expected a 7-field node line");
      long long node_id, left, right;
      double threshold, leaf_value;
      if (!parse_int(tok[1], node_id) || node_id != n) r.fail("node ids must be sequential");
      if (!parse_double(tok[3], threshold) || !parse_int(tok[4], left) ||
          !parse_int(tok[5], right) || !parse_double(tok[6], leaf_value)) {
        r.fail("malformed node line");
      }
      TreeNode node;
      if (tok[2] == "leaf") {
        node.value = leaf_value;
      } else {
        long long feature;
        if (!parse_int(tok[2], feature) || feature < 0) r.fail("bad feature id");
        if (left < 0 || left >= num_nodes || right < 0 || right >= num_nodes) {
          r.fail("child index out of range");
        }
        node.feature = static_cast<int>(feature);
        node.threshold_value = threshold;
        node.left = static_cast<int>(left);
        node.right = static_cast<int>(right);
      }
      tree.nodes().push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace

Model load_model(const std::string& path) {
  std::ifstream in = open_or_fail(path);
  return parse_model(in, path);
}

Model model_from_string(const std::string& text) {
  std::istringstream in(text);
  return parse_model(in, "<model>");
}

void save_predictions(const std::vector<double>& values, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (double v : values) out << format_double(v) << '\n';
}

std::vector<double> load_value_lines(const std::string& path) {
  std::ifstream in = open_or_fail(path);
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view t = trim(line);
    if (t.empty()) continue;
    double v;
    if (!parse_double(t, v)) fail_at(path, line_no, "expected one number per line");
    out.push_back(v);
  }
  return out;
}

RawDataset load_dataset(const std::string& path, const std::string& format,
                        const std::string& label_column, bool has_header) {
  std::string fmt = format;
  if (fmt.empty() || fmt == "auto") {
    std::ifstream in = open_or_fail(path);
    std::string line;
    fmt = "csv";
    while (std::getline(in, line)) {
      std::string_view t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      // "idx:value" pairs mark libsvm; a csv line has commas and no colons.
      if (t.find(':') != std::string_view::npos) fmt = "libsvm";
      break;
    }
  }
  if (fmt == "csv") return load_csv(path, label_column, has_header);
  if (fmt == "libsvm") return load_libsvm(path);
  throw std::invalid_argument("unknown data format: " + fmt);
}

}  // namespace histoboost
