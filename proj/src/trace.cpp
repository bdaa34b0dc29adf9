#include "curvlab/trace.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace curvlab {

namespace {

using nlohmann::json;

json double_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double double_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument("metrics: bad numeric string '" + s + "'");
  }
  return j.get<double>();
}

void put_optional(json& j, const char* key, const std::optional<double>& v) {
  if (v.has_value()) j[key] = double_to_json(*v);
}

std::optional<double> get_optional(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return double_from_json(j.at(key));
}

}  // namespace

std::string metrics_to_jsonl(const std::vector<MetricsRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    json j;
    j["step"] = row.step;
    j["eta"] = double_to_json(row.eta);
    j["loss"] = double_to_json(row.loss);
    j["grad_norm"] = double_to_json(row.grad_norm);
    put_optional(j, "accuracy", row.accuracy);
    put_optional(j, "lambda1", row.lambda1);
    put_optional(j, "lambda1_residual", row.lambda1_residual);
    put_optional(j, "precond_lambda1", row.precond_lambda1);
    put_optional(j, "gradient_quotient", row.gradient_quotient);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<MetricsRow> metrics_from_jsonl(const std::string& text) {
  std::vector<MetricsRow> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    MetricsRow row;
    row.step = j.at("step").get<long long>();
    row.eta = double_from_json(j.at("eta"));
    row.loss = double_from_json(j.at("loss"));
    row.grad_norm = double_from_json(j.at("grad_norm"));
    row.accuracy = get_optional(j, "accuracy");
    row.lambda1 = get_optional(j, "lambda1");
    row.lambda1_residual = get_optional(j, "lambda1_residual");
    row.precond_lambda1 = get_optional(j, "precond_lambda1");
    row.gradient_quotient = get_optional(j, "gradient_quotient");
    rows.push_back(row);
  }
  return rows;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_param_snapshot(const std::string& dir, const ParamVector& params) {
  static_assert(sizeof(double) == 8);
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::ofstream bin(fs::path(dir) / "params.f64", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open params.f64 for writing in " + dir);
  // Little-endian on all supported targets.
  bin.write(reinterpret_cast<const char*>(params.values.data()),
            static_cast<std::streamsize>(params.values.size() * sizeof(double)));
  if (!bin) throw std::runtime_error("write failed: params.f64");

  std::ostringstream layout;
  for (const auto& seg : params.layout->segments)
    layout << seg.name << ' ' << seg.offset << ' ' << seg.rows << ' ' << seg.cols << '\n';
  write_text_file((fs::path(dir) / "params.layout").string(), layout.str());
}

ParamVector load_param_snapshot(const std::string& dir) {
  namespace fs = std::filesystem;
  auto layout = std::make_shared<ParamLayout>();
  {
    std::istringstream in(read_text_file((fs::path(dir) / "params.layout").string()));
    ParamSegment seg;
    while (in >> seg.name >> seg.offset >> seg.rows >> seg.cols)
      layout->segments.push_back(seg);
    std::size_t total = 0;
    for (const auto& s : layout->segments) total += s.size();
    layout->total = total;
  }

  std::ifstream bin(fs::path(dir) / "params.f64", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open params.f64 in " + dir);
  std::vector<double> values(layout->total);
  bin.read(reinterpret_cast<char*>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (static_cast<std::size_t>(bin.gcount()) != values.size() * sizeof(double))
    throw std::runtime_error("params.f64 truncated in " + dir);
  return ParamVector{std::move(values), layout};
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace curvlab
