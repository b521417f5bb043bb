#include "heirs/experiments/matrix_io.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace heirs {

void write_matrices(std::ostream& out, const std::vector<NamedMatrix>& matrices) {
  nlohmann::json doc;
  doc["matrices"] = nlohmann::json::array();
  for (const NamedMatrix& m : matrices) {
    nlohmann::json data = nlohmann::json::array();
    for (Index j = 0; j < m.value.cols(); ++j)
      for (Index i = 0; i < m.value.rows(); ++i) data.push_back({m.value(i, j).real(), m.value(i, j).imag()});
    doc["matrices"].push_back({{"name", m.name}, {"rows", m.value.rows()}, {"cols", m.value.cols()}, {"data", data}});
  }
  out << doc.dump(1) << '\n';
}

void write_matrices(const std::string& path, const std::vector<NamedMatrix>& matrices) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrices(out, matrices);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<NamedMatrix> read_matrices(std::istream& in) {
  const nlohmann::json doc = nlohmann::json::parse(in);
  std::vector<NamedMatrix> out;
  for (const auto& m : doc.at("matrices")) {
    const Index rows = m.at("rows").get<Index>(), cols = m.at("cols").get<Index>();
    const auto& data = m.at("data");
    if (static_cast<Index>(data.size()) != rows * cols) throw std::invalid_argument("matrix data size mismatch");
    CMatrix x(rows, cols);
    for (Index k = 0; k < rows * cols; ++k)
      x(k % rows, k / rows) = Complex(data[k].at(0).get<double>(), data[k].at(1).get<double>());
    out.push_back({m.at("name").get<std::string>(), std::move(x)});
  }
  return out;
}

std::string phase_bit_pattern(const CVector& phases) {
  std::string s;
  for (Index m = 0; m < phases.size(); ++m) s += phases(m).real() < 0.0 ? '1' : '0';
  return s;
}

}  // namespace heirs
