#include "unext/state_io.hpp"

#include <charconv>
#include <stdexcept>
#include <vector>

namespace unext {
namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(std::string_view s) {
  // std::from_chars for double is incomplete in older libstdc++; stod is fine here.
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(std::string(s), &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

int parse_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace

DensityMatrixd parse_named_state(std::string_view spec) {
  const auto parts = split(spec, ':');
  const auto& name = parts.front();
  auto expect = [&](std::size_t n) {
    if (parts.size() != n) throw std::invalid_argument("wrong number of parameters in '" + std::string(spec) + "'");
  };
  if (name == "max-entangled") {
    expect(2);
    return max_entangled(parse_int(parts[1]));
  }
  if (name == "isotropic") {
    expect(3);
    return isotropic(parse_real(parts[1]), parse_int(parts[2]));
  }
  if (name == "depolarizing-choi") {
    expect(2);
    return depolarizing_choi(parse_real(parts[1]));
  }
  if (name == "erasure") {
    expect(2);
    return erasure_output(parse_real(parts[1]));
  }
  throw std::invalid_argument("unknown state name '" + std::string(name) + "'");
}

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m, const SubsystemDims& dims) {
  nlohmann::json entries = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back({m(r, c).real(), m(r, c).imag()});
  return {{"dim", m.rows()}, {"dims", dims.values()}, {"entries", std::move(entries)}};
}

nlohmann::json state_to_json(const DensityMatrixd& rho) { return matrix_to_json(rho.matrix(), rho.dims()); }

DensityMatrixd state_from_json(const nlohmann::json& j) {
  try {
    const auto dim = j.at("dim").get<Eigen::Index>();
    const SubsystemDims dims(j.at("dims").get<std::vector<int>>());
    if (dims.total() != dim) throw std::invalid_argument("matrix JSON: product of dims differs from dim");
    const auto& entries = j.at("entries");
    if (!entries.is_array() || static_cast<Eigen::Index>(entries.size()) != dim * dim)
      throw std::invalid_argument("matrix JSON: expected dim*dim entries");
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < dim; ++c) {
        const auto& e = entries[static_cast<std::size_t>(r * dim + c)];
        if (!e.is_array() || e.size() != 2) throw std::invalid_argument("matrix JSON: entries must be [re, im] pairs");
        const double re = e[0].get<double>(), im = e[1].get<double>();
        if (!std::isfinite(re) || !std::isfinite(im)) throw std::invalid_argument("matrix JSON: non-finite entry");
        m(r, c) = {re, im};
      }
    return DensityMatrixd(m, dims);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("matrix JSON: ") + e.what());
  }
}

}  // namespace unext
