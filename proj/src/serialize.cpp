#include "koopnet/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace koopnet {

using nlohmann::json;

json graph_to_json(const Digraph& g) {
  json arcs = json::array();
  for (auto [tail, head] : g.arcs()) arcs.push_back({tail + 1, head + 1});
  return {{"s", g.num_vertices()}, {"arcs", arcs}};
}

Digraph graph_from_json(const json& j) {
  std::vector<std::pair<int, int>> arcs;
  for (const auto& a : j.at("arcs"))
    arcs.emplace_back(a.at(0).get<int>() - 1, a.at(1).get<int>() - 1);
  return Digraph(j.at("s").get<int>(), std::move(arcs));
}

json dictionary_to_json(const Dictionary& d) {
  json entries = json::array();
  for (const auto& e : d.entries()) {
    switch (e.kind) {
      case Dictionary::Kind::Coordinate:
        entries.push_back({{"kind", "coordinate"}, {"coord", e.coord}});
        break;
      case Dictionary::Kind::ThinPlateRbf: {
        std::vector<double> c(e.center.data(), e.center.data() + e.center.size());
        entries.push_back({{"kind", "rbf"}, {"center", c}});
        break;
      }
      case Dictionary::Kind::Monomial: {
        std::vector<int> a(e.exponents.data(), e.exponents.data() + e.exponents.size());
        entries.push_back({{"kind", "monomial"}, {"exponents", a}});
        break;
      }
    }
  }
  return {{"dim", d.input_dim()}, {"entries", entries}};
}

Dictionary dictionary_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  std::vector<Dictionary::Entry> entries;
  for (const auto& e : j.at("entries")) {
    const std::string kind = e.at("kind").get<std::string>();
    if (kind == "coordinate") {
      entries.push_back({Dictionary::Kind::Coordinate, e.at("coord").get<int>(), {}, {}});
    } else if (kind == "rbf") {
      const auto c = e.at("center").get<std::vector<double>>();
      entries.push_back({Dictionary::Kind::ThinPlateRbf, -1,
                         Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()), {}});
    } else if (kind == "monomial") {
      const auto a = e.at("exponents").get<std::vector<int>>();
      entries.push_back({Dictionary::Kind::Monomial, -1, {},
                         Eigen::Map<const Eigen::VectorXi>(a.data(), a.size())});
    } else {
      throw std::invalid_argument("dictionary_from_json: unknown entry kind '" + kind + "'");
    }
  }
  return Dictionary(dim, std::move(entries));
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  std::vector<double> data;
  data.reserve(M.size());
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) data.push_back(M(r, c));
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: size mismatch");
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = data[r * cols + c];
  return M;
}

namespace {

json dims_to_json(const std::vector<int>& dims) { return json(dims); }

json dicts_to_json(const std::vector<Dictionary>& dicts) {
  json out = json::array();
  for (const auto& d : dicts) out.push_back(dictionary_to_json(d));
  return out;
}

std::vector<Dictionary> dicts_from_json(const json& j) {
  std::vector<Dictionary> out;
  for (const auto& d : j) out.push_back(dictionary_from_json(d));
  return out;
}

}  // namespace

json model_to_json(const AnyModel& model) {
  json j{{"format", "koopnet-model"}, {"version", 1}};
  if (const auto* m = std::get_if<GeneratorNetworkModel>(&model)) {
    j["kind"] = "mgedmd";
    j["graph"] = graph_to_json(m->graph);
    j["dims"] = dims_to_json(m->dims);
    j["dictionaries"] = dicts_to_json(m->dicts);
    j["seed"] = m->seed;
    json fams = json::array();
    for (const auto& fam : m->families) {
      json couplings = json::array();
      for (const auto& [nbr, dirs] : fam.L_dir) {
        json mats = json::array();
        for (const auto& L : dirs) mats.push_back(matrix_to_json(L));
        couplings.push_back({{"neighbour", nbr + 1}, {"matrices", mats}});
      }
      fams.push_back({{"subsystem", fam.subsystem + 1},
                      {"L0", matrix_to_json(fam.L0)},
                      {"couplings", couplings},
                      {"samples", fam.sample_count}});
    }
    j["families"] = fams;
  } else if (const auto* m = std::get_if<OperatorNetworkModel>(&model)) {
    j["kind"] = "medmd";
    j["graph"] = graph_to_json(m->graph);
    j["dims"] = dims_to_json(m->dims);
    j["dictionaries"] = dicts_to_json(m->dicts);
    j["dt"] = m->dt;
    j["seed"] = m->seed;
    json fams = json::array();
    for (const auto& fam : m->families) {
      json couplings = json::array();
      for (const auto& [nbr, K] : fam.K)
        couplings.push_back({{"neighbour", nbr + 1}, {"matrix", matrix_to_json(K)}});
      fams.push_back({{"subsystem", fam.subsystem + 1},
                      {"K0", matrix_to_json(fam.K0)},
                      {"couplings", couplings},
                      {"samples", fam.sample_count}});
    }
    j["families"] = fams;
  } else if (const auto* m = std::get_if<SedmdModel>(&model)) {
    j["kind"] = "sedmd";
    j["graph"] = graph_to_json(m->graph);
    j["dims"] = dims_to_json(m->dims);
    j["dictionaries"] = dicts_to_json(m->dicts);
    j["dt"] = m->dt;
    json closures = json::array();
    for (const auto& c : m->closures) {
      json one = json::array();
      for (int v : c) one.push_back(v + 1);
      closures.push_back(one);
    }
    j["closures"] = closures;
    json mats = json::array();
    for (const auto& K : m->K) mats.push_back(matrix_to_json(K));
    j["predictors"] = mats;
  } else if (const auto* m = std::get_if<LedmdModel>(&model)) {
    j["kind"] = "ledmd";
    j["graph"] = graph_to_json(m->graph);
    j["dims"] = dims_to_json(m->dims);
    j["dictionaries"] = dicts_to_json(m->dicts);
    j["dt"] = m->dt;
    json blocks = json::array();
    for (int i = 0; i < static_cast<int>(m->A0.size()); ++i) {
      json couplings = json::array();
      for (const auto& [key, B] : m->B)
        if (key.first == i)
          couplings.push_back({{"neighbour", key.second + 1}, {"matrix", matrix_to_json(B)}});
      blocks.push_back({{"subsystem", i + 1},
                        {"A0", matrix_to_json(m->A0[i])},
                        {"couplings", couplings}});
    }
    j["families"] = blocks;
  } else if (const auto* m = std::get_if<EdmdModel>(&model)) {
    j["kind"] = "edmd";
    j["dims"] = dims_to_json(m->dims);
    j["dictionary"] = dictionary_to_json(m->dict);
    j["K"] = matrix_to_json(m->K);
    j["dt"] = m->dt;
  }
  return j;
}

AnyModel model_from_json(const json& j) {
  if (j.value("format", "") != "koopnet-model")
    throw std::invalid_argument("model_from_json: not a koopnet model file");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "mgedmd") {
    GeneratorNetworkModel m;
    m.graph = graph_from_json(j.at("graph"));
    m.dims = j.at("dims").get<std::vector<int>>();
    m.dicts = dicts_from_json(j.at("dictionaries"));
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto& fj : j.at("families")) {
      GeneratorFamily fam;
      fam.subsystem = fj.at("subsystem").get<int>() - 1;
      fam.L0 = matrix_from_json(fj.at("L0"));
      fam.sample_count = fj.value("samples", 0);
      for (const auto& cj : fj.at("couplings")) {
        auto& dirs = fam.L_dir[cj.at("neighbour").get<int>() - 1];
        for (const auto& mj : cj.at("matrices")) dirs.push_back(matrix_from_json(mj));
      }
      m.families.push_back(std::move(fam));
    }
    return m;
  }
  if (kind == "medmd") {
    OperatorNetworkModel m;
    m.graph = graph_from_json(j.at("graph"));
    m.dims = j.at("dims").get<std::vector<int>>();
    m.dicts = dicts_from_json(j.at("dictionaries"));
    m.dt = j.at("dt").get<double>();
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto& fj : j.at("families")) {
      OperatorFamily fam;
      fam.subsystem = fj.at("subsystem").get<int>() - 1;
      fam.K0 = matrix_from_json(fj.at("K0"));
      fam.sample_count = fj.value("samples", 0);
      for (const auto& cj : fj.at("couplings"))
        fam.K[cj.at("neighbour").get<int>() - 1] = matrix_from_json(cj.at("matrix"));
      m.families.push_back(std::move(fam));
    }
    return m;
  }
  if (kind == "sedmd") {
    SedmdModel m;
    m.graph = graph_from_json(j.at("graph"));
    m.dims = j.at("dims").get<std::vector<int>>();
    m.dicts = dicts_from_json(j.at("dictionaries"));
    m.dt = j.at("dt").get<double>();
    for (const auto& cj : j.at("closures")) {
      std::vector<int> c;
      for (const auto& v : cj) c.push_back(v.get<int>() - 1);
      m.closures.push_back(std::move(c));
    }
    for (const auto& mj : j.at("predictors")) m.K.push_back(matrix_from_json(mj));
    return m;
  }
  if (kind == "ledmd") {
    LedmdModel m;
    m.graph = graph_from_json(j.at("graph"));
    m.dims = j.at("dims").get<std::vector<int>>();
    m.dicts = dicts_from_json(j.at("dictionaries"));
    m.dt = j.at("dt").get<double>();
    for (const auto& fj : j.at("families")) {
      const int i = fj.at("subsystem").get<int>() - 1;
      if (static_cast<int>(m.A0.size()) <= i) m.A0.resize(i + 1);
      m.A0[i] = matrix_from_json(fj.at("A0"));
      for (const auto& cj : fj.at("couplings"))
        m.B[{i, cj.at("neighbour").get<int>() - 1}] = matrix_from_json(cj.at("matrix"));
    }
    return m;
  }
  if (kind == "edmd") {
    EdmdModel m;
    m.dims = j.at("dims").get<std::vector<int>>();
    m.dict = dictionary_from_json(j.at("dictionary"));
    m.K = matrix_from_json(j.at("K"));
    m.dt = j.at("dt").get<double>();
    return m;
  }
  throw std::invalid_argument("model_from_json: unknown kind '" + kind + "'");
}

void save_model(const AnyModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << model_to_json(model).dump(2) << "\n";
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace koopnet
