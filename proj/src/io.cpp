#include "tentlab/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tentlab {

std::string serialize_field(const SpaceTimeField& f) {
    nlohmann::json j;
    j["grid"] = {{"dim", f.grid.dim()}, {"n", f.grid.points_per_axis()},
                 {"period", f.grid.period()}};
    j["time"] = {{"t_min", f.time_grid.t_min()}, {"t_max", f.time_grid.t_max()},
                 {"ratio", f.time_grid.ratio()}};
    j["components"] = f.components();
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& v : f.values) {
        nlohmann::json nodes = nlohmann::json::array();
        for (int k = 0; k < v.rows(); ++k) {
            nlohmann::json cells = nlohmann::json::array();
            for (int c = 0; c < v.cols(); ++c) {
                cells.push_back({v(k, c).real(), v(k, c).imag()});
            }
            nodes.push_back(std::move(cells));
        }
        comps.push_back(std::move(nodes));
    }
    j["values"] = std::move(comps);
    return j.dump();
}

SpaceTimeField deserialize_field(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Grid grid(j.at("grid").at("dim").get<int>(), j.at("grid").at("n").get<int>(),
              j.at("grid").at("period").get<double>());
    TimeGrid tg = build_time_grid(j.at("time").at("t_min").get<double>(),
                                  j.at("time").at("t_max").get<double>(),
                                  j.at("time").at("ratio").get<double>());
    const int components = j.at("components").get<int>();
    SpaceTimeField f(grid, tg, components);
    const auto& comps = j.at("values");
    if (static_cast<int>(comps.size()) != components) {
        throw std::invalid_argument("field file: component count mismatch");
    }
    for (int a = 0; a < components; ++a) {
        const auto& nodes = comps.at(a);
        if (static_cast<int>(nodes.size()) != tg.num_nodes()) {
            throw std::invalid_argument("field file: node count mismatch");
        }
        for (int k = 0; k < tg.num_nodes(); ++k) {
            const auto& cells = nodes.at(k);
            if (static_cast<int>(cells.size()) != grid.num_cells()) {
                throw std::invalid_argument("field file: cell count mismatch");
            }
            for (int c = 0; c < grid.num_cells(); ++c) {
                f.values[a](k, c) = Complex(cells.at(c).at(0).get<double>(),
                                            cells.at(c).at(1).get<double>());
            }
        }
    }
    f.check_finite();
    return f;
}

void save_field(const std::string& path, const SpaceTimeField& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write field file " + path);
    out << serialize_field(f);
}

SpaceTimeField load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read field file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_field(buf.str());
}

}  // namespace tentlab
