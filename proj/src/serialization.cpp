#include "caslab/serialization.hpp"

#include <stdexcept>
#include <string>

namespace caslab {

using nlohmann::json;

namespace {

std::vector<double> number_array(const json& doc, const char* key, std::size_t expected) {
    if (!doc.contains(key) || !doc[key].is_array()) {
        throw std::invalid_argument(std::string("serialization: missing array '") + key + "'");
    }
    const auto& arr = doc[key];
    if (arr.size() != expected) {
        throw std::invalid_argument(std::string("serialization: '") + key + "' has " + std::to_string(arr.size()) +
                                    " entries, expected " + std::to_string(expected));
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& v : arr) {
        if (!v.is_number()) throw std::invalid_argument(std::string("serialization: non-numeric entry in '") + key + "'");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<int> read_dims(const json& doc) {
    if (!doc.is_object() || !doc.contains("dims") || !doc["dims"].is_array() || doc["dims"].empty()) {
        throw std::invalid_argument("serialization: 'dims' must be a non-empty array");
    }
    std::vector<int> dims;
    for (const auto& d : doc["dims"]) {
        if (!d.is_number_integer() || d.get<long long>() < 1) {
            throw std::invalid_argument("serialization: dims must be positive integers");
        }
        dims.push_back(d.get<int>());
    }
    return dims;
}

json complex_arrays(const cplx* data, std::size_t n) {
    json re = json::array(), im = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        re.push_back(data[i].real());
        im.push_back(data[i].imag());
    }
    return json{{"re", re}, {"im", im}};
}

Matrix row_major(const json& doc, Eigen::Index rows, Eigen::Index cols) {
    const auto n = static_cast<std::size_t>(rows * cols);
    auto re = number_array(doc, "re", n);
    auto im = number_array(doc, "im", n);
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto k = static_cast<std::size_t>(r * cols + c);
            m(r, c) = cplx(re[k], im[k]);
        }
    }
    return m;
}

json row_major_json(const Matrix& m) {
    std::vector<cplx> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    return complex_arrays(flat.data(), flat.size());
}

}  // namespace

json to_json(const StateVector& psi) {
    json doc{{"dims", psi.layout().dims()}};
    doc.update(complex_arrays(psi.amplitudes().data(), psi.dim()));
    return doc;
}

json to_json(const DensityMatrix& rho) {
    json doc{{"dims", rho.layout().dims()}};
    doc.update(row_major_json(rho.matrix()));
    return doc;
}

json matrix_to_json(const Matrix& m) {
    json doc{{"dims", {m.rows(), m.cols()}}};
    doc.update(row_major_json(m));
    return doc;
}

StateVector state_from_json(const json& doc) {
    SubsystemLayout layout(read_dims(doc));
    const auto n = layout.total_dim();
    auto re = number_array(doc, "re", n);
    auto im = number_array(doc, "im", n);
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = cplx(re[i], im[i]);
    return StateVector(v, layout);
}

DensityMatrix density_from_json(const json& doc) {
    SubsystemLayout layout(read_dims(doc));
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    return DensityMatrix(row_major(doc, d, d), layout);
}

Matrix matrix_from_json(const json& doc) {
    auto dims = read_dims(doc);
    if (dims.size() != 2) throw std::invalid_argument("serialization: operator dims must be [rows, cols]");
    return row_major(doc, dims[0], dims[1]);
}

json to_json(const SpinChainHamiltonian& h) {
    const auto& p = h.params();
    json params{{"coupling", p.coupling},
                {"length", p.length},
                {"transverse_field", p.transverse_field},
                {"boundary", p.boundary == Boundary::open ? "open" : "periodic"}};
    params["ruggedness"] = p.ruggedness ? json(*p.ruggedness) : json(nullptr);
    params["seed"] = p.seed ? json(*p.seed) : json(nullptr);
    return json{{"model", to_string(h.kind())}, {"params", params}, {"matrix", matrix_to_json(h.matrix())}};
}

json to_json(const SpectralStats& stats) {
    return json{{"brody_q", stats.brody_q},
                {"regime", to_string(stats.regime)},
                {"fit_accepted", stats.fit_accepted},
                {"levels", stats.eigenvalues.size()},
                {"spacings", stats.spacings.size()},
                {"warnings", stats.warnings}};
}

json to_json(const WeakMeasurementSetup& setup) {
    return json{{"observable", matrix_to_json(setup.observable)},
                {"coupling", setup.coupling},
                {"pointer_sigma", setup.pointer_sigma},
                {"grid", {{"points", setup.grid.points}, {"extent_sigmas", setup.grid.extent_sigmas}}}};
}

}  // namespace caslab
