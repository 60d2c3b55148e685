#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tentlab/duhamel.hpp"
#include "tentlab/harness.hpp"
#include "tentlab/io.hpp"

namespace py = pybind11;
using namespace tentlab;

PYBIND11_MODULE(_tentlab, m) {
    m.doc() = "discrete torus laboratory: parabolic solution operators and "
              "tent-space norms";

    py::class_<Grid>(m, "Grid")
        .def(py::init<int, int, double>(), py::arg("dim"), py::arg("n"),
             py::arg("period"))
        .def_property_readonly("dim", &Grid::dim)
        .def_property_readonly("n", &Grid::points_per_axis)
        .def_property_readonly("period", &Grid::period)
        .def_property_readonly("spacing", &Grid::spacing)
        .def_property_readonly("num_cells", &Grid::num_cells)
        .def("cell_center", &Grid::cell_center);

    py::class_<TimeGrid>(m, "TimeGrid")
        .def_property_readonly("t_min", &TimeGrid::t_min)
        .def_property_readonly("t_max", &TimeGrid::t_max)
        .def_property_readonly("num_nodes", &TimeGrid::num_nodes)
        .def("node", &TimeGrid::node)
        .def_property_readonly("nodes", &TimeGrid::nodes);

    m.def("build_time_grid", &build_time_grid, py::arg("t_min"), py::arg("t_max"),
          py::arg("ratio"));
    m.def("torus_distance",
          py::overload_cast<const Grid&, const Point&, const Point&>(&torus_distance));
    m.def("ball_cells", [](const Grid& g, const Point& c, double r) {
        return ball_indices(g, c, r).cells;
    });

    py::class_<CoefficientParams>(m, "CoefficientParams")
        .def(py::init<>())
        .def_readwrite("lo", &CoefficientParams::lo)
        .def_readwrite("hi", &CoefficientParams::hi)
        .def_readwrite("period_cells", &CoefficientParams::period_cells)
        .def_readwrite("spread", &CoefficientParams::spread)
        .def_readwrite("epsilon", &CoefficientParams::epsilon);

    py::class_<CoefficientField>(m, "CoefficientField")
        .def_property_readonly("lambda0", &CoefficientField::lambda0)
        .def_property_readonly("lambda1", &CoefficientField::lambda1)
        .def_property_readonly("kind", &CoefficientField::kind)
        .def("serialize", &CoefficientField::serialize);

    m.def("make_coefficient_field", &make_coefficient_field, py::arg("kind"),
          py::arg("params"), py::arg("grid"), py::arg("seed") = 0);

    py::class_<DiscreteOperator>(m, "DiscreteOperator")
        .def(py::init<const CoefficientField&>())
        .def_property_readonly("matrix", &DiscreteOperator::matrix)
        .def("apply", &DiscreteOperator::apply);

    m.def("apply_gradient", &apply_gradient);
    m.def("apply_divergence", &apply_divergence);

    py::enum_<Family>(m, "Family")
        .value("semigroup", Family::Semigroup)
        .value("gradient_semigroup", Family::GradientSemigroup)
        .value("generator_semigroup", Family::GeneratorSemigroup);

    py::class_<PropagatorCache>(m, "PropagatorCache")
        .def(py::init<const DiscreteOperator&, double, int>(), py::arg("op"),
             py::arg("base_gap"), py::arg("levels"))
        .def("exponential", &PropagatorCache::exponential,
             py::return_value_policy::copy)
        .def("semigroup_apply", &PropagatorCache::semigroup_apply)
        .def("gradient_semigroup_apply", &PropagatorCache::gradient_semigroup_apply)
        .def("generator_semigroup_apply", &PropagatorCache::generator_semigroup_apply);

    m.def("offdiagonal_norm", &offdiagonal_norm, py::arg("cache"), py::arg("family"),
          py::arg("t"), py::arg("e_cells"), py::arg("f_cells"), py::arg("q"),
          py::arg("r"), py::arg("adjoint") = false);

    py::class_<DecaySample>(m, "DecaySample")
        .def_readonly("t", &DecaySample::t)
        .def_readonly("separation", &DecaySample::separation)
        .def_readonly("norm", &DecaySample::norm)
        .def_readonly("norm_at_zero", &DecaySample::norm_at_zero)
        .def_readonly("used_in_fit", &DecaySample::used_in_fit);

    py::class_<DecayFit>(m, "DecayFit")
        .def_readonly("family_tag", &DecayFit::family_tag)
        .def_readonly("samples", &DecayFit::samples)
        .def_readonly("fitted_order", &DecayFit::fitted_order)
        .def_readonly("fit_residual", &DecayFit::fit_residual);

    m.def("fit_decay_order", &fit_decay_order, py::arg("cache"), py::arg("family"),
          py::arg("q"), py::arg("r"), py::arg("time_list"), py::arg("separation_list"),
          py::arg("ball_radius") = 0.0, py::arg("adjoint") = false, py::arg("m") = 2);

    py::class_<SpaceTimeField>(m, "SpaceTimeField")
        .def(py::init<const Grid&, const TimeGrid&, int>(), py::arg("grid"),
             py::arg("time_grid"), py::arg("components") = 1)
        .def_readonly("grid", &SpaceTimeField::grid)
        .def_readonly("time_grid", &SpaceTimeField::time_grid)
        .def_property_readonly("components", &SpaceTimeField::components)
        .def("value_matrix",
             [](const SpaceTimeField& f, int component) {
                 return f.values.at(component);
             })
        .def("set_value_matrix",
             [](SpaceTimeField& f, int component, const Eigen::MatrixXcd& v) {
                 if (v.rows() != f.values.at(component).rows() ||
                     v.cols() != f.values.at(component).cols()) {
                     throw std::invalid_argument("value matrix shape mismatch");
                 }
                 f.values.at(component) = v;
             });

    m.def("zero_field", &zero_field, py::arg("grid"), py::arg("time_grid"),
          py::arg("components") = 1);
    m.def("random_field", &random_field, py::arg("grid"), py::arg("time_grid"),
          py::arg("seed"), py::arg("components") = 1);

    py::class_<TentParams>(m, "TentParams")
        .def(py::init([](double p, double beta, int mm, double alpha, double sigma) {
                 return TentParams{p, beta, mm, alpha, sigma};
             }),
             py::arg("p") = 2.0, py::arg("beta") = 0.0, py::arg("m") = 2,
             py::arg("alpha") = 1.0, py::arg("sigma") = 0.0)
        .def_readwrite("p", &TentParams::p)
        .def_readwrite("beta", &TentParams::beta)
        .def_readwrite("m", &TentParams::m)
        .def_readwrite("alpha", &TentParams::alpha)
        .def_readwrite("sigma", &TentParams::sigma);

    py::class_<NormReport>(m, "NormReport")
        .def_readonly("norm_kind", &NormReport::norm_kind)
        .def_readonly("value", &NormReport::value)
        .def_readonly("notes", &NormReport::notes)
        .def("serialize", &NormReport::serialize);

    m.def("conical_square_function", &conical_square_function);
    m.def("tent_norm", &tent_norm);
    m.def("tinfty_norm", &tinfty_norm);
    m.def("vertical_square_function", &vertical_square_function);
    m.def("mq_maximal", &mq_maximal);
    m.def("slice_norm", &slice_norm);
    m.def("kenig_pipher_norm", &kenig_pipher_norm);
    m.def("whitney_average", &whitney_average);
    m.def("make_atom", &make_atom, py::arg("grid"), py::arg("time_grid"),
          py::arg("ball_cells"), py::arg("ball_radius"), py::arg("p"), py::arg("beta"),
          py::arg("m"), py::arg("seed"));

    py::class_<AtomReport>(m, "AtomReport")
        .def_readonly("support_ok", &AtomReport::support_ok)
        .def_readonly("measured_norm", &AtomReport::measured_norm)
        .def_readonly("target_norm", &AtomReport::target_norm)
        .def_readonly("ball_measure", &AtomReport::ball_measure);

    py::class_<DuhamelSolution>(m, "DuhamelSolution")
        .def_readonly("u", &DuhamelSolution::u)
        .def_readonly("grad_u", &DuhamelSolution::grad_u)
        .def_readonly("lu", &DuhamelSolution::lu)
        .def_readonly("integrator_descriptor",
                      &DuhamelSolution::integrator_descriptor);

    m.def("duhamel_L1", &duhamel_L1);
    m.def("duhamel_Lhalf", &duhamel_Lhalf);
    m.def("duhamel_L0", &duhamel_L0);
    m.def("homotopy_residual", &homotopy_residual);
    m.def("weak_form_residual", &weak_form_residual);

    py::class_<CriticalExponents>(m, "CriticalExponents")
        .def("serialize", &CriticalExponents::serialize);
    m.def("critical_exponents",
          [](int n, int mm, const std::string& big_m, long long q_num, long long q_den,
             long long beta_num, long long beta_den, long long kappa_num,
             long long kappa_den, long long pm_num, long long pm_den) {
              Rational big_m_rat = big_m == "inf"
                                       ? Rational::infinity()
                                       : Rational(std::stoll(big_m));
              return critical_exponents(n, mm, big_m_rat, Rational(q_num, q_den),
                                        Rational(beta_num, beta_den),
                                        Rational(kappa_num, kappa_den),
                                        Rational(pm_num, pm_den));
          },
          py::arg("n"), py::arg("m"), py::arg("M") = "inf", py::arg("q_num") = 2,
          py::arg("q_den") = 1, py::arg("beta_num") = 0, py::arg("beta_den") = 1,
          py::arg("kappa_num") = 0, py::arg("kappa_den") = 1, py::arg("pm_num") = 1,
          py::arg("pm_den") = 1);

    m.def("run_experiment",
          [](const std::string& config_json) {
              ExperimentResult r = run_experiment(config_json);
              return py::make_tuple(r.config_hash, r.records);
          });

    m.def("serialize_field", &serialize_field);
    m.def("deserialize_field", &deserialize_field);
    m.def("save_field", &save_field);
    m.def("load_field", &load_field);
}
