use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::data::TangentData;
use super::forms::{bilinear_sup, BilinearForm, RANDOM_PAIRS};
use crate::algebra::{seeded_rng, standard_normal_vector, sup_norm};
use crate::hypersurface::{Frame, JetData, NormalKind};
use crate::{Error, Operator, Result, Vector};

const RANDOM_TRIPLE_SEED: u64 = 0x7e1_70b5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermValue {
    pub term: String,
    pub value: f64,
}

/// Sup-norm of a pointwise residual with the sup-norm of each of its terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub value: f64,
    pub breakdown: Vec<TermValue>,
}

impl ResidualReport {
    /// Report for a bilinear residual given as a sum of ambient term matrices.
    pub fn from_bilinear_terms(name: &str, frame: &Frame, terms: &[(&str, Operator)]) -> Self {
        let dim = frame.dim();
        let total: Operator = terms
            .iter()
            .fold(DMatrix::zeros(dim, dim), |acc, (_, t)| acc + t);
        Self {
            name: name.to_string(),
            value: bilinear_sup(frame, &total),
            breakdown: terms
                .iter()
                .map(|(term, t)| TermValue {
                    term: term.to_string(),
                    value: bilinear_sup(frame, t),
                })
                .collect(),
        }
    }

    fn from_reduced_terms(name: &str, frame: &Frame, terms: &[(&str, Operator)]) -> Self {
        let ambient: Vec<(&str, Operator)> =
            terms.iter().map(|(n, t)| (*n, frame.expand(t))).collect();
        Self::from_bilinear_terms(name, frame, &ambient)
    }
}

/// Residual of the Hopf constraint
/// `2g(S phi S X, Y) - alpha g((phi S + S phi) X, Y) - 2g(phi X, Y)
///  + 2g(X, AN)g(Y, A xi) - 2g(Y, AN)g(X, A xi)
///  + 2g(xi, A xi)(g(Y, AN)eta(X) - g(X, AN)eta(Y))`.
pub fn hopf_residual(
    frame: &Frame,
    shape: &Operator,
    a_star: &Operator,
    alpha: f64,
) -> ResidualReport {
    let data = TangentData::ambient(frame, a_star);
    ResidualReport::from_bilinear_terms("hopf_constraint", frame, &data.hopf_terms(shape, alpha))
}

/// The form `1/2 L_xi g + Ric* - lambda g`, with the printed closed form of `Ric*`.
pub fn soliton_form(
    frame: &Frame,
    shape: &Operator,
    a_star: &Operator,
    lambda: f64,
) -> BilinearForm {
    BilinearForm::new(
        frame,
        TangentData::ambient(frame, a_star).soliton_form(shape, lambda),
    )
}

pub fn soliton_residual(
    frame: &Frame,
    shape: &Operator,
    a_star: &Operator,
    lambda: f64,
) -> ResidualReport {
    let data = TangentData::ambient(frame, a_star);
    let terms = [
        ("1/2 L_xi g", data.lie_xi_metric(shape) * 0.5),
        ("Ric*", data.star_ricci_closed(shape)),
        ("-lambda g", -(&data.metric * lambda)),
    ];
    ResidualReport::from_bilinear_terms("star_ricci_soliton", frame, &terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorResiduals {
    pub commuting: f64,
    pub anticommuting: f64,
}

/// Sup-norm entries of `phi Ric* -+ Ric* phi`, with `Ric*` as an operator.
pub fn commutator_residuals(ric_star: &BilinearForm, frame: &Frame) -> CommutatorResiduals {
    let k = ric_star.operator();
    let a = frame.phi() * &k;
    let b = &k * frame.phi();
    CommutatorResiduals {
        commuting: sup_norm(&(&a - &b)),
        anticommuting: sup_norm(&(a + b)),
    }
}

/// `g(phi X, Y) - g(X, AN)g(Y, A xi) + g(Y, AN)g(X, A xi)`.
pub fn twisted_phi_form(frame: &Frame, a_star: &Operator) -> BilinearForm {
    BilinearForm::new(
        frame,
        TangentData::ambient(frame, a_star).twisted_phi_form(),
    )
}

const PARALLEL_TERMS: [&str; 9] = [
    "-2(m-1)g(SZ, phi X)eta(Y)",
    "2(m-1)eta(X)g(phi S Z, Y)",
    "-2g(SZ, AX)g(AY, N)",
    "4q(Z)g(N, AX)g(AY, N)",
    "-2g(SZ, AY)g(AX, N)",
    "-g(SZ, S phi S X)eta(Y)",
    "g(phi (nabla_Z S) phi S X, Y)",
    "eta(SX)g(phi S^2 Z, Y)",
    "g(phi S phi (nabla_Z S) X, Y)",
];

/// Per-term matrices `M_k` of the derivative of the star-Ricci tensor in the
/// direction `z`, as bilinear forms in `(X, Y)`; everything in tangent-frame
/// coordinates.
fn parallel_term_matrices(jet: &JetData, data: &TangentData, z: &Vector) -> [Operator; 9] {
    let s = jet.shape_reduced();
    let phi = &data.phi;
    let xi = &data.xi;
    let an = &data.an;
    let c = 2.0 * (data.m as f64 - 1.0);
    let sz = s * z;
    let a_sz = &data.a_block * &sz;
    let nabla = jet.nabla_s(z);
    let qz = jet.q.dot(z);
    [
        (phi.transpose() * &sz) * xi.transpose() * (-c),
        xi * (phi * &sz).transpose() * c,
        &a_sz * an.transpose() * -2.0,
        an * an.transpose() * (4.0 * qz),
        an * a_sz.transpose() * -2.0,
        -((s * phi * s).transpose() * &sz) * xi.transpose(),
        (phi * &nabla * phi * s).transpose(),
        (s * xi) * (phi * s * s * z).transpose(),
        (phi * s * phi * &nabla).transpose(),
    ]
}

/// The nine terms of the covariant derivative of the closed star-Ricci form,
/// at a triple `(Z, X, Y)` given in tangent-frame coordinates. Their sum
/// vanishes when the star-Ricci tensor is parallel.
pub fn parallel_star_ricci_terms(jet: &JetData, z: &Vector, x: &Vector, y: &Vector) -> [f64; 9] {
    let data = jet.reduced_data();
    parallel_term_matrices(jet, data, z).map(|m| x.dot(&(m * y)))
}

/// Sum of the nine terms at every frame triple `(e_a, e_b, e_c)`, indexed
/// `(a * n + b) * n + c`.
pub fn parallel_star_ricci_grid(jet: &JetData) -> Vec<f64> {
    let data = jet.reduced_data();
    let n = jet.frame().tangent_dim();
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        let mut z = Vector::zeros(n);
        z[a] = 1.0;
        let total = parallel_term_matrices(jet, data, &z)
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, m| acc + m);
        for b in 0..n {
            for c in 0..n {
                out.push(total[(b, c)]);
            }
        }
    }
    out
}

/// Sup over frame triples plus seeded random unit triples.
pub fn parallel_star_ricci_residual(jet: &JetData) -> ResidualReport {
    let data = jet.reduced_data();
    let n = jet.frame().tangent_dim();
    let mut term_sup = [0.0_f64; 9];
    let mut total_sup = 0.0_f64;
    let mut visit = |mats: [Operator; 9], x: Option<(&Vector, &Vector)>| {
        let total: Operator = mats.iter().fold(DMatrix::zeros(n, n), |acc, m| acc + m);
        match x {
            None => {
                total_sup = total_sup.max(total.amax());
                for (k, m) in mats.iter().enumerate() {
                    term_sup[k] = term_sup[k].max(m.amax());
                }
            }
            Some((x, y)) => {
                total_sup = total_sup.max(x.dot(&(&total * y)).abs());
                for (k, m) in mats.iter().enumerate() {
                    term_sup[k] = term_sup[k].max(x.dot(&(m * y)).abs());
                }
            }
        }
    };
    for a in 0..n {
        let mut z = Vector::zeros(n);
        z[a] = 1.0;
        visit(parallel_term_matrices(jet, data, &z), None);
    }
    let mut rng = seeded_rng(RANDOM_TRIPLE_SEED);
    let mut unit = || {
        let v = standard_normal_vector(&mut rng, n);
        let norm = v.norm();
        v / norm
    };
    for _ in 0..RANDOM_PAIRS {
        let (z, x, y) = (unit(), unit(), unit());
        visit(parallel_term_matrices(jet, data, &z), Some((&x, &y)));
    }
    ResidualReport {
        name: "parallel_star_ricci".to_string(),
        value: total_sup,
        breakdown: PARALLEL_TERMS
            .iter()
            .zip(term_sup)
            .map(|(term, value)| TermValue {
                term: term.to_string(),
                value,
            })
            .collect(),
    }
}

/// Consistency of the jet with the Hopf condition: `(nabla_Z S) xi` must equal
/// `Z(alpha) xi + alpha phi S Z - S phi S Z`.
pub fn hopf_jet_residual(jet: &JetData) -> ResidualReport {
    let data = jet.reduced_data();
    let n = jet.frame().tangent_dim();
    let s = jet.shape_reduced();
    let alpha = jet.shape.alpha();
    let phi = &data.phi;
    // rows indexed by Z, columns by Y
    let derivative = DMatrix::from_fn(n, n, |z, y| jet.t.get(z, 0, y));
    let expected = &jet.d_alpha * data.xi.transpose() + (phi * s * alpha - s * phi * s).transpose();
    let terms = [
        ("g((nabla_Z S) xi, Y)", derivative),
        (
            "-Z(alpha)eta(Y) - alpha g(phi S Z, Y) + g(S phi S Z, Y)",
            -expected,
        ),
    ];
    ResidualReport::from_reduced_terms("hopf_jet", jet.frame(), &terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NablaXiCheck {
    /// `(nabla_xi S) Y - 1/2 alpha (phi S - S phi) Y`.
    pub nabla_xi: ResidualReport,
    /// `S phi S X - 1/2 alpha (phi S + S phi) X - phi X + g(X, AN) A xi - g(X, A xi) AN`.
    pub isotropic_hopf: ResidualReport,
}

/// Checks the Reeb derivative of the shape operator at an isotropic normal.
pub fn nabla_xi_shape_check(jet: &JetData) -> Result<NablaXiCheck> {
    let kind = jet.gauge.normal_type();
    if kind.kind != NormalKind::Isotropic {
        return Err(Error::WrongNormalType {
            required: "Isotropic",
            found: kind.to_string(),
        });
    }
    let data = jet.reduced_data();
    let s = jet.shape_reduced();
    let alpha = jet.shape.alpha();
    let phi = &data.phi;
    let phi_s = phi * s;
    let s_phi = s * phi;
    let nabla = jet.nabla_s(&data.xi);
    let frame = jet.frame();
    let nabla_xi = ResidualReport::from_reduced_terms(
        "nabla_xi_shape",
        frame,
        &[
            ("(nabla_xi S)", nabla.transpose()),
            (
                "-1/2 alpha (phi S - S phi)",
                -((&phi_s - &s_phi) * (0.5 * alpha)).transpose(),
            ),
        ],
    );
    let isotropic_hopf = ResidualReport::from_reduced_terms(
        "isotropic_hopf_constraint",
        frame,
        &[
            ("S phi S", (&s_phi * s).transpose()),
            (
                "-1/2 alpha (phi S + S phi)",
                -((&phi_s + &s_phi) * (0.5 * alpha)).transpose(),
            ),
            ("-phi", -phi.transpose()),
            (
                "g(X, AN) A xi - g(X, A xi) AN",
                (&data.axi * data.an.transpose() - &data.an * data.axi.transpose()).transpose(),
            ),
        ],
    );
    Ok(NablaXiCheck {
        nabla_xi,
        isotropic_hopf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{
        canonicalize_conjugation, extend_jet, induce_frame, normal_with_singular_angle,
        shape_random, shape_random_hopf, tune_reeb_derivative, CanonicalGauge, ShapeOperator,
        Tensor3,
    };
    use crate::quadric::QuadricModel;
    use crate::tensors::star_ricci_closed;
    use std::f64::consts::FRAC_PI_4;

    fn at(m: usize, t: f64, seed: u64) -> (Frame, CanonicalGauge) {
        let model = QuadricModel::build(m, seed).unwrap();
        let n = normal_with_singular_angle(&model, t);
        (
            induce_frame(&model, &n).unwrap(),
            canonicalize_conjugation(&model, &n).unwrap(),
        )
    }

    fn random_jet(m: usize, t: f64, seed: u64) -> JetData {
        let (f, g) = at(m, t, seed);
        let n = f.tangent_dim();
        let mut rng = seeded_rng(seed + 100);
        let s = shape_random_hopf(&f, 0.8, seed + 1);
        let free = standard_normal_vector(&mut rng, Tensor3::totally_symmetric_dim(n));
        let q = standard_normal_vector(&mut rng, n);
        extend_jet(
            &f,
            &s,
            &g,
            &Tensor3::totally_symmetric(n, free.as_slice()),
            0.3,
            &q,
        )
        .unwrap()
    }

    /// Second, independent expansion of the nine terms in ambient coordinates.
    fn ambient_terms(jet: &JetData, z: &Vector, x: &Vector, y: &Vector) -> [f64; 9] {
        let f = jet.frame();
        let (z, x, y) = (
            f.basis_matrix() * z,
            f.basis_matrix() * x,
            f.basis_matrix() * y,
        );
        let a = jet.gauge.a_star_op();
        let s = jet.shape.matrix();
        let phi = f.phi();
        let n = f.normal();
        let m = f.m() as f64;
        let nabla = jet.nabla_s_ambient(&z);
        let q = f.basis_matrix() * &jet.q;
        let sz = s * &z;
        [
            -2.0 * (m - 1.0) * sz.dot(&(phi * &x)) * f.eta(&y),
            2.0 * (m - 1.0) * f.eta(&x) * (phi * &sz).dot(&y),
            -2.0 * sz.dot(&(a * &x)) * (a * &y).dot(n),
            4.0 * q.dot(&z) * n.dot(&(a * &x)) * (a * &y).dot(n),
            -2.0 * sz.dot(&(a * &y)) * (a * &x).dot(n),
            -sz.dot(&(s * phi * s * &x)) * f.eta(&y),
            (phi * &nabla * phi * s * &x).dot(&y),
            f.eta(&(s * &x)) * (phi * s * s * &z).dot(&y),
            (phi * s * phi * &nabla * &x).dot(&y),
        ]
    }

    #[test]
    fn parallel_terms_match_second_expansion() {
        for (m, t) in [(3, 0.3), (4, FRAC_PI_4), (5, 0.0)] {
            let jet = random_jet(m, t, m as u64);
            let n = jet.frame().tangent_dim();
            let mut rng = seeded_rng(9);
            for _ in 0..20 {
                let z = standard_normal_vector(&mut rng, n);
                let x = standard_normal_vector(&mut rng, n);
                let y = standard_normal_vector(&mut rng, n);
                let fast = parallel_star_ricci_terms(&jet, &z, &x, &y);
                let slow = ambient_terms(&jet, &z, &x, &y);
                for (a, b) in fast.iter().zip(slow.iter()) {
                    assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn parallel_residual_vanishes_without_shape_and_q() {
        let (f, g) = at(3, 0.4, 1);
        let n = f.tangent_dim();
        let jet = extend_jet(
            &f,
            &ShapeOperator::zero(&f),
            &g,
            &Tensor3::zeros(n),
            0.0,
            &Vector::zeros(n),
        )
        .unwrap();
        let report = parallel_star_ricci_residual(&jet);
        assert_eq!(report.breakdown.len(), 9);
        assert!(report.value < 1e-12, "{report:?}");
    }

    #[test]
    fn principal_parallel_residual_drops_conjugation_terms() {
        let jet = random_jet(4, 0.0, 3);
        let report = parallel_star_ricci_residual(&jet);
        for k in [2, 3, 4] {
            assert!(
                report.breakdown[k].value < 1e-12,
                "{:?}",
                report.breakdown[k]
            );
        }
        assert!(report.value > 1e-3);
    }

    #[test]
    fn hopf_residual_examples() {
        let (f, g) = at(3, 0.0, 2);
        let p = DMatrix::identity(4, 4);
        let s = ShapeOperator::hopf(&f, 0.0, &p);
        assert!(hopf_residual(&f, s.matrix(), g.a_star_op(), 0.0).value < 1e-10);
        let r = shape_random(&f, 5);
        let report = hopf_residual(&f, r.matrix(), g.a_star_op(), r.alpha());
        assert!(report.value > 1e-2);
        assert_eq!(report.breakdown.len(), 5);
    }

    #[test]
    fn soliton_reeb_component_is_lambda() {
        for t in [0.0, 0.3, FRAC_PI_4] {
            let (f, g) = at(4, t, 6);
            let s = shape_random_hopf(&f, 1.1, 2);
            let form = soliton_form(&f, s.matrix(), g.a_star_op(), 0.75);
            assert!((form.eval(f.xi(), f.xi()).abs() - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn soliton_residual_without_shape_at_principal_normal() {
        let (f, g) = at(3, 0.0, 6);
        let zero = Operator::zeros(6, 6);
        let form = soliton_form(&f, &zero, g.a_star_op(), 4.0);
        let c = DMatrix::from_columns(f.holomorphic_basis());
        assert!((c.transpose() * form.matrix() * &c).amax() < 1e-10);
        assert!((form.eval(f.xi(), f.xi()) + 4.0).abs() < 1e-12);
    }

    #[test]
    fn commutators() {
        let (f, g) = at(4, 0.0, 1);
        let zero = Operator::zeros(8, 8);
        let c = commutator_residuals(&star_ricci_closed(&f, &zero, g.a_star_op()), &f);
        assert!(c.commuting < 1e-10);
        let s = shape_random(&f, 2);
        let c = commutator_residuals(&star_ricci_closed(&f, s.matrix(), g.a_star_op()), &f);
        assert!(c.commuting > 1e-3 && c.anticommuting > 1e-3);
    }

    #[test]
    fn nabla_xi_check_requires_isotropic_normal() {
        let jet = random_jet(3, 0.3, 2);
        assert!(matches!(
            nabla_xi_shape_check(&jet),
            Err(Error::WrongNormalType { .. })
        ));
    }

    #[test]
    fn nabla_xi_check_on_zero_and_tuned_jets() {
        let (f, g) = at(3, FRAC_PI_4, 4);
        let n = f.tangent_dim();
        let zero = extend_jet(
            &f,
            &ShapeOperator::zero(&f),
            &g,
            &Tensor3::zeros(n),
            0.0,
            &Vector::zeros(n),
        )
        .unwrap();
        let check = nabla_xi_shape_check(&zero).unwrap();
        // with S = 0 only the Codazzi particular solution and -phi + conjugation terms remain
        assert!(check.nabla_xi.value.is_finite());

        let s = shape_random_hopf(&f, 0.9, 3);
        let tuned = tune_reeb_derivative(&f, &s, &g, 0.0, &Vector::zeros(n)).unwrap();
        let check = nabla_xi_shape_check(&tuned).unwrap();
        assert!(check.nabla_xi.value < 1e-8, "{:?}", check.nabla_xi);
        assert!(check.isotropic_hopf.value > 1e-3);

        let random = random_jet(3, FRAC_PI_4, 8);
        let check = nabla_xi_shape_check(&random).unwrap();
        assert!(check.nabla_xi.value > 1e-3);
        assert_eq!(check.nabla_xi.breakdown.len(), 2);
    }

    #[test]
    fn jet_hopf_consistency_is_measured() {
        let jet = random_jet(3, 0.2, 1);
        let r = hopf_jet_residual(&jet);
        assert!(r.value > 1e-3);
    }
}
