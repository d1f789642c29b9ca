use std::f64::consts::{FRAC_PI_8, TAU};

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::standard_normal_vector;
use crate::hypersurface::{
    canonicalize_conjugation, extend_jet, induce_frame, normal_with_singular_angle,
    symmetric_param_count, unpack_symmetric, CanonicalGauge, Frame, JetData, ShapeOperator,
    Tensor3,
};
use crate::quadric::QuadricModel;
use crate::tensors::{parallel_star_ricci_grid, TangentData};
use crate::{Error, Operator, Result, Vector};

/// A residual functional of the search point. Each one is a vector of
/// entries that vanishes exactly when the constraint holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// The Hopf constraint form.
    Hopf,
    /// `phi Ric* - Ric* phi` with the printed closed form of `Ric*`.
    CommutingStarRicci,
    /// `phi Ric* + Ric* phi`.
    AnticommutingStarRicci,
    /// `1/2 L_xi g + Ric* - lambda g`.
    Soliton { lambda: f64 },
    /// `S phi - phi S`.
    IsometricReeb,
    /// `S phi S`.
    SPhiSVanishes,
    /// Covariant derivative of the closed star-Ricci form (needs jet data).
    ParallelStarRicci,
    /// `(nabla_Z S) xi = Z(alpha) xi + alpha phi S Z - S phi S Z` (needs jet data).
    HopfJet,
    /// `S - S0`, with `S0` in tangent-frame coordinates.
    ShapeTarget { target: Vec<f64>, label: String },
}

impl Constraint {
    pub fn name(&self) -> String {
        match self {
            Constraint::Hopf => "hopf".into(),
            Constraint::CommutingStarRicci => "commuting_star_ricci".into(),
            Constraint::AnticommutingStarRicci => "anticommuting_star_ricci".into(),
            Constraint::Soliton { .. } => "star_ricci_soliton".into(),
            Constraint::IsometricReeb => "isometric_reeb".into(),
            Constraint::SPhiSVanishes => "s_phi_s_vanishes".into(),
            Constraint::ParallelStarRicci => "parallel_star_ricci".into(),
            Constraint::HopfJet => "hopf_jet".into(),
            Constraint::ShapeTarget { label, .. } => format!("shape_target:{label}"),
        }
    }

    /// `S - target` for a full symmetric target in tangent-frame coordinates.
    pub fn shape_target(label: &str, target: &Operator) -> Self {
        Constraint::ShapeTarget {
            target: target.iter().copied().collect(),
            label: label.to_string(),
        }
    }

    fn needs_jet(&self) -> bool {
        matches!(self, Constraint::ParallelStarRicci | Constraint::HopfJet)
    }

    pub(crate) fn residual(&self, point: &SearchPoint, out: &mut Vec<f64>) {
        let d = &point.data;
        let s = &point.shape_reduced;
        let n = s.nrows();
        match self {
            Constraint::Hopf => upper(&d.hopf_form(s, point.alpha), false, out),
            Constraint::CommutingStarRicci => {
                let (c, _) = d.commutators(&d.star_ricci_closed(s));
                out.extend(c.iter());
            }
            Constraint::AnticommutingStarRicci => {
                let (_, a) = d.commutators(&d.star_ricci_closed(s));
                out.extend(a.iter());
            }
            Constraint::Soliton { lambda } => out.extend(d.soliton_form(s, *lambda).iter()),
            Constraint::IsometricReeb => upper(&(s * &d.phi - &d.phi * s), true, out),
            Constraint::SPhiSVanishes => out.extend((s * &d.phi * s).iter()),
            Constraint::ParallelStarRicci => {
                let jet = point
                    .jet
                    .as_ref()
                    .expect("jet data requested by the search space");
                out.extend(parallel_star_ricci_grid(jet));
            }
            Constraint::HopfJet => {
                let jet = point
                    .jet
                    .as_ref()
                    .expect("jet data requested by the search space");
                let phi_s = &d.phi * s;
                let s_phi_s = s * &d.phi * s;
                for z in 0..n {
                    for y in 0..n {
                        let expected = jet.d_alpha[z] * d.xi[y] + point.alpha * phi_s[(y, z)]
                            - s_phi_s[(y, z)];
                        out.push(jet.t.get(z, 0, y) - expected);
                    }
                }
            }
            Constraint::ShapeTarget { target, .. } => {
                let t = Operator::from_column_slice(n, n, target);
                upper(&(s - t), true, out);
            }
        }
    }
}

fn upper(m: &Operator, include_diagonal: bool, out: &mut Vec<f64>) {
    let n = m.nrows();
    for r in 0..n {
        let start = if include_diagonal { r } else { r + 1 };
        for c in start..n {
            out.push(m[(r, c)]);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedConstraint {
    pub constraint: Constraint,
    pub weight: f64,
}

/// Named set of constraints; the total residual is `sqrt(sum w_i ||r_i||^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub name: String,
    pub items: Vec<WeightedConstraint>,
}

impl ConstraintSet {
    pub fn new(name: &str, constraints: impl IntoIterator<Item = Constraint>) -> Self {
        Self {
            name: name.to_string(),
            items: constraints
                .into_iter()
                .map(|constraint| WeightedConstraint {
                    constraint,
                    weight: 1.0,
                })
                .collect(),
        }
    }

    pub fn with_weight(mut self, index: usize, weight: f64) -> Self {
        self.items[index].weight = weight;
        self
    }

    /// The set without the constraint named `name`.
    pub fn without(&self, name: &str) -> Self {
        Self {
            name: format!("{} without {name}", self.name),
            items: self
                .items
                .iter()
                .filter(|w| w.constraint.name() != name)
                .cloned()
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub(crate) fn needs_jet(&self) -> bool {
        self.items.iter().any(|w| w.constraint.needs_jet())
    }

    /// Weighted residual norm of the set at raw search parameters.
    pub fn residual_at(&self, space: &SearchSpace, params: &[f64]) -> Result<f64> {
        let model = space.build_model()?;
        let point = space.decode(&model, params)?;
        Ok(self.stacked_residual(&point).norm())
    }

    pub(crate) fn stacked_residual(&self, point: &SearchPoint) -> DVector<f64> {
        let mut out = Vec::new();
        for w in &self.items {
            let start = out.len();
            w.constraint.residual(point, &mut out);
            let scale = w.weight.sqrt();
            for v in &mut out[start..] {
                *v *= scale;
            }
        }
        DVector::from_vec(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeDomain {
    /// `t = (pi/8)(1 - cos u)` over the whole range `[0, pi/4]`.
    Free,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeDomain {
    /// `S = alpha xi (x) eta + B` with `B` symmetric on the holomorphic distribution.
    Hopf,
    /// Any symmetric tangent operator.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaDomain {
    /// Unbounded parameter, initial values uniform in `[-5, 5]`.
    Free,
    Fixed(f64),
}

/// Parameterization of pointwise data: gauge angle, shape operator and
/// optionally the free part of a first jet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub m: usize,
    pub model_seed: u64,
    pub gauge: GaugeDomain,
    pub shape: ShapeDomain,
    pub alpha: AlphaDomain,
    pub jet: bool,
}

impl SearchSpace {
    pub fn hopf(m: usize, model_seed: u64) -> Self {
        Self {
            m,
            model_seed,
            gauge: GaugeDomain::Free,
            shape: ShapeDomain::Hopf,
            alpha: AlphaDomain::Free,
            jet: false,
        }
    }

    pub fn with_gauge(mut self, gauge: GaugeDomain) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn with_alpha(mut self, alpha: AlphaDomain) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_shape(mut self, shape: ShapeDomain) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_jet(mut self) -> Self {
        self.jet = true;
        self
    }

    fn tangent_dim(&self) -> usize {
        2 * self.m - 1
    }

    fn shape_params(&self) -> usize {
        match self.shape {
            ShapeDomain::Hopf => symmetric_param_count(self.tangent_dim() - 1),
            ShapeDomain::General => symmetric_param_count(self.tangent_dim()),
        }
    }

    fn has_alpha_param(&self) -> bool {
        self.shape == ShapeDomain::Hopf && self.alpha == AlphaDomain::Free
    }

    fn jet_params(&self) -> usize {
        let n = self.tangent_dim();
        if self.jet {
            1 + n + Tensor3::totally_symmetric_dim(n)
        } else {
            0
        }
    }

    pub fn param_count(&self) -> usize {
        usize::from(self.gauge == GaugeDomain::Free)
            + usize::from(self.has_alpha_param())
            + self.shape_params()
            + self.jet_params()
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        if self.gauge == GaugeDomain::Free {
            out.push(rng.random_range(0.0..TAU));
        }
        if self.has_alpha_param() {
            out.push(rng.random_range(-5.0..5.0));
        }
        let rest = self.shape_params() + self.jet_params();
        out.extend(standard_normal_vector(rng, rest).iter());
        DVector::from_vec(out)
    }

    pub fn build_model(&self) -> Result<QuadricModel> {
        QuadricModel::build(self.m, self.model_seed)
    }

    /// Decodes a parameter vector into pointwise data.
    pub fn decode(&self, model: &QuadricModel, params: &[f64]) -> Result<SearchPoint> {
        if params.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                found: params.len(),
            });
        }
        let mut k = 0;
        let t = match self.gauge {
            GaugeDomain::Free => {
                k += 1;
                FRAC_PI_8 * (1.0 - params[0].cos())
            }
            GaugeDomain::Fixed(t) => t,
        };
        let normal = normal_with_singular_angle(model, t);
        let frame = induce_frame(model, &normal)?;
        let gauge = canonicalize_conjugation(model, &normal)?;
        let n = self.tangent_dim();
        let (alpha, shape_reduced) = match self.shape {
            ShapeDomain::Hopf => {
                let alpha = match self.alpha {
                    AlphaDomain::Free => {
                        k += 1;
                        params[k - 1]
                    }
                    AlphaDomain::Fixed(a) => a,
                };
                let count = symmetric_param_count(n - 1);
                let block = unpack_symmetric(n - 1, &params[k..k + count]);
                k += count;
                let mut s = Operator::zeros(n, n);
                s[(0, 0)] = alpha;
                s.view_mut((1, 1), (n - 1, n - 1)).copy_from(&block);
                (alpha, s)
            }
            ShapeDomain::General => {
                let count = symmetric_param_count(n);
                let s = unpack_symmetric(n, &params[k..k + count]);
                k += count;
                (s[(0, 0)], s)
            }
        };
        let data = TangentData::reduced(&frame, gauge.a_star_op());
        let jet = if self.jet {
            let xi_alpha = params[k];
            let q = Vector::from_column_slice(&params[k + 1..k + 1 + n]);
            let sym = Tensor3::totally_symmetric(n, &params[k + 1 + n..]);
            let shape = ShapeOperator::from_reduced(&frame, &shape_reduced);
            Some(extend_jet(&frame, &shape, &gauge, &sym, xi_alpha, &q)?)
        } else {
            None
        };
        Ok(SearchPoint {
            t,
            alpha,
            frame,
            gauge,
            data,
            shape_reduced,
            jet,
        })
    }
}

/// Decoded search point.
#[derive(Debug, Clone)]
pub struct SearchPoint {
    pub t: f64,
    pub alpha: f64,
    pub frame: Frame,
    pub gauge: CanonicalGauge,
    pub data: TangentData,
    /// Shape operator in tangent-frame coordinates.
    pub shape_reduced: Operator,
    pub jet: Option<JetData>,
}

impl SearchPoint {
    pub fn shape(&self) -> ShapeOperator {
        ShapeOperator::from_reduced(&self.frame, &self.shape_reduced)
    }
}
