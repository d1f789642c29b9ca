use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use super::frame::Frame;
use super::gauge::CanonicalGauge;
use super::shape::ShapeOperator;
use crate::algebra::{solve_least_squares, LeastSquaresSolver};
use crate::tensors::TangentData;
use crate::{Error, Operator, Result, Vector};

/// Largest least-squares residual accepted for the Codazzi system.
pub const CODAZZI_SOLVABILITY_TOL: f64 = 1e-8;
const TOTAL_SYMMETRY_TOL: f64 = 1e-12;

/// Dense 3-tensor in tangent-frame coordinates, `T[a][b][c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.n + b) * self.n + c
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[self.index(a, b, c)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, value: f64) {
        let i = self.index(a, b, c);
        self.data[i] = value;
    }

    pub fn add(&self, other: &Tensor3) -> Tensor3 {
        assert_eq!(self.n, other.n);
        Tensor3 {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Number of independent entries of a totally symmetric tensor.
    pub fn totally_symmetric_dim(n: usize) -> usize {
        n * (n + 1) * (n + 2) / 6
    }

    /// Totally symmetric tensor from its entries with `a <= b <= c`.
    pub fn totally_symmetric(n: usize, params: &[f64]) -> Self {
        assert_eq!(params.len(), Self::totally_symmetric_dim(n));
        let mut t = Self::zeros(n);
        let mut k = 0;
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    for (i, j, l) in [
                        (a, b, c),
                        (a, c, b),
                        (b, a, c),
                        (b, c, a),
                        (c, a, b),
                        (c, b, a),
                    ] {
                        t.set(i, j, l, params[k]);
                    }
                    k += 1;
                }
            }
        }
        t
    }

    /// Largest difference between entries related by a permutation of slots.
    pub fn total_symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = self.get(a, b, c);
                    worst = worst
                        .max((v - self.get(b, a, c)).abs())
                        .max((v - self.get(a, c, b)).abs());
                }
            }
        }
        worst
    }
}

/// Linear system `T[a][b][c] - T[b][a][c] = C[a][b][c]` (for `a < b`) in the
/// unknowns `T[a][b][c]`, `b <= c`. It depends only on the tangent dimension,
/// so its pseudo-inverse is computed once per dimension and shared.
#[derive(Debug)]
pub struct CodazziSystem {
    n: usize,
    solver: LeastSquaresSolver,
}

impl CodazziSystem {
    pub fn for_dimension(n: usize) -> Arc<CodazziSystem> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CodazziSystem>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("codazzi cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(CodazziSystem::new(n)))
            .clone()
    }

    pub fn new(n: usize) -> Self {
        let unknowns = n * n * (n + 1) / 2;
        let rows = n * (n - 1) / 2 * n;
        let mut map = DMatrix::zeros(rows, unknowns);
        let mut row = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                for c in 0..n {
                    map[(row, Self::unknown(n, a, b, c))] += 1.0;
                    map[(row, Self::unknown(n, b, a, c))] -= 1.0;
                    row += 1;
                }
            }
        }
        Self {
            n,
            solver: LeastSquaresSolver::new(map),
        }
    }

    fn unknown(n: usize, a: usize, b: usize, c: usize) -> usize {
        let (lo, hi) = if b <= c { (b, c) } else { (c, b) };
        a * (n * (n + 1) / 2) + lo * (2 * n - lo + 1) / 2 + (hi - lo)
    }

    pub fn rank(&self) -> usize {
        self.solver.rank()
    }

    /// Codazzi right-hand side `C[a][b][c]` in tangent-frame coordinates.
    pub fn rhs(data: &TangentData) -> Tensor3 {
        let n = data.xi.len();
        let mut t = Tensor3::zeros(n);
        let (xi, phi, an, axi) = (&data.xi, &data.phi, &data.an, &data.axi);
        let (a, ja) = (&data.a_block, &data.ja_block);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = xi[i] * phi[(k, j)] - xi[j] * phi[(k, i)] - 2.0 * xi[k] * phi[(j, i)]
                        + an[i] * a[(k, j)]
                        - an[j] * a[(k, i)]
                        + axi[i] * ja[(k, j)]
                        - axi[j] * ja[(k, i)];
                    t.set(i, j, k, v);
                }
            }
        }
        t
    }

    /// Minimum-norm tensor symmetric in its last two slots whose
    /// antisymmetrization in the first two equals `rhs`, with the residual.
    pub fn particular(&self, rhs: &Tensor3) -> (Tensor3, f64) {
        let n = self.n;
        let mut target = Vec::with_capacity(n * (n - 1) / 2 * n);
        for a in 0..n {
            for b in (a + 1)..n {
                for c in 0..n {
                    target.push(rhs.get(a, b, c));
                }
            }
        }
        let ls = self.solver.solve(&DVector::from_vec(target));
        let mut t = Tensor3::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    t.set(a, b, c, ls.solution[Self::unknown(n, a, b, c)]);
                }
            }
        }
        (t, ls.residual_norm)
    }
}

/// First-jet data at a point: `T(X; Y, Z) = g((nabla_X S) Y, Z)`, the
/// differential of `alpha` and the 1-form `q`, all in tangent-frame
/// coordinates.
#[derive(Debug, Clone)]
pub struct JetData {
    frame: Frame,
    pub shape: ShapeOperator,
    pub gauge: CanonicalGauge,
    pub t: Tensor3,
    pub d_alpha: Vector,
    pub xi_alpha: f64,
    pub q: Vector,
    /// Least-squares residual of the Codazzi system.
    pub solvability_residual: f64,
    codazzi: Tensor3,
    data: TangentData,
    shape_reduced: Operator,
}

/// Builds the jet `T = T_particular + sym_free`.
///
/// `sym_free` must be totally symmetric and `q` is given in tangent-frame
/// coordinates.
pub fn extend_jet(
    frame: &Frame,
    shape: &ShapeOperator,
    gauge: &CanonicalGauge,
    sym_free: &Tensor3,
    xi_alpha: f64,
    q: &Vector,
) -> Result<JetData> {
    let n = frame.tangent_dim();
    if sym_free.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sym_free.dim(),
        });
    }
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.len(),
        });
    }
    let defect = sym_free.total_symmetry_defect();
    if defect > TOTAL_SYMMETRY_TOL * sym_free.sup_norm().max(1.0) {
        return Err(Error::NotTotallySymmetric(defect));
    }
    let data = TangentData::reduced(frame, gauge.a_star_op());
    let codazzi = CodazziSystem::rhs(&data);
    let (particular, residual) = CodazziSystem::for_dimension(n).particular(&codazzi);
    if residual > CODAZZI_SOLVABILITY_TOL {
        return Err(Error::CodazziInconsistent(residual));
    }
    let d_alpha = &data.xi * xi_alpha + &data.an * (2.0 * data.axi_xi);
    Ok(JetData {
        frame: frame.clone(),
        shape: shape.clone(),
        gauge: gauge.clone(),
        t: particular.add(sym_free),
        d_alpha,
        xi_alpha,
        q: q.clone(),
        solvability_residual: residual,
        codazzi,
        shape_reduced: frame.compress(shape.matrix()),
        data,
    })
}

/// Jet whose totally symmetric part is fitted by least squares so that
/// `(nabla_xi S) = 1/2 alpha (phi S - S phi)`.
pub fn tune_reeb_derivative(
    frame: &Frame,
    shape: &ShapeOperator,
    gauge: &CanonicalGauge,
    xi_alpha: f64,
    q: &Vector,
) -> Result<JetData> {
    let n = frame.tangent_dim();
    let zero = Tensor3::zeros(n);
    let base = extend_jet(frame, shape, gauge, &zero, xi_alpha, q)?;
    let phi = &base.data.phi;
    let s = &base.shape_reduced;
    let target = (phi * s - s * phi) * (0.5 * shape.alpha());
    // unknowns: totally symmetric parameters; equations: T[0][b][c], b <= c
    let params = Tensor3::totally_symmetric_dim(n);
    let rows: Vec<(usize, usize)> = (0..n).flat_map(|b| (b..n).map(move |c| (b, c))).collect();
    let mut map = DMatrix::zeros(rows.len(), params);
    for k in 0..params {
        let mut e = vec![0.0; params];
        e[k] = 1.0;
        let basis = Tensor3::totally_symmetric(n, &e);
        for (r, &(b, c)) in rows.iter().enumerate() {
            map[(r, k)] = basis.get(0, b, c);
        }
    }
    let rhs = DVector::from_iterator(
        rows.len(),
        rows.iter()
            .map(|&(b, c)| target[(c, b)] - base.t.get(0, b, c)),
    );
    let ls = solve_least_squares(&map, &rhs);
    let sym_free = Tensor3::totally_symmetric(n, ls.solution.as_slice());
    extend_jet(frame, shape, gauge, &sym_free, xi_alpha, q)
}

impl JetData {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn reduced_data(&self) -> &TangentData {
        &self.data
    }

    pub fn shape_reduced(&self) -> &Operator {
        &self.shape_reduced
    }

    /// Codazzi right-hand side `C[a][b][c]` in tangent-frame coordinates.
    pub fn codazzi_rhs(&self) -> &Tensor3 {
        &self.codazzi
    }

    /// `(nabla_Z S)` as a matrix in tangent-frame coordinates, `z` likewise.
    pub fn nabla_s(&self, z: &Vector) -> Operator {
        let n = self.t.dim();
        DMatrix::from_fn(n, n, |c, b| {
            (0..n).map(|a| z[a] * self.t.get(a, b, c)).sum()
        })
    }

    /// `(nabla_Z S)` as an ambient operator for an ambient tangent vector `z`.
    pub fn nabla_s_ambient(&self, z: &Vector) -> Operator {
        self.frame.expand(&self.nabla_s(&self.frame.coordinates(z)))
    }

    /// `max |T[a][b][c] - T[b][a][c] - C[a][b][c]|`.
    pub fn codazzi_defect(&self) -> f64 {
        let n = self.t.dim();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let d = self.t.get(a, b, c) - self.t.get(b, a, c) - self.codazzi.get(a, b, c);
                    worst = worst.max(d.abs());
                }
            }
        }
        worst
    }

    /// `max |T[a][b][c] - T[a][c][b]|`.
    pub fn last_slot_symmetry_defect(&self) -> f64 {
        let n = self.t.dim();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    worst = worst.max((self.t.get(a, b, c) - self.t.get(a, c, b)).abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{seeded_rng, standard_normal_vector};
    use crate::hypersurface::{
        canonicalize_conjugation, induce_frame, normal_with_singular_angle, shape_random_hopf,
    };
    use crate::quadric::QuadricModel;
    use crate::tensors::codazzi_rhs;

    fn at(m: usize, t: f64, seed: u64) -> (Frame, CanonicalGauge) {
        let model = QuadricModel::build(m, seed).unwrap();
        let n = normal_with_singular_angle(&model, t);
        (
            induce_frame(&model, &n).unwrap(),
            canonicalize_conjugation(&model, &n).unwrap(),
        )
    }

    fn random_symmetric_tensor(n: usize, seed: u64) -> Tensor3 {
        let p = standard_normal_vector(&mut seeded_rng(seed), Tensor3::totally_symmetric_dim(n));
        Tensor3::totally_symmetric(n, p.as_slice())
    }

    #[test]
    fn totally_symmetric_tensor_round_trip() {
        let t = random_symmetric_tensor(4, 1);
        assert_eq!(t.total_symmetry_defect(), 0.0);
        let mut bad = t.clone();
        bad.set(0, 1, 2, bad.get(0, 1, 2) + 1.0);
        assert!(bad.total_symmetry_defect() > 0.99);
    }

    #[test]
    fn reduced_codazzi_matches_ambient_evaluation() {
        let (f, g) = at(3, 0.35, 4);
        let data = TangentData::reduced(&f, g.a_star_op());
        let c = CodazziSystem::rhs(&data);
        let e = f.basis();
        for a in 0..5 {
            for b in 0..5 {
                for k in 0..5 {
                    let direct = codazzi_rhs(&f, g.a_star_op(), &e[a], &e[b], &e[k]);
                    assert!((direct - c.get(a, b, k)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn zero_data_gives_particular_solution() {
        let (f, g) = at(4, 0.2, 2);
        let zero_s = ShapeOperator::zero(&f);
        let n = f.tangent_dim();
        let jet = extend_jet(&f, &zero_s, &g, &Tensor3::zeros(n), 0.0, &Vector::zeros(n)).unwrap();
        assert!(jet.codazzi_defect() < 1e-10);
        assert!(jet.solvability_residual < 1e-10);
        assert!(jet.last_slot_symmetry_defect() < 1e-14);
        // the kernel is exactly the totally symmetric tensors
        let rank = n * n * (n + 1) / 2 - Tensor3::totally_symmetric_dim(n);
        assert_eq!(CodazziSystem::for_dimension(n).rank(), rank);
    }

    #[test]
    fn free_part_does_not_change_the_antisymmetric_part() {
        let (f, g) = at(3, 0.6, 9);
        let s = shape_random_hopf(&f, 0.4, 1);
        let n = f.tangent_dim();
        let jet = extend_jet(
            &f,
            &s,
            &g,
            &random_symmetric_tensor(n, 3),
            1.5,
            &Vector::zeros(n),
        )
        .unwrap();
        assert!(jet.codazzi_defect() < 1e-10);
        assert!(jet.last_slot_symmetry_defect() < 1e-12);
    }

    #[test]
    fn reeb_component_of_d_alpha() {
        for t in [0.0, 0.3, std::f64::consts::FRAC_PI_4] {
            let (f, g) = at(4, t, 5);
            let s = shape_random_hopf(&f, 0.4, 1);
            let n = f.tangent_dim();
            let jet = extend_jet(&f, &s, &g, &Tensor3::zeros(n), 2.5, &Vector::zeros(n)).unwrap();
            let xi = &jet.reduced_data().xi;
            assert!((jet.d_alpha.dot(xi) - 2.5).abs() < 1e-12);
            if t == 0.0 {
                assert!((&jet.d_alpha - xi * 2.5).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn non_symmetric_free_part_is_rejected() {
        let (f, g) = at(3, 0.1, 1);
        let n = f.tangent_dim();
        let mut t = Tensor3::zeros(n);
        t.set(0, 1, 2, 1.0);
        let err = extend_jet(&f, &ShapeOperator::zero(&f), &g, &t, 0.0, &Vector::zeros(n));
        assert!(matches!(err, Err(Error::NotTotallySymmetric(_))));
    }

    #[test]
    fn ambient_derivative_matches_reduced() {
        let (f, g) = at(3, 0.5, 2);
        let s = shape_random_hopf(&f, 0.1, 3);
        let n = f.tangent_dim();
        let jet = extend_jet(
            &f,
            &s,
            &g,
            &random_symmetric_tensor(n, 4),
            0.0,
            &Vector::zeros(n),
        )
        .unwrap();
        let z = f.random_tangent(&mut seeded_rng(1));
        let ambient = jet.nabla_s_ambient(&z);
        let e = f.basis();
        for b in 0..n {
            for c in 0..n {
                let direct: f64 = (0..n)
                    .map(|a| f.coordinates(&z)[a] * jet.t.get(a, b, c))
                    .sum();
                assert!((e[c].dot(&(&ambient * &e[b])) - direct).abs() < 1e-12);
            }
        }
    }
}
