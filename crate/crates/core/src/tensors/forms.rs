use crate::algebra::{asymmetry, seeded_rng, sup_norm};
use crate::hypersurface::Frame;
use crate::{Operator, Vector};

/// Number of seeded random tangent pairs added to the frame grid by
/// [`bilinear_sup`].
pub const RANDOM_PAIRS: usize = 64;
const RANDOM_PAIR_SEED: u64 = 0x5eed_0fa1;

/// Ambient bilinear form on the tangent space, `B(X, Y) = X^T M Y`, with the
/// normal direction annihilated.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    matrix: Operator,
}

impl BilinearForm {
    /// Wraps `matrix`, compressing it to the tangent space of `frame`.
    pub fn new(frame: &Frame, matrix: Operator) -> Self {
        let p = frame.projector();
        Self {
            matrix: p * matrix * p,
        }
    }

    /// The form `g(K X, Y)`.
    pub fn from_operator(frame: &Frame, op: &Operator) -> Self {
        Self::new(frame, op.transpose())
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    /// The operator `K` with `B(X, Y) = g(K X, Y)`.
    pub fn operator(&self) -> Operator {
        self.matrix.transpose()
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.matrix * y))
    }

    pub fn asymmetry(&self) -> f64 {
        asymmetry(&self.matrix)
    }

    /// Largest entry of `M` in ambient coordinates.
    pub fn sup_entry(&self) -> f64 {
        sup_norm(&self.matrix)
    }

    /// Largest entry of the difference, in ambient coordinates.
    pub fn max_entry_difference(&self, other: &BilinearForm) -> f64 {
        sup_norm(&(&self.matrix - &other.matrix))
    }

    /// Sup of `|B(X, Y)|` over frame pairs and seeded random unit pairs.
    pub fn sup_over_frame(&self, frame: &Frame) -> f64 {
        bilinear_sup(frame, &self.matrix)
    }
}

/// `max |X^T M Y|` over all pairs of the orthonormal tangent frame of `frame`
/// and [`RANDOM_PAIRS`] seeded random unit tangent pairs. `matrix` is ambient.
pub fn bilinear_sup(frame: &Frame, matrix: &Operator) -> f64 {
    let grid = frame.compress(matrix).amax();
    let mut rng = seeded_rng(RANDOM_PAIR_SEED);
    let mut worst = grid;
    for _ in 0..RANDOM_PAIRS {
        let x = frame.random_unit_tangent(&mut rng);
        let y = frame.random_unit_tangent(&mut rng);
        worst = worst.max(x.dot(&(matrix * y)).abs());
    }
    worst
}
