use nalgebra::DMatrix;

use super::curvature::curvature;
use super::data::TangentData;
use super::forms::BilinearForm;
use crate::hypersurface::Frame;
use crate::{Operator, Vector};

/// `Ric*(X, Y) = 1/2 trace(phi R(X, phi Y))`, traced over the frame's tangent basis.
pub fn star_ricci_trace(frame: &Frame, shape: &Operator, a_star: &Operator) -> BilinearForm {
    star_ricci_trace_over(frame, shape, a_star, frame.basis())
}

/// As [`star_ricci_trace`], with the trace taken over `trace_basis`, which
/// must be an orthonormal basis of the tangent space.
pub fn star_ricci_trace_over(
    frame: &Frame,
    shape: &Operator,
    a_star: &Operator,
    trace_basis: &[Vector],
) -> BilinearForm {
    let r = curvature(frame, shape, a_star);
    let phi = frame.phi();
    let basis = frame.basis();
    let n = basis.len();
    let phi_basis: Vec<Vector> = trace_basis.iter().map(|e| phi.transpose() * e).collect();
    let reduced = DMatrix::from_fn(n, n, |a, b| {
        let phi_b = phi * &basis[b];
        let trace: f64 = trace_basis
            .iter()
            .zip(&phi_basis)
            .map(|(e, phi_t_e)| r.apply(&basis[a], &phi_b, e).dot(phi_t_e))
            .sum();
        0.5 * trace
    });
    BilinearForm::new(frame, frame.expand(&reduced))
}

/// The closed form `-2(m-1) g(phi^2 X, Y) - 2 g(N, AX) g(AY, N) - g((phi S)^2 X, Y)`.
///
/// It only agrees with [`star_ricci_trace`] when `A* N` is normal; see
/// [`star_ricci_corrected`].
pub fn star_ricci_closed(frame: &Frame, shape: &Operator, a_star: &Operator) -> BilinearForm {
    let data = TangentData::ambient(frame, a_star);
    BilinearForm::new(frame, data.star_ricci_closed(shape))
}

/// Closed form equal to the trace definition for every normal:
///
/// `-2(m-1) g(phi^2 X, Y) + 2 g(X, AN) g(Y, AN) + 2 g(X, A xi) g(Y, A xi)
///  + 2 g(AN, N) g(X, A xi) eta(Y) - g((phi S)^2 X, Y)`.
pub fn star_ricci_corrected(frame: &Frame, shape: &Operator, a_star: &Operator) -> BilinearForm {
    let data = TangentData::ambient(frame, a_star);
    BilinearForm::new(frame, data.star_ricci_corrected(shape))
}

/// `(L_xi g)(X, Y) = g(phi S X, Y) + g(X, phi S Y)`.
pub fn lie_xi_metric(frame: &Frame, shape: &Operator) -> BilinearForm {
    let phi_s = frame.phi() * shape;
    BilinearForm::new(frame, phi_s.transpose() + phi_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{seeded_rng, sup_norm};
    use crate::hypersurface::{
        canonicalize_conjugation, induce_frame, normal_with_singular_angle, shape_random,
        shape_random_hopf,
    };
    use crate::quadric::QuadricModel;
    use std::f64::consts::FRAC_PI_4;

    struct Point {
        frame: Frame,
        a: Operator,
        model: QuadricModel,
    }

    fn point(m: usize, t: f64, seed: u64) -> Point {
        let model = QuadricModel::build(m, seed).unwrap();
        let n = normal_with_singular_angle(&model, t);
        Point {
            frame: induce_frame(&model, &n).unwrap(),
            a: canonicalize_conjugation(&model, &n).unwrap().a_star.op,
            model,
        }
    }

    #[test]
    fn trace_is_frame_independent() {
        let p = point(4, 0.4, 2);
        let s = shape_random(&p.frame, 3).matrix().clone();
        let a = star_ricci_trace(&p.frame, &s, &p.a);
        let other = p.frame.random_tangent_basis(&mut seeded_rng(7));
        let b = star_ricci_trace_over(&p.frame, &s, &p.a, &other);
        assert!(a.max_entry_difference(&b) < 1e-10);
    }

    #[test]
    fn corrected_form_matches_trace_everywhere() {
        for (i, t) in [0.0, 0.3, FRAC_PI_4].into_iter().enumerate() {
            for m in 3..=5 {
                let p = point(m, t, 10 + i as u64);
                for s in [
                    shape_random(&p.frame, 1).matrix().clone(),
                    shape_random_hopf(&p.frame, 0.7, 2).matrix().clone(),
                ] {
                    let trace = star_ricci_trace(&p.frame, &s, &p.a);
                    let closed = star_ricci_corrected(&p.frame, &s, &p.a);
                    assert!(trace.max_entry_difference(&closed) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn printed_form_matches_trace_at_principal_normals() {
        let p = point(4, 0.0, 5);
        let s = shape_random(&p.frame, 6).matrix().clone();
        let trace = star_ricci_trace(&p.frame, &s, &p.a);
        let closed = star_ricci_closed(&p.frame, &s, &p.a);
        assert!(trace.max_entry_difference(&closed) < 1e-10);
    }

    #[test]
    fn printed_form_deviates_at_isotropic_normals() {
        let p = point(3, FRAC_PI_4, 5);
        let zero = Operator::zeros(6, 6);
        let trace = star_ricci_trace(&p.frame, &zero, &p.a);
        let closed = star_ricci_closed(&p.frame, &zero, &p.a);
        assert!(trace.max_entry_difference(&closed) > 0.5);
    }

    #[test]
    fn closed_form_without_shape_at_principal_normal() {
        let p = point(5, 0.0, 3);
        let zero = Operator::zeros(10, 10);
        let ric = star_ricci_closed(&p.frame, &zero, &p.a);
        let xi = p.frame.xi();
        let expected = (p.frame.projector() - xi * xi.transpose()) * 8.0;
        assert!(sup_norm(&(ric.matrix() - expected)) < 1e-12);
    }

    #[test]
    fn star_ricci_kills_reeb_in_the_second_slot() {
        let p = point(4, 0.2, 1);
        let s = shape_random(&p.frame, 4).matrix().clone();
        let ric = star_ricci_trace(&p.frame, &s, &p.a);
        let mut rng = seeded_rng(2);
        for _ in 0..10 {
            let x = p.frame.random_tangent(&mut rng);
            assert!(ric.eval(&x, p.frame.xi()).abs() < 1e-10);
        }
    }

    #[test]
    fn hopf_star_ricci_kills_reeb_at_singular_normals() {
        for t in [0.0, FRAC_PI_4] {
            let p = point(4, t, 1);
            let s = shape_random_hopf(&p.frame, -1.3, 4).matrix().clone();
            let ric = star_ricci_trace(&p.frame, &s, &p.a);
            let mut rng = seeded_rng(2);
            for _ in 0..10 {
                let y = p.frame.random_tangent(&mut rng);
                assert!(ric.eval(p.frame.xi(), &y).abs() < 1e-10);
            }
        }
        // at a generic normal the first slot picks up
        // 2 g(A xi, xi) (g(A xi, Y) + g(AN, N) eta(Y))
        let p = point(4, 0.2, 1);
        let s = shape_random_hopf(&p.frame, -1.3, 4).matrix().clone();
        let ric = star_ricci_trace(&p.frame, &s, &p.a);
        assert!(ric.sup_entry() > 0.0);
        let axi = &p.a * p.frame.xi();
        let y = p.frame.project(&axi);
        let an_n = (&p.a * p.frame.normal()).dot(p.frame.normal());
        let expected = 2.0 * axi.dot(p.frame.xi()) * (axi.dot(&y) + an_n * p.frame.eta(&y));
        assert!((ric.eval(p.frame.xi(), &y) - expected).abs() < 1e-10);
    }

    #[test]
    fn asymmetry_comes_from_the_shape_term() {
        let p = point(3, 0.3, 9);
        let s = shape_random(&p.frame, 2).matrix().clone();
        let ric = star_ricci_closed(&p.frame, &s, &p.a);
        let phi_s = p.frame.phi() * &s;
        let s_phi = &s * p.frame.phi();
        let diff = &phi_s * &phi_s - &s_phi * &s_phi;
        // M - M^T = (phi S)^2 - (S phi)^2 in matrix form
        let lhs = ric.matrix() - ric.matrix().transpose();
        assert!(sup_norm(&(lhs - diff)) < 1e-12);
        assert!(ric.asymmetry() > 1e-3);
    }

    #[test]
    fn lie_derivative_properties() {
        let p = point(4, 0.1, 4);
        let s = shape_random(&p.frame, 3).matrix().clone();
        let lie = lie_xi_metric(&p.frame, &s);
        assert!(lie.asymmetry() < 1e-12);
        let zero = Operator::zeros(8, 8);
        assert_eq!(lie_xi_metric(&p.frame, &zero).sup_entry(), 0.0);
        // phi commutes with phi^2, so S = phi^2 gives a Killing Reeb field
        let commuting = p.frame.phi() * p.frame.phi();
        assert!(lie_xi_metric(&p.frame, &commuting).sup_entry() < 1e-12);
        let _ = &p.model;
    }
}
