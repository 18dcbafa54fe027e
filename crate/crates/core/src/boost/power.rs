use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// Rayleigh quotient of `vector`.
    pub value: f64,
    /// Unit eigenvector estimate.
    pub vector: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest algebraic eigenpair of a symmetric, possibly indefinite matrix.
///
/// Iterates on `A + cI` where `c` is the largest absolute row sum, which
/// bounds `|λ|` for every eigenvalue and so makes the shifted spectrum
/// non-negative; its dominant eigenvector is then the top algebraic one of `A`.
/// A matrix with non-finite entries yields a NaN eigenvalue.
pub fn leading_eigenpair<R: Rng + ?Sized>(
    matrix: &DMatrix<f64>,
    tol: f64,
    max_iterations: usize,
    rng: &mut R,
) -> EigenPair {
    let n = matrix.nrows();
    if matrix.iter().any(|v| !v.is_finite()) {
        return EigenPair {
            value: f64::NAN,
            vector: DVector::zeros(n),
            iterations: 0,
            converged: false,
        };
    }
    let shift = matrix
        .row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);

    let mut x = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = x.norm();
    if norm == 0.0 {
        x[0] = 1.0;
    } else {
        x /= norm;
    }
    if shift == 0.0 {
        return EigenPair {
            value: 0.0,
            vector: x,
            iterations: 0,
            converged: true,
        };
    }

    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let mut y = matrix * &x + &x * shift;
        let norm = y.norm();
        if norm == 0.0 {
            // x sits in the null space of A + cI; it is already an eigenvector
            converged = true;
            break;
        }
        y /= norm;
        let change = (&y - &x).norm();
        x = y;
        if change <= tol {
            converged = true;
            break;
        }
    }

    let value = x.dot(&(matrix * &x));
    EigenPair {
        value,
        vector: x,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn rng() -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(11)
    }

    #[test]
    fn indefinite_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        let p = leading_eigenpair(&a, POWER_TOLERANCE, POWER_MAX_ITERATIONS, &mut rng());
        assert!(p.converged);
        assert_relative_eq!(p.value, 1.0, max_relative = 1e-9);
        assert_relative_eq!(p.vector[0].abs(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn prefers_algebraic_over_magnitude() {
        // |-5| dominates but the top algebraic eigenvalue is 2
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-5.0, 2.0, 0.5]));
        let p = leading_eigenpair(&a, POWER_TOLERANCE, POWER_MAX_ITERATIONS, &mut rng());
        assert_relative_eq!(p.value, 2.0, max_relative = 1e-9);
        assert_relative_eq!(p.vector[1].abs(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn matches_dense_eigensolver() {
        let mut r = rng();
        for _ in 0..10 {
            let b = DMatrix::from_fn(6, 6, |_, _| r.random_range(-1.0..1.0));
            let a = &b + b.transpose();
            let p = leading_eigenpair(&a, POWER_TOLERANCE, POWER_MAX_ITERATIONS, &mut r);
            let top = SymmetricEigen::new(a.clone()).eigenvalues.max();
            assert_relative_eq!(p.value, top, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_matrix() {
        let a = DMatrix::zeros(3, 3);
        let p = leading_eigenpair(&a, POWER_TOLERANCE, POWER_MAX_ITERATIONS, &mut rng());
        assert_eq!(p.value, 0.0);
        assert_relative_eq!(p.vector.norm(), 1.0);
    }

    #[test]
    fn deterministic_given_rng_state() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let p1 = leading_eigenpair(&a, POWER_TOLERANCE, POWER_MAX_ITERATIONS, &mut rng());
        let p2 = leading_eigenpair(&a, POWER_TOLERANCE, POWER_MAX_ITERATIONS, &mut rng());
        assert_eq!(p1, p2);
    }

    #[test]
    fn non_finite_matrix_gives_nan() {
        let m = DMatrix::from_row_slice(2, 2, &[f64::NAN, 0.0, 0.0, 1.0]);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(0);
        let pair = leading_eigenpair(&m, 1e-10, 100, &mut rng);
        assert!(pair.value.is_nan());
        assert!(!pair.converged);
    }
}
