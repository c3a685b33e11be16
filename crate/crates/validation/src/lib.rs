//! Reference computations that do not share code with the shooting solver.

pub mod fd {
    //! Second-order finite differences for `−y'' + q y = λ w y` on `[0, b]`
    //! with `y(0) = 0` and `y'(b) = κ y(b)`.
    //!
    //! Unknowns are `y(x_j)`, `x_j = j h`, `j = 1..=n`. The Robin end uses a
    //! ghost point and its row is halved so that `A` is complex symmetric and
    //! `A y = λ W y` with `W` diagonal.

    use nalgebra::DMatrix;
    use nssl::Complex64;

    pub struct FdProblem {
        pub h: f64,
        pub diag: Vec<Complex64>,
        pub off: f64,
        pub weight: Vec<f64>,
    }

    impl FdProblem {
        pub fn new(b: f64, n: usize, kappa: f64, q: impl Fn(f64) -> Complex64, w: impl Fn(f64) -> f64) -> Self {
            let h = b / n as f64;
            let h2 = h * h;
            let mut diag = Vec::with_capacity(n);
            let mut weight = Vec::with_capacity(n);
            for j in 1..=n {
                let x = j as f64 * h;
                if j < n {
                    diag.push(Complex64::new(2.0 / h2, 0.0) + q(x));
                    weight.push(w(x));
                } else {
                    diag.push(Complex64::new((1.0 - h * kappa) / h2, 0.0) + 0.5 * q(x));
                    weight.push(0.5 * w(x));
                }
            }
            Self {
                h,
                diag,
                off: -1.0 / h2,
                weight,
            }
        }

        pub fn len(&self) -> usize {
            self.diag.len()
        }

        pub fn is_empty(&self) -> bool {
            self.diag.is_empty()
        }

        fn matrix(&self) -> DMatrix<Complex64> {
            let n = self.len();
            let mut a = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
            for j in 0..n {
                a[(j, j)] = self.diag[j];
                if j + 1 < n {
                    a[(j, j + 1)] = Complex64::new(self.off, 0.0);
                    a[(j + 1, j)] = Complex64::new(self.off, 0.0);
                }
            }
            a
        }

        /// All eigenvalues with `|λ| <= cap`, from the dense matrix `A⁻¹W`
        /// (whose eigenvalues are `1/λ`). Inverting keeps the tiny weights
        /// of a decaying `w` from inflating the matrix norm.
        pub fn dense_eigenvalues(&self, cap: f64) -> Vec<Complex64> {
            let n = self.len();
            let w = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(self.weight[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let c = self.matrix().lu().solve(&w).expect("A is invertible");
            let mu = c.schur().eigenvalues().expect("complex Schur form is triangular");
            let mut out: Vec<Complex64> = mu.iter().filter(|m| m.norm() * cap >= 1.0).map(|m| m.inv()).collect();
            out.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            out
        }

        /// Solves `(A − σW) x = r` by elimination without pivoting.
        fn shifted_solve(&self, sigma: Complex64, r: &[Complex64]) -> Vec<Complex64> {
            let n = self.len();
            let off = Complex64::new(self.off, 0.0);
            let mut c = vec![Complex64::new(0.0, 0.0); n];
            let mut d = vec![Complex64::new(0.0, 0.0); n];
            let mut piv = self.diag[0] - sigma * self.weight[0];
            c[0] = off / piv;
            d[0] = r[0] / piv;
            for j in 1..n {
                piv = self.diag[j] - sigma * self.weight[j] - off * c[j - 1];
                c[j] = off / piv;
                d[j] = (r[j] - off * d[j - 1]) / piv;
            }
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            x[n - 1] = d[n - 1];
            for j in (0..n - 1).rev() {
                x[j] = d[j] - c[j] * x[j + 1];
            }
            x
        }

        /// `yᵀ A y / yᵀ W y` (no conjugation: `A` is complex symmetric).
        fn rayleigh(&self, y: &[Complex64]) -> Complex64 {
            let n = self.len();
            let mut num = Complex64::new(0.0, 0.0);
            let mut den = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let mut ay = self.diag[j] * y[j];
                if j > 0 {
                    ay += self.off * y[j - 1];
                }
                if j + 1 < n {
                    ay += self.off * y[j + 1];
                }
                num += y[j] * ay;
                den += y[j] * y[j] * self.weight[j];
            }
            num / den
        }

        /// Eigenvalue nearest `shift` by shifted inverse iteration.
        pub fn inverse_iteration(&self, shift: Complex64) -> Complex64 {
            let n = self.len();
            let mut y: Vec<Complex64> = (0..n).map(|j| Complex64::new(1.0 + (j % 7) as f64, 0.5)).collect();
            let mut lambda = shift;
            for _ in 0..200 {
                let r: Vec<Complex64> = y.iter().zip(&self.weight).map(|(v, w)| v * w).collect();
                let x = self.shifted_solve(shift, &r);
                let scale = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
                y = x.into_iter().map(|v| v / scale).collect();
                let next = self.rayleigh(&y);
                let done = (next - lambda).norm() <= 1e-13 * next.norm();
                lambda = next;
                if done {
                    break;
                }
            }
            lambda
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fd::FdProblem;
    use nssl::Complex64;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> FdProblem {
        FdProblem::new(1.0, n, 0.0, |_| Complex64::new(0.0, 0.0), |_| 1.0)
    }

    #[test]
    fn dirichlet_neumann_modes_converge_at_second_order() {
        // −y'' = λ y, y(0) = 0 = y'(1): λ_k = ((k + 1/2) π)²
        let exact = (0.5 * PI).powi(2);
        let e1 = (laplacian(100).dense_eigenvalues(50.0)[0] - exact).norm();
        let e2 = (laplacian(200).dense_eigenvalues(50.0)[0] - exact).norm();
        assert!(e1 < 1e-3 * exact);
        assert!((e1 / e2 - 4.0).abs() < 0.1, "ratio {}", e1 / e2);
    }

    #[test]
    fn inverse_iteration_matches_dense_solve() {
        let pr = FdProblem::new(
            20.0,
            400,
            -1.0,
            |_| Complex64::new(0.75, 1.0),
            |x| (-3.0 * x).exp(),
        );
        for lambda in pr.dense_eigenvalues(150.0).into_iter().take(4) {
            let refined = pr.inverse_iteration(lambda * Complex64::new(1.0 + 1e-3, 1e-3));
            assert!((refined - lambda).norm() < 1e-9 * lambda.norm(), "{lambda} vs {refined}");
        }
    }

    #[test]
    fn robin_end_converges() {
        // −y'' = λ y, y(0) = 0, y'(1) = −y(1): tan √λ = −√λ, first root √λ ≈ 2.0287578
        let k = 2.028_757_838_110_434_f64;
        let pr = FdProblem::new(1.0, 2000, -1.0, |_| Complex64::new(0.0, 0.0), |_| 1.0);
        let lambda = pr.inverse_iteration(Complex64::new(4.0, 0.0));
        assert!((lambda.re - k * k).abs() < 1e-5 * k * k, "{lambda}");
        assert!(lambda.im.abs() < 1e-12);
    }
}
