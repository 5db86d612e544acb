//! Vector fields `b(x, u)` and `σ(x)`.

/// Drift `b: ℝ^m × 𝕌 → ℝ^m` and diffusion `σ: ℝ^m → ℝ^{m×d}` (row-major).
pub trait VectorField: Sync {
    fn state_dim(&self) -> usize;

    fn noise_dim(&self) -> usize;

    fn drift(&self, x: &[f64], u: f64, out: &mut [f64]);

    fn sigma(&self, x: &[f64], out: &mut [f64]);

    /// `∂σ_{ij}/∂x_p` stored at `(i·d + j)·m + p`. The default is a central
    /// difference with step `1e-5 · max(1, |x_p|)`.
    fn sigma_jacobian(&self, x: &[f64], out: &mut [f64]) {
        finite_difference_jacobian(self, x, out)
    }

    /// Global Lipschitz constant of `b` in `(x, u)`, if known.
    fn drift_lipschitz(&self) -> Option<f64> {
        None
    }

    /// `sup |b|`, if known.
    fn drift_bound(&self) -> Option<f64> {
        None
    }
}

fn finite_difference_jacobian<V: VectorField + ?Sized>(vf: &V, x: &[f64], out: &mut [f64]) {
    let (m, d) = (vf.state_dim(), vf.noise_dim());
    let mut xp = x.to_vec();
    let mut hi = vec![0.0; m * d];
    let mut lo = vec![0.0; m * d];
    for p in 0..m {
        let h = 1e-5 * x[p].abs().max(1.0);
        xp[p] = x[p] + h;
        vf.sigma(&xp, &mut hi);
        xp[p] = x[p] - h;
        vf.sigma(&xp, &mut lo);
        xp[p] = x[p];
        for ij in 0..m * d {
            out[ij * m + p] = (hi[ij] - lo[ij]) / (2.0 * h);
        }
    }
}

/// Largest relative deviation between the field's Jacobian and a central
/// difference at `x`.
pub fn jacobian_mismatch<V: VectorField + ?Sized>(vf: &V, x: &[f64]) -> f64 {
    let (m, d) = (vf.state_dim(), vf.noise_dim());
    let mut exact = vec![0.0; m * d * m];
    let mut approx = vec![0.0; m * d * m];
    vf.sigma_jacobian(x, &mut exact);
    finite_difference_jacobian(vf, x, &mut approx);
    exact
        .iter()
        .zip(&approx)
        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
        .fold(0.0, f64::max)
}

/// The field with drift `b + ½ Σ_{j,p} ∂_p σ_{·j} σ_{pj}`: solving it against
/// an Itô lift matches solving the original against the Stratonovich lift.
#[derive(Debug, Clone, Copy)]
pub struct ItoCorrected<'a, V: ?Sized>(pub &'a V);

impl<V: VectorField + ?Sized> VectorField for ItoCorrected<'_, V> {
    fn state_dim(&self) -> usize {
        self.0.state_dim()
    }

    fn noise_dim(&self) -> usize {
        self.0.noise_dim()
    }

    fn drift(&self, x: &[f64], u: f64, out: &mut [f64]) {
        let (m, d) = (self.state_dim(), self.noise_dim());
        self.0.drift(x, u, out);
        let mut s = vec![0.0; m * d];
        let mut jac = vec![0.0; m * d * m];
        self.0.sigma(x, &mut s);
        self.0.sigma_jacobian(x, &mut jac);
        for i in 0..m {
            let mut c = 0.0;
            for j in 0..d {
                for p in 0..m {
                    c += jac[(i * d + j) * m + p] * s[p * d + j];
                }
            }
            out[i] += 0.5 * c;
        }
    }

    fn sigma(&self, x: &[f64], out: &mut [f64]) {
        self.0.sigma(x, out)
    }

    fn sigma_jacobian(&self, x: &[f64], out: &mut [f64]) {
        self.0.sigma_jacobian(x, out)
    }
}
